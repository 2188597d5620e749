// Copyright 2026 The ephybrid Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON encoding of points, matrices, convex sets and problem bundles, plus
// the JSON / CSV writers for solver reports.
//
// Sets are tagged objects:
//   {"type": "whole_space", "dim": 3}
//   {"type": "halfspace", "a": [3, 2, 1], "b": -6}          (a.z <= b)
//   {"type": "halfspace", "a": [1, 1, 1], "b": 1, "sense": ">="}
//   {"type": "box", "lo": [0, 0, null], "hi": [1, 1, "inf"]}
//   {"type": "polyhedron", "halfspaces": [...], "box": {...}}
//   {"type": "two_halfspaces", "first": {...}, "second": {...}}
// Box bounds accept null, "inf" and "-inf" for unbounded coordinates.

#ifndef EPHYBRID_PROBLEM_IO_H_
#define EPHYBRID_PROBLEM_IO_H_

#include <ostream>
#include <string>
#include <string_view>

#include "json.hpp"

#include "ephybrid/convex_sets.h"
#include "ephybrid/hybrid_solver.h"
#include "ephybrid/problems.h"

namespace ephybrid {

using Json = nlohmann::json;

// All parsers throw kParseError naming the offending field path.
Point ParsePoint(const Json& j, std::string_view field);
DenseMatrix ParseMatrix(const Json& j, std::string_view field);
ConvexSet ParseConvexSet(const Json& j, std::string_view field);

// {"name", "bifunction", "feasible", "mapping", "constants"?,
//  "known_solution"?}; "bifunction" is {"type": "nash_cournot", "P", "Q", "q"}
// or {"type": "vip", "A", "b"}. Missing constants are derived from the data.
ProblemBundle ParseProblem(const Json& j, std::string_view field = "problem");

Json PointToJson(const Point& x);
Json ConvexSetToJson(const ConvexSet& set);

Json RunReportToJson(const RunReport& report);

// Header: n,residual_w,epsilon,dist_to_target,alpha_n,x1..xd (x = x_{n+1}).
void WriteTraceCsv(const RunReport& report, std::ostream& out);

// Parses text and converts nlohmann parse errors into kParseError with the
// line number.
Json ParseJsonText(std::string_view text, std::string_view source);

}  // namespace ephybrid

#endif  // EPHYBRID_PROBLEM_IO_H_
