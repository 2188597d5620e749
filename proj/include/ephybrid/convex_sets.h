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

#ifndef EPHYBRID_CONVEX_SETS_H_
#define EPHYBRID_CONVEX_SETS_H_

#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "ephybrid/active_set_qp.h"
#include "ephybrid/core.h"

namespace ephybrid {

// Default additive membership tolerance.
inline constexpr double kMembershipTol = 1e-10;

// {z : <normal, z> <= offset}. The normal is never zero.
struct Halfspace {
  Point normal;
  double offset = 0.0;

  // Throws kZeroNormal / kNotFinite.
  static Halfspace LessEqual(Point normal, double offset);
  // {z : <normal, z> >= offset}, stored as <-normal, z> <= -offset.
  static Halfspace GreaterEqual(const Point& normal, double offset);

  int dim() const { return static_cast<int>(normal.size()); }
};

// Elementwise bounds; entries may be +-infinity.
struct Box {
  Point lo;
  Point hi;

  // Throws kDimensionMismatch / kInvalidBox when some lo_i > hi_i.
  static Box Create(Point lo, Point hi);
  static Box Uniform(int dim, double lo, double hi);

  int dim() const { return static_cast<int>(lo.size()); }
};

struct Polyhedron {
  std::vector<Halfspace> halfspaces;
  std::optional<Box> box;

  // Throws kDimensionMismatch, or kInvalidBox for an empty description.
  static Polyhedron Create(std::vector<Halfspace> halfspaces,
                           std::optional<Box> box = std::nullopt);

  int dim() const;
};

struct TwoHalfspaces {
  Halfspace first;
  Halfspace second;
};

struct WholeSpace {
  int dimension = 0;
};

using ConvexSet =
    std::variant<WholeSpace, Halfspace, Box, Polyhedron, TwoHalfspaces>;

// A halfspace cut that may have degenerated to the whole space.
using Cut = std::optional<Halfspace>;

int Dimension(const ConvexSet& set);

// True iff every defining inequality holds up to the additive `tol`
// (plus 1e-12 relative to each offset).
bool Contains(const ConvexSet& set, const Point& x, double tol = kMembershipTol);
bool Contains(const Halfspace& h, const Point& x, double tol = kMembershipTol);

// Inequality rows describing the set (infinite box bounds are skipped).
LinearConstraints ToLinearConstraints(const ConvexSet& set);

Point ProjectBox(const Point& x, const Box& box);

// x - max(0, (<a,x> - b) / ||a||^2) a.
Point ProjectHalfspace(const Point& x, const Halfspace& h);

// Exact projection onto h1 n h2 by case analysis. Throws kEmptyIntersection
// when the intersection is empty.
Point ProjectTwoHalfspaces(const Point& x, const Halfspace& h1,
                           const Halfspace& h2);
// Same, with either cut allowed to be the whole space.
Point ProjectTwoHalfspaces(const Point& x, const Cut& h1, const Cut& h2);

// Projection through the active-set QP with objective 1/2 ||y - x||^2.
// Throws kInfeasibleSet. The solver overload reuses its warm start.
Point ProjectPolyhedron(const Point& x, const Polyhedron& p);
Point ProjectPolyhedron(const Point& x, const Polyhedron& p,
                        ActiveSetQpSolver& solver);

Point Project(const ConvexSet& set, const Point& x);

// Deterministic sample of points of `set`: projections of Gaussian points
// (scale `spread`) and random convex combinations of those, so both boundary
// and interior points appear.
std::vector<Point> SampleFeasiblePoints(const ConvexSet& set, int count,
                                        std::mt19937_64& rng,
                                        double spread = 3.0);

}  // namespace ephybrid

#endif  // EPHYBRID_CONVEX_SETS_H_
