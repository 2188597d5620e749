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

#include "ephybrid/problem_io.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace ephybrid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void Fail(std::string_view field, std::string_view what) {
  throw Error(ErrorCode::kParseError, fmt::format("field '{}': {}", field, what));
}

std::string Sub(std::string_view field, std::string_view key) {
  return fmt::format("{}.{}", field, key);
}

std::string Index(std::string_view field, std::size_t i) {
  return fmt::format("{}[{}]", field, i);
}

const Json& Require(const Json& j, std::string_view field, const char* key) {
  if (!j.is_object()) Fail(field, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) Fail(Sub(field, key), "missing");
  return *it;
}

double ParseNumber(const Json& j, std::string_view field) {
  if (!j.is_number()) Fail(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) Fail(field, "not finite");
  return v;
}

double ParseBound(const Json& j, std::string_view field, double unbounded) {
  if (j.is_null()) return unbounded;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    Fail(field, fmt::format("unknown bound '{}'", s));
  }
  return ParseNumber(j, field);
}

std::string ParseType(const Json& j, std::string_view field) {
  const Json& t = Require(j, field, "type");
  if (!t.is_string()) Fail(Sub(field, "type"), "expected a string");
  return t.get<std::string>();
}

Halfspace ParseHalfspace(const Json& j, std::string_view field) {
  Point a = ParsePoint(Require(j, field, "a"), Sub(field, "a"));
  const double b = ParseNumber(Require(j, field, "b"), Sub(field, "b"));
  std::string sense = "<=";
  if (auto it = j.find("sense"); it != j.end()) {
    if (!it->is_string()) Fail(Sub(field, "sense"), "expected a string");
    sense = it->get<std::string>();
  }
  try {
    if (sense == "<=") return Halfspace::LessEqual(std::move(a), b);
    if (sense == ">=") return Halfspace::GreaterEqual(a, b);
  } catch (const Error& e) {
    Fail(field, e.what());
  }
  Fail(Sub(field, "sense"), fmt::format("expected '<=' or '>=', got '{}'", sense));
}

Box ParseBox(const Json& j, std::string_view field) {
  const Json& lo = Require(j, field, "lo");
  const Json& hi = Require(j, field, "hi");
  if (!lo.is_array() || !hi.is_array()) Fail(field, "lo and hi must be arrays");
  if (lo.size() != hi.size()) Fail(field, "lo and hi differ in length");
  Point l(static_cast<Eigen::Index>(lo.size()));
  Point h(static_cast<Eigen::Index>(hi.size()));
  for (std::size_t i = 0; i < lo.size(); ++i) {
    l(static_cast<Eigen::Index>(i)) = ParseBound(lo[i], Index(Sub(field, "lo"), i), -kInf);
    h(static_cast<Eigen::Index>(i)) = ParseBound(hi[i], Index(Sub(field, "hi"), i), kInf);
  }
  try {
    return Box::Create(std::move(l), std::move(h));
  } catch (const Error& e) {
    Fail(field, e.what());
  }
}

Json BoundToJson(double v) {
  if (std::isinf(v)) return v > 0 ? Json("inf") : Json("-inf");
  return v;
}

Json HalfspaceToJson(const Halfspace& h) {
  return Json{{"type", "halfspace"}, {"a", PointToJson(h.normal)}, {"b", h.offset}};
}

Json BoxToJson(const Box& b) {
  Json lo = Json::array(), hi = Json::array();
  for (Eigen::Index i = 0; i < b.lo.size(); ++i) {
    lo.push_back(BoundToJson(b.lo(i)));
    hi.push_back(BoundToJson(b.hi(i)));
  }
  return Json{{"type", "box"}, {"lo", lo}, {"hi", hi}};
}

Json OptionalNumber(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json CutToJson(const Cut& cut) {
  return cut ? HalfspaceToJson(*cut) : Json{{"type", "whole_space"}};
}

}  // namespace

Point ParsePoint(const Json& j, std::string_view field) {
  if (!j.is_array() || j.empty()) Fail(field, "expected a nonempty array of numbers");
  Point x(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    x(static_cast<Eigen::Index>(i)) = ParseNumber(j[i], Index(field, i));
  }
  return x;
}

DenseMatrix ParseMatrix(const Json& j, std::string_view field) {
  if (!j.is_array() || j.empty()) Fail(field, "expected a nonempty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) Fail(Index(field, 0), "expected a nonempty row");
  const std::size_t cols = j[0].size();
  DenseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string row_field = Index(field, r);
    if (!j[r].is_array() || j[r].size() != cols) {
      Fail(row_field, fmt::format("expected a row of {} numbers", cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          ParseNumber(j[r][c], Index(row_field, c));
    }
  }
  return m;
}

ConvexSet ParseConvexSet(const Json& j, std::string_view field) {
  const std::string type = ParseType(j, field);
  if (type == "whole_space") {
    const Json& d = Require(j, field, "dim");
    if (!d.is_number_integer() || d.get<int>() < 1) {
      Fail(Sub(field, "dim"), "expected a positive integer");
    }
    return WholeSpace{d.get<int>()};
  }
  if (type == "halfspace") return ParseHalfspace(j, field);
  if (type == "box") return ParseBox(j, field);
  if (type == "two_halfspaces") {
    Halfspace first = ParseHalfspace(Require(j, field, "first"), Sub(field, "first"));
    Halfspace second =
        ParseHalfspace(Require(j, field, "second"), Sub(field, "second"));
    if (first.dim() != second.dim()) Fail(field, "halfspaces differ in dimension");
    return TwoHalfspaces{std::move(first), std::move(second)};
  }
  if (type == "polyhedron") {
    std::vector<Halfspace> hs;
    if (auto it = j.find("halfspaces"); it != j.end()) {
      if (!it->is_array()) Fail(Sub(field, "halfspaces"), "expected an array");
      for (std::size_t i = 0; i < it->size(); ++i) {
        hs.push_back(ParseHalfspace((*it)[i], Index(Sub(field, "halfspaces"), i)));
      }
    }
    std::optional<Box> box;
    if (auto it = j.find("box"); it != j.end() && !it->is_null()) {
      box = ParseBox(*it, Sub(field, "box"));
    }
    try {
      return Polyhedron::Create(std::move(hs), std::move(box));
    } catch (const Error& e) {
      Fail(field, e.what());
    }
  }
  Fail(Sub(field, "type"), fmt::format("unknown set type '{}'", type));
}

ProblemBundle ParseProblem(const Json& j, std::string_view field) {
  if (!j.is_object()) Fail(field, "expected an object");
  std::string name = "custom";
  if (auto it = j.find("name"); it != j.end() && it->is_string()) {
    name = it->get<std::string>();
  }
  const std::string bf_field = Sub(field, "bifunction");
  const Json& bf = Require(j, field, "bifunction");
  const std::string bf_type = ParseType(bf, bf_field);

  std::optional<QuadraticBifunction> f;
  std::optional<LipschitzConstants> derived;
  try {
    if (bf_type == "nash_cournot") {
      DenseMatrix p = ParseMatrix(Require(bf, bf_field, "P"), Sub(bf_field, "P"));
      DenseMatrix q = ParseMatrix(Require(bf, bf_field, "Q"), Sub(bf_field, "Q"));
      Point lin = ParsePoint(Require(bf, bf_field, "q"), Sub(bf_field, "q"));
      f = QuadraticBifunction::NashCournot(p, q, std::move(lin));
      if (!j.contains("constants")) derived = NashCournotConstants(p, q);
    } else if (bf_type == "vip") {
      DenseMatrix a = ParseMatrix(Require(bf, bf_field, "A"), Sub(bf_field, "A"));
      Point b = ParsePoint(Require(bf, bf_field, "b"), Sub(bf_field, "b"));
      VipBifunction vip = VipAsBifunction(AffineOperator(std::move(a), std::move(b)));
      f = std::move(vip.bifunction);
      derived = vip.constants;
    } else {
      Fail(Sub(bf_field, "type"), fmt::format("unknown bifunction type '{}'", bf_type));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParseError) throw;
    Fail(bf_field, e.what());
  }

  ConvexSet feasible =
      ParseConvexSet(Require(j, field, "feasible"), Sub(field, "feasible"));

  NonexpansiveMapping mapping = IdentityMapping{};
  if (auto it = j.find("mapping"); it != j.end()) {
    const std::string m_field = Sub(field, "mapping");
    const std::string m_type = ParseType(*it, m_field);
    if (m_type == "averaged_projections") {
      AveragedProjections avg{
          ParseConvexSet(Require(*it, m_field, "outer"), Sub(m_field, "outer")),
          {}};
      const Json& inner = Require(*it, m_field, "inner");
      if (!inner.is_array()) Fail(Sub(m_field, "inner"), "expected an array");
      for (std::size_t i = 0; i < inner.size(); ++i) {
        avg.inner.push_back(ParseConvexSet(inner[i], Index(Sub(m_field, "inner"), i)));
      }
      mapping = std::move(avg);
    } else if (m_type != "identity") {
      Fail(Sub(m_field, "type"), fmt::format("unknown mapping type '{}'", m_type));
    }
  }

  LipschitzConstants constants;
  if (auto it = j.find("constants"); it != j.end()) {
    const std::string c_field = Sub(field, "constants");
    const double c1 = ParseNumber(Require(*it, c_field, "c1"), Sub(c_field, "c1"));
    const double c2 = ParseNumber(Require(*it, c_field, "c2"), Sub(c_field, "c2"));
    try {
      constants = LipschitzConstants::Create(c1, c2);
    } catch (const Error& e) {
      Fail(c_field, e.what());
    }
  } else {
    constants = *derived;
  }

  std::optional<Point> known;
  if (auto it = j.find("known_solution"); it != j.end() && !it->is_null()) {
    known = ParsePoint(*it, Sub(field, "known_solution"));
  }

  ProblemBundle bundle{std::move(name),     std::move(*f),   std::move(feasible),
                       std::move(mapping),  constants,       std::move(known)};
  try {
    CheckConsistent(bundle);
  } catch (const Error& e) {
    Fail(field, e.what());
  }
  return bundle;
}

Json PointToJson(const Point& x) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) out.push_back(x(i));
  return out;
}

Json ConvexSetToJson(const ConvexSet& set) {
  if (const auto* w = std::get_if<WholeSpace>(&set)) {
    return Json{{"type", "whole_space"}, {"dim", w->dimension}};
  }
  if (const auto* h = std::get_if<Halfspace>(&set)) return HalfspaceToJson(*h);
  if (const auto* b = std::get_if<Box>(&set)) return BoxToJson(*b);
  if (const auto* t = std::get_if<TwoHalfspaces>(&set)) {
    return Json{{"type", "two_halfspaces"},
                {"first", HalfspaceToJson(t->first)},
                {"second", HalfspaceToJson(t->second)}};
  }
  const auto& p = std::get<Polyhedron>(set);
  Json hs = Json::array();
  for (const Halfspace& h : p.halfspaces) hs.push_back(HalfspaceToJson(h));
  Json out{{"type", "polyhedron"}, {"halfspaces", hs}};
  if (p.box) out["box"] = BoxToJson(*p.box);
  return out;
}

Json RunReportToJson(const RunReport& report) {
  Json trace = Json::array();
  for (const IterationRecord& r : report.trace) {
    trace.push_back(Json{
        {"n", r.n},
        {"x", PointToJson(r.x_cur)},
        {"y_next", PointToJson(r.y_next)},
        {"z_next", PointToJson(r.z_next)},
        {"w_next", PointToJson(r.w_next)},
        {"x_next", PointToJson(r.x_next)},
        {"alpha", r.alpha},
        {"alpha_clamped", r.alpha_clamped},
        {"epsilon", r.epsilon},
        {"residual_w", r.residual_w},
        {"dist_to_target", OptionalNumber(r.dist_to_target)},
        {"distance_slack", OptionalNumber(r.distance_slack)},
        {"cn", CutToJson(r.cn)},
        {"qn", CutToJson(r.qn)},
        {"distance_ok", r.distance_ok},
        {"fejer_ok", r.fejer_ok},
        {"membership_ok", r.membership_ok},
        {"projection_ok", r.projection_ok},
    });
    if (r.cn_aux) trace.back()["cn_aux"] = CutToJson(r.cn_aux);
  }
  return Json{{"iterations", report.iterations},
              {"final_x", PointToJson(report.final_x)},
              {"elapsed_s", report.elapsed_s},
              {"stop_reason", std::string(StopReasonName(report.stop_reason))},
              {"alpha_clamped_iterations", report.alpha_clamped_iterations},
              {"trace", std::move(trace)}};
}

void WriteTraceCsv(const RunReport& report, std::ostream& out) {
  const Eigen::Index dim = report.final_x.size();
  out << "n,residual_w,epsilon,dist_to_target,alpha_n";
  for (Eigen::Index i = 0; i < dim; ++i) out << ",x" << (i + 1);
  out << '\n';
  for (const IterationRecord& r : report.trace) {
    out << fmt::format("{},{:.17g},{:.17g},", r.n, r.residual_w, r.epsilon);
    if (r.dist_to_target) out << fmt::format("{:.17g}", *r.dist_to_target);
    out << fmt::format(",{:.17g}", r.alpha);
    for (Eigen::Index i = 0; i < r.x_next.size(); ++i) {
      out << fmt::format(",{:.17g}", r.x_next(i));
    }
    out << '\n';
  }
}

Json ParseJsonText(std::string_view text, std::string_view source) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line =
        1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    throw Error(ErrorCode::kParseError,
                fmt::format("{}:{}: {}", source, line, e.what()));
  }
}

}  // namespace ephybrid
