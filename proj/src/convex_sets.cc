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

#include "ephybrid/convex_sets.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace ephybrid {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void RequireDim(const Point& x, int dim, const char* what) {
  if (x.size() != dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("{}: point has {} entries, set lives in R^{}",
                            what, x.size(), dim));
  }
}

bool Satisfies(const Halfspace& h, const Point& x, double tol) {
  return h.normal.dot(x) <= h.offset + tol + 1e-12 * std::abs(h.offset);
}

// Slack used when deciding whether a projected point satisfies the other cut.
double CaseTol(const Halfspace& h, const Point& z) {
  return 1e-12 * (1.0 + std::abs(h.offset) + h.normal.norm() * z.norm());
}

void AppendRow(const Point& normal, double offset, std::vector<Point>& rows,
               std::vector<double>& offsets) {
  rows.push_back(normal);
  offsets.push_back(offset);
}

Point ProjectTwoViaQp(const Point& x, const Halfspace& h1, const Halfspace& h2) {
  try {
    return ProjectPolyhedron(x, Polyhedron{{h1, h2}, std::nullopt});
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInfeasibleSet) {
      throw Error(ErrorCode::kEmptyIntersection, e.what());
    }
    throw;
  }
}

}  // namespace

Halfspace Halfspace::LessEqual(Point normal, double offset) {
  RequireFinite(normal, "halfspace normal");
  if (!std::isfinite(offset)) {
    throw Error(ErrorCode::kNotFinite, "halfspace offset is not finite");
  }
  if (normal.size() == 0 || normal.norm() == 0.0) {
    throw Error(ErrorCode::kZeroNormal, "halfspace normal is zero");
  }
  return Halfspace{std::move(normal), offset};
}

Halfspace Halfspace::GreaterEqual(const Point& normal, double offset) {
  return LessEqual(-normal, -offset);
}

Box Box::Create(Point lo, Point hi) {
  RequireSameDimension(lo, hi, "box bounds");
  if (lo.size() == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "box has no coordinates");
  }
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (std::isnan(lo(i)) || std::isnan(hi(i)) || !(lo(i) <= hi(i)) ||
        lo(i) == std::numeric_limits<double>::infinity() ||
        hi(i) == -std::numeric_limits<double>::infinity()) {
      throw Error(ErrorCode::kInvalidBox,
                  fmt::format("coordinate {} has bounds [{}, {}]", i, lo(i),
                              hi(i)));
    }
  }
  return Box{std::move(lo), std::move(hi)};
}

Box Box::Uniform(int dim, double lo, double hi) {
  return Create(Point::Constant(dim, lo), Point::Constant(dim, hi));
}

Polyhedron Polyhedron::Create(std::vector<Halfspace> halfspaces,
                              std::optional<Box> box) {
  if (halfspaces.empty() && !box) {
    throw Error(ErrorCode::kInvalidBox, "polyhedron has no description");
  }
  const int dim = box ? box->dim() : halfspaces.front().dim();
  for (const Halfspace& h : halfspaces) {
    if (h.dim() != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  fmt::format("halfspace in R^{} inside polyhedron in R^{}",
                              h.dim(), dim));
    }
  }
  return Polyhedron{std::move(halfspaces), std::move(box)};
}

int Polyhedron::dim() const {
  return box ? box->dim() : halfspaces.front().dim();
}

int Dimension(const ConvexSet& set) {
  return std::visit(
      Overloaded{
          [](const WholeSpace& s) { return s.dimension; },
          [](const Halfspace& h) { return h.dim(); },
          [](const Box& b) { return b.dim(); },
          [](const Polyhedron& p) { return p.dim(); },
          [](const TwoHalfspaces& t) { return t.first.dim(); },
      },
      set);
}

bool Contains(const Halfspace& h, const Point& x, double tol) {
  RequireDim(x, h.dim(), "Contains");
  return Satisfies(h, x, tol);
}

bool Contains(const ConvexSet& set, const Point& x, double tol) {
  RequireDim(x, Dimension(set), "Contains");
  const auto in_box = [&x, tol](const Box& b) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x(i) < b.lo(i) - tol - 1e-12 * std::abs(b.lo(i))) return false;
      if (x(i) > b.hi(i) + tol + 1e-12 * std::abs(b.hi(i))) return false;
    }
    return true;
  };
  return std::visit(
      Overloaded{
          [](const WholeSpace&) { return true; },
          [&](const Halfspace& h) { return Satisfies(h, x, tol); },
          [&](const Box& b) { return in_box(b); },
          [&](const Polyhedron& p) {
            if (p.box && !in_box(*p.box)) return false;
            return std::all_of(
                p.halfspaces.begin(), p.halfspaces.end(),
                [&](const Halfspace& h) { return Satisfies(h, x, tol); });
          },
          [&](const TwoHalfspaces& t) {
            return Satisfies(t.first, x, tol) && Satisfies(t.second, x, tol);
          },
      },
      set);
}

LinearConstraints ToLinearConstraints(const ConvexSet& set) {
  const int dim = Dimension(set);
  std::vector<Point> rows;
  std::vector<double> offsets;
  const auto add_box = [&](const Box& b) {
    for (int i = 0; i < dim; ++i) {
      if (std::isfinite(b.hi(i))) {
        AppendRow(Point::Unit(dim, i), b.hi(i), rows, offsets);
      }
      if (std::isfinite(b.lo(i))) {
        AppendRow(-Point::Unit(dim, i), -b.lo(i), rows, offsets);
      }
    }
  };
  std::visit(Overloaded{
                 [](const WholeSpace&) {},
                 [&](const Halfspace& h) {
                   AppendRow(h.normal, h.offset, rows, offsets);
                 },
                 [&](const Box& b) { add_box(b); },
                 [&](const Polyhedron& p) {
                   for (const Halfspace& h : p.halfspaces) {
                     AppendRow(h.normal, h.offset, rows, offsets);
                   }
                   if (p.box) add_box(*p.box);
                 },
                 [&](const TwoHalfspaces& t) {
                   AppendRow(t.first.normal, t.first.offset, rows, offsets);
                   AppendRow(t.second.normal, t.second.offset, rows, offsets);
                 },
             },
             set);
  LinearConstraints out{DenseMatrix(static_cast<Eigen::Index>(rows.size()), dim),
                        Point(static_cast<Eigen::Index>(rows.size()))};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.a.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    out.b(static_cast<Eigen::Index>(i)) = offsets[i];
  }
  return out;
}

Point ProjectBox(const Point& x, const Box& box) {
  RequireDim(x, box.dim(), "ProjectBox");
  return x.cwiseMax(box.lo).cwiseMin(box.hi);
}

Point ProjectHalfspace(const Point& x, const Halfspace& h) {
  RequireDim(x, h.dim(), "ProjectHalfspace");
  const double norm2 = h.normal.squaredNorm();
  if (norm2 == 0.0) throw Error(ErrorCode::kZeroNormal, "halfspace normal is zero");
  const double excess = h.normal.dot(x) - h.offset;
  if (excess <= 0.0) return x;
  return x - (excess / norm2) * h.normal;
}

Point ProjectTwoHalfspaces(const Point& x, const Halfspace& h1,
                           const Halfspace& h2) {
  RequireDim(x, h1.dim(), "ProjectTwoHalfspaces");
  RequireDim(x, h2.dim(), "ProjectTwoHalfspaces");
  const bool in1 = Satisfies(h1, x, 0.0);
  const bool in2 = Satisfies(h2, x, 0.0);
  if (in1 && in2) return x;

  // One cut active: the projection onto a violated halfspace is the answer
  // as soon as it lands inside the other one.
  std::optional<Point> best;
  if (!in1) {
    Point z = ProjectHalfspace(x, h1);
    if (Satisfies(h2, z, CaseTol(h2, z))) best = std::move(z);
  }
  if (!in2) {
    Point z = ProjectHalfspace(x, h2);
    if (Satisfies(h1, z, CaseTol(h1, z)) &&
        (!best || (z - x).squaredNorm() < (*best - x).squaredNorm())) {
      best = std::move(z);
    }
  }
  if (best) return *best;

  // Both cuts active: solve the 2x2 Gram system for the multipliers.
  const double g11 = h1.normal.squaredNorm();
  const double g22 = h2.normal.squaredNorm();
  const double g12 = h1.normal.dot(h2.normal);
  const double det = g11 * g22 - g12 * g12;
  if (det <= 1e-14 * g11 * g22) return ProjectTwoViaQp(x, h1, h2);
  const double r1 = h1.normal.dot(x) - h1.offset;
  const double r2 = h2.normal.dot(x) - h2.offset;
  const double mu1 = (g22 * r1 - g12 * r2) / det;
  const double mu2 = (g11 * r2 - g12 * r1) / det;
  if (mu1 < -1e-12 || mu2 < -1e-12) return ProjectTwoViaQp(x, h1, h2);
  Point z = x - mu1 * h1.normal - mu2 * h2.normal;
  if (!Satisfies(h1, z, 1e3 * CaseTol(h1, z)) ||
      !Satisfies(h2, z, 1e3 * CaseTol(h2, z))) {
    return ProjectTwoViaQp(x, h1, h2);
  }
  return z;
}

Point ProjectTwoHalfspaces(const Point& x, const Cut& h1, const Cut& h2) {
  if (h1 && h2) return ProjectTwoHalfspaces(x, *h1, *h2);
  if (h1) return ProjectHalfspace(x, *h1);
  if (h2) return ProjectHalfspace(x, *h2);
  return x;
}

Point ProjectPolyhedron(const Point& x, const Polyhedron& p,
                        ActiveSetQpSolver& solver) {
  RequireDim(x, p.dim(), "ProjectPolyhedron");
  const LinearConstraints cons = ToLinearConstraints(p);
  const int n = static_cast<int>(x.size());
  return solver.Solve(DenseMatrix::Identity(n, n), -x, cons).y;
}

Point ProjectPolyhedron(const Point& x, const Polyhedron& p) {
  ActiveSetQpSolver solver(ActiveSetQpSolver::Options{.warm_start = false});
  return ProjectPolyhedron(x, p, solver);
}

Point Project(const ConvexSet& set, const Point& x) {
  RequireDim(x, Dimension(set), "Project");
  return std::visit(
      Overloaded{
          [&](const WholeSpace&) -> Point { return x; },
          [&](const Halfspace& h) { return ProjectHalfspace(x, h); },
          [&](const Box& b) { return ProjectBox(x, b); },
          [&](const Polyhedron& p) {
            if (p.halfspaces.empty()) return ProjectBox(x, *p.box);
            return ProjectPolyhedron(x, p);
          },
          [&](const TwoHalfspaces& t) {
            return ProjectTwoHalfspaces(x, t.first, t.second);
          },
      },
      set);
}

std::vector<Point> SampleFeasiblePoints(const ConvexSet& set, int count,
                                        std::mt19937_64& rng, double spread) {
  const int dim = Dimension(set);
  std::normal_distribution<double> gauss(0.0, spread);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    if (out.size() >= 2 && i % 2 == 1) {
      std::uniform_int_distribution<std::size_t> pick(0, out.size() - 1);
      const Point& a = out[pick(rng)];
      const Point& b = out[pick(rng)];
      const double t = unit(rng);
      out.push_back(t * a + (1.0 - t) * b);
      continue;
    }
    Point g(dim);
    for (int j = 0; j < dim; ++j) g(j) = gauss(rng);
    out.push_back(Project(set, g));
  }
  return out;
}

}  // namespace ephybrid
