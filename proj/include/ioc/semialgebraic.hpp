#pragma once

// Compact basic semialgebraic sets {z : g_i(z) >= 0, h_j(z) = 0}, the
// control-system description built from them, membership tests, rejection
// sampling, and evaluation grids for certificate verification.

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ioc/polynomial.hpp"
#include "ioc/random.hpp"

namespace ioc {

struct BasicSemialgebraicSet {
  std::vector<Polynomial> inequalities;  // g_i(z) >= 0
  std::vector<Polynomial> equalities;    // h_j(z) = 0
  std::vector<int> variables;            // ids, sorted
  // Finite radius R with the set contained in the ball of radius R;
  // compactness surrogate required by the Putinar certificate machinery.
  double bounding_radius = 1.0;

  bool contains(std::span<const double> point, double tol) const {
    for (int id : variables)
      if (static_cast<size_t>(id) >= point.size())
        throw std::invalid_argument("BasicSemialgebraicSet: point dimension");
    for (const auto& g : inequalities)
      if (g.evaluate(point) < -tol) return false;
    for (const auto& h : equalities)
      if (std::abs(h.evaluate(point)) > tol) return false;
    return true;
  }
};

/// Unit-scaled ball {r^2 - sum z_i^2 >= 0} over the given variables.
inline BasicSemialgebraicSet ball_set(const VariableSpacePtr& space,
                                      std::vector<int> variables, double r) {
  BasicSemialgebraicSet K;
  Polynomial g = Polynomial::constant(space, r * r);
  for (int id : variables) {
    Polynomial v = Polynomial::variable(space, id);
    g = g - v * v;
  }
  K.inequalities.push_back(g);
  K.variables = std::move(variables);
  K.bounding_radius = r;
  return K;
}

/// Annulus {R^2 >= sum z_i^2 >= r^2}.
inline BasicSemialgebraicSet annulus_set(const VariableSpacePtr& space,
                                         std::vector<int> variables, double r,
                                         double R) {
  BasicSemialgebraicSet K = ball_set(space, variables, R);
  Polynomial g = Polynomial::constant(space, -r * r);
  for (int id : K.variables) {
    Polynomial v = Polynomial::variable(space, id);
    g = g + v * v;
  }
  K.inequalities.push_back(g);
  return K;
}

/// Sphere {r^2 - sum z_i^2 = 0}.
inline BasicSemialgebraicSet sphere_set(const VariableSpacePtr& space,
                                        std::vector<int> variables, double r) {
  BasicSemialgebraicSet K;
  Polynomial h = Polynomial::constant(space, r * r);
  for (int id : variables) {
    Polynomial v = Polynomial::variable(space, id);
    h = h - v * v;
  }
  K.equalities.push_back(h);
  K.variables = std::move(variables);
  K.bounding_radius = r;
  return K;
}

/// Single point {z = p} via one linear equality per variable.
inline BasicSemialgebraicSet point_set(const VariableSpacePtr& space,
                                       std::vector<int> variables,
                                       const std::vector<double>& values) {
  BasicSemialgebraicSet K;
  double r = 0.0;
  for (size_t i = 0; i < variables.size(); ++i) {
    K.equalities.push_back(Polynomial::variable(space, variables[i]) -
                           Polynomial::constant(space, values[i]));
    r += values[i] * values[i];
  }
  K.variables = variables;
  K.bounding_radius = std::max(1.0, std::sqrt(r));
  return K;
}

struct Horizon {
  TimeMode mode = TimeMode::kFreeTime;
  double T = 1.0;  // meaningful in fixed-time mode only
};

/// Polynomial control system x' = f(x, u) with constraint sets and horizon.
struct ControlSystem {
  VariableSpacePtr space;
  std::vector<Polynomial> f;  // n components, polynomials in (x, u)
  BasicSemialgebraicSet X;    // state constraint set (over state vars)
  BasicSemialgebraicSet U;    // control constraint set (over control vars)
  BasicSemialgebraicSet XT;   // terminal set (over state vars)
  // True when the problem leaves the terminal state free (X_T = R^n); the
  // terminal-value conditions are then imposed on all of X instead.
  bool free_terminal_state = false;
  Horizon horizon;

  void validate() const {
    if (!space) throw std::invalid_argument("ControlSystem: missing space");
    if (static_cast<int>(f.size()) != space->n)
      throw std::invalid_argument("ControlSystem: dim(f) != n");
    if (horizon.mode == TimeMode::kFixedTime && horizon.T <= 0)
      throw std::invalid_argument("ControlSystem: T must be positive");
  }
};

/// Rejection sampling from the bounding box of radius bounding_radius.
/// Deterministic for a given seed; every returned point (id-indexed, with
/// slots outside K.variables zeroed) satisfies contains(K, z, 0).
inline std::vector<std::vector<double>> sample_uniform(
    const BasicSemialgebraicSet& K, int count, std::uint64_t seed,
    int point_size) {
  if (count < 0) throw std::invalid_argument("sample_uniform: count < 0");
  std::vector<std::vector<double>> out;
  if (count == 0) return out;

  if (!K.equalities.empty()) {
    // Only all-variables-pinned point sets are samplable; thin sets would
    // starve rejection sampling.
    std::vector<double> point(point_size, 0.0);
    size_t pinned = 0;
    for (const auto& h : K.equalities) {
      if (h.degree() != 1) continue;
      for (int id : K.variables) {
        Polynomial d = h.differentiate(id);
        if (d.degree() == 0 && !d.is_zero()) {
          double slope = d.coeff(Monomial{});
          double c0 = h.coeff(Monomial{});
          if (h.terms().size() <= 2) {
            point[id] = -c0 / slope;
            ++pinned;
          }
        }
      }
    }
    if (pinned == K.variables.size()) {
      out.assign(count, point);
      return out;
    }
    throw std::runtime_error(
        "sample_uniform: set has equality constraints and is not a pinned "
        "point; rejection sampling is not applicable");
  }

  std::mt19937_64 rng(seed);
  const double R = K.bounding_radius;
  std::int64_t proposals = 0;
  while (static_cast<int>(out.size()) < count) {
    std::vector<double> z(point_size, 0.0);
    for (int id : K.variables) z[id] = uniform_in(rng, -R, R);
    ++proposals;
    if (K.contains(z, 0.0)) out.push_back(std::move(z));
    if (proposals >= 1000000 &&
        static_cast<double>(out.size()) / proposals < 1e-4)
      throw std::runtime_error(
          "sample_uniform: acceptance rate below 1e-4; set too thin for "
          "rejection sampling");
  }
  return out;
}

/// Deterministic evaluation grid covering K. Inequality-described sets get
/// a filtered box lattice; pinned points and 2-variable circles (the shapes
/// terminal sets take here) are parametrized directly.
inline std::vector<std::vector<double>> grid_points(
    const BasicSemialgebraicSet& K, int per_axis, int point_size) {
  std::vector<std::vector<double>> out;
  if (K.equalities.empty()) {
    const double R = K.bounding_radius;
    std::vector<double> z(point_size, 0.0);
    auto rec = [&](auto&& self, size_t vi) -> void {
      if (vi == K.variables.size()) {
        if (K.contains(z, 1e-12)) out.push_back(z);
        return;
      }
      for (int k = 0; k < per_axis; ++k) {
        z[K.variables[vi]] =
            per_axis == 1 ? 0.0 : -R + 2.0 * R * k / (per_axis - 1);
        self(self, vi + 1);
      }
    };
    rec(rec, 0);
    return out;
  }
  // Pinned point set.
  try {
    return sample_uniform(K, 1, 0, point_size);
  } catch (const std::runtime_error&) {
  }
  // Circle: single equality c0 + c2*(za^2 + zb^2) with c0*c2 < 0.
  if (K.equalities.size() == 1 && K.variables.size() == 2) {
    const Polynomial& h = K.equalities[0];
    int a = K.variables[0], b = K.variables[1];
    double c0 = h.coeff(Monomial{});
    double ca = h.coeff(Monomial::variable(a, 2));
    double cb = h.coeff(Monomial::variable(b, 2));
    if (h.terms().size() <= 3 && ca == cb && ca != 0.0 && c0 * ca < 0) {
      double radius = std::sqrt(-c0 / ca);
      int npts = per_axis * per_axis;
      for (int k = 0; k < npts; ++k) {
        double th = 2.0 * M_PI * k / npts;
        std::vector<double> z(point_size, 0.0);
        z[a] = radius * std::cos(th);
        z[b] = radius * std::sin(th);
        out.push_back(std::move(z));
      }
      return out;
    }
  }
  throw std::runtime_error("grid_points: unsupported equality-described set");
}

}  // namespace ioc
