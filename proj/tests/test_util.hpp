#pragma once

#include <random>
#include <vector>

#include "ioc/polynomial.hpp"

namespace ioc::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  // Fixed mapping from raw bits so streams are identical across platforms.
  double u = (rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

inline Polynomial random_polynomial(std::mt19937_64& rng,
                                    const VariableSpacePtr& space, int degree,
                                    int num_terms) {
  MonomialBasis basis = monomial_basis(space->all_ids(), degree);
  std::map<Monomial, double> terms;
  for (int k = 0; k < num_terms; ++k) {
    size_t idx = rng() % basis.elements.size();
    terms[basis.elements[idx]] += uniform(rng, -1.0, 1.0);
  }
  return Polynomial::from_terms(space, std::move(terms));
}

/// Coefficients of the form k/256 with small k: sums, integer multiples,
/// and power-of-two scalings of such polynomials are all exact in doubles.
inline Polynomial random_dyadic_polynomial(std::mt19937_64& rng,
                                           const VariableSpacePtr& space,
                                           int degree, int num_terms) {
  MonomialBasis basis = monomial_basis(space->all_ids(), degree);
  std::map<Monomial, double> terms;
  for (int k = 0; k < num_terms; ++k) {
    size_t idx = rng() % basis.elements.size();
    int num = static_cast<int>(rng() % 513) - 256;
    terms[basis.elements[idx]] += num / 256.0;
  }
  return Polynomial::from_terms(space, std::move(terms));
}

inline std::vector<double> random_point(std::mt19937_64& rng, int size,
                                        double lo = -1.0, double hi = 1.0) {
  std::vector<double> p(size);
  for (auto& v : p) v = uniform(rng, lo, hi);
  return p;
}

}  // namespace ioc::testing
