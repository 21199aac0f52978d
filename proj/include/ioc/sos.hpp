#pragma once

// Compiles positivity constraints "q(z) >= 0 on K" -- with q affine in
// unknown decision coefficients -- into PSD Gram blocks plus per-monomial
// linear equality constraints, via Putinar certificates with a degree
// bound: q = sigma_0 + sum_i sigma_i g_i + sum_j lambda_j h_j, where the
// sigma_i are SOS (Gram) multipliers with deg(sigma_i g_i) <= 2p and the
// lambda_j are sign-free polynomial multipliers for equalities.

#include <Eigen/Dense>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "ioc/polynomial.hpp"
#include "ioc/sdp.hpp"
#include "ioc/semialgebraic.hpp"

namespace ioc::sos {

/// Reference to one entry of a symmetric Gram block, i <= j.
struct GramRef {
  int block;
  int i, j;
  auto operator<=>(const GramRef&) const = default;
};

/// Affine expression in the decision variables: a constant plus weighted
/// free scalars plus weighted Gram entries. A Gram weight w on (i, j)
/// follows the symmetric-pair convention: it contributes w*Q_ii on the
/// diagonal and 2*w*Q_ij off the diagonal.
struct LinExpr {
  double constant = 0.0;
  std::map<int, double> scalars;
  std::map<GramRef, double> grams;

  void add_scaled(const LinExpr& o, double w) {
    constant += w * o.constant;
    for (const auto& [id, v] : o.scalars) scalars[id] += w * v;
    for (const auto& [ref, v] : o.grams) grams[ref] += w * v;
  }
  LinExpr& operator+=(const LinExpr& o) {
    add_scaled(o, 1.0);
    return *this;
  }
  LinExpr operator-(const LinExpr& o) const {
    LinExpr r = *this;
    r.add_scaled(o, -1.0);
    return r;
  }
  bool is_constant() const { return scalars.empty() && grams.empty(); }

  double value(std::span<const Eigen::MatrixXd> blocks,
               std::span<const double> scalar_values) const {
    double v = constant;
    for (const auto& [id, w] : scalars) v += w * scalar_values[id];
    for (const auto& [ref, w] : grams) {
      const Eigen::MatrixXd& Q = blocks[ref.block];
      v += (ref.i == ref.j) ? w * Q(ref.i, ref.i) : 2.0 * w * Q(ref.i, ref.j);
    }
    return v;
  }
};

/// Polynomial whose coefficients are affine in decision variables.
class AffinePoly {
 public:
  AffinePoly() = default;
  explicit AffinePoly(const Polynomial& p) {
    for (const auto& [mono, c] : p.terms()) terms_[mono].constant = c;
  }

  const std::map<Monomial, LinExpr>& terms() const { return terms_; }

  void add_term(const Monomial& mono, const LinExpr& e) { terms_[mono] += e; }

  AffinePoly& operator+=(const AffinePoly& o) {
    for (const auto& [mono, e] : o.terms_) terms_[mono] += e;
    return *this;
  }
  AffinePoly operator+(const AffinePoly& o) const {
    AffinePoly r = *this;
    r += o;
    return r;
  }

  /// Product with a known polynomial.
  AffinePoly times(const Polynomial& p) const {
    AffinePoly r;
    for (const auto& [mono, e] : terms_)
      for (const auto& [pm, pc] : p.terms())
        r.terms_[mono.times(pm)].add_scaled(e, pc);
    return r;
  }

  AffinePoly scaled(double w) const {
    AffinePoly r;
    for (const auto& [mono, e] : terms_) r.terms_[mono].add_scaled(e, w);
    return r;
  }

  AffinePoly differentiate(int id) const {
    AffinePoly r;
    for (const auto& [mono, e] : terms_) {
      auto [mult, reduced] = mono.derivative(id);
      if (mult != 0) r.terms_[reduced].add_scaled(e, mult);
    }
    return r;
  }

  AffinePoly substitute(int id, double value) const {
    AffinePoly r;
    for (const auto& [mono, e] : terms_) {
      int pow = mono.degree_in(id);
      double scale = 1.0;
      for (int k = 0; k < pow; ++k) scale *= value;
      std::vector<std::pair<int, int>> exps;
      for (const auto& [vid, ve] : mono.exponents())
        if (vid != id) exps.emplace_back(vid, ve);
      r.terms_[Monomial(std::move(exps))].add_scaled(e, scale);
    }
    return r;
  }

  LinExpr evaluate(std::span<const double> point) const {
    LinExpr out;
    for (const auto& [mono, e] : terms_) out.add_scaled(e, mono.evaluate(point));
    return out;
  }

  int degree() const {
    int d = 0;
    for (const auto& [mono, e] : terms_) d = std::max(d, mono.degree());
    return d;
  }

  /// Fixes all decision variables, yielding a concrete polynomial.
  Polynomial to_polynomial(const VariableSpacePtr& space,
                           std::span<const Eigen::MatrixXd> blocks,
                           std::span<const double> scalars) const {
    std::map<Monomial, double> out;
    for (const auto& [mono, e] : terms_) out[mono] = e.value(blocks, scalars);
    return Polynomial::from_terms(space, std::move(out));
  }

 private:
  std::map<Monomial, LinExpr> terms_;
};

/// A symmetric PSD decision block paired with the monomial basis it spans:
/// the polynomial it represents is m(z)' Q m(z).
struct GramVariable {
  int block = -1;
  MonomialBasis basis;
};

/// Expands m(z)' Q m(z) for explicit matrix values; exact double sum.
inline Polynomial reconstruct(const GramVariable& g, const Eigen::MatrixXd& Q,
                              const VariableSpacePtr& space) {
  const int k = g.basis.size();
  if (Q.rows() != k || Q.cols() != k)
    throw std::invalid_argument("reconstruct: Gram size mismatch");
  if (!Q.isApprox(Q.transpose(), 1e-12))
    throw std::invalid_argument("reconstruct: Gram matrix not symmetric");
  std::map<Monomial, double> terms;
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      terms[g.basis.elements[a].times(g.basis.elements[b])] += Q(a, b);
  return Polynomial::from_terms(space, std::move(terms));
}

/// Positivity target on a basic semialgebraic set, certified at half
/// degree p (so every multiplier product has degree at most 2p).
struct PutinarCertificate {
  AffinePoly target;
  BasicSemialgebraicSet set;
  int half_degree = 1;
  std::vector<int> variables;  // certificate variables (>= set variables)
  std::string label;
};

/// What compile_positivity added to the program.
struct PutinarCompilation {
  GramVariable sigma0;
  std::vector<GramVariable> multipliers;       // one per inequality
  std::vector<std::vector<int>> eq_multipliers;  // scalar ids per equality
  int first_row = 0;
  int num_rows = 0;
};

/// Incrementally builds an SdpProblem out of Gram blocks, free scalars,
/// and linear constraints on affine expressions.
class SosProgram {
 public:
  int add_psd_block(int size) {
    prob_.block_sizes.push_back(size);
    return static_cast<int>(prob_.block_sizes.size()) - 1;
  }
  int add_free_scalar() { return prob_.num_scalars++; }

  /// Fresh PSD block of size binomial(p + d, d) over all monomials of
  /// degree <= d in the given variables.
  GramVariable gram_parametrize(const std::vector<int>& vars, int d) {
    return gram_from_basis(monomial_basis(vars, d));
  }

  /// Fresh PSD block over an explicit (possibly trimmed) basis.
  GramVariable gram_from_basis(MonomialBasis basis) {
    GramVariable g;
    g.basis = std::move(basis);
    if (g.basis.size() > 0) g.block = add_psd_block(g.basis.size());
    return g;
  }

  /// The polynomial m(z)' Q m(z) as an affine template over Q's entries.
  AffinePoly gram_poly(const GramVariable& g) const {
    AffinePoly out;
    const int k = g.basis.size();
    for (int a = 0; a < k; ++a)
      for (int b = a; b < k; ++b) {
        LinExpr e;
        e.grams[{g.block, a, b}] = 1.0;
        out.add_term(g.basis.elements[a].times(g.basis.elements[b]), e);
      }
    return out;
  }

  /// Polynomial with one fresh free scalar per basis monomial.
  AffinePoly free_poly(const std::vector<int>& vars, int degree,
                       std::vector<std::pair<Monomial, int>>* coeff_ids) {
    AffinePoly out;
    for (const Monomial& mono : monomial_basis(vars, degree).elements) {
      int id = add_free_scalar();
      LinExpr e;
      e.scalars[id] = 1.0;
      out.add_term(mono, e);
      if (coeff_ids) coeff_ids->emplace_back(mono, id);
    }
    return out;
  }

  /// expr == rhs as a linear row.
  void add_eq(const LinExpr& expr, double rhs, std::string name) {
    add_row(expr, rhs, sdp::RowKind::kEq, std::move(name));
  }
  /// expr <= rhs as a linear row.
  void add_le(const LinExpr& expr, double rhs, std::string name) {
    add_row(expr, rhs, sdp::RowKind::kLe, std::move(name));
  }

  void minimize(const LinExpr& objective) {
    prob_.obj_mat.clear();
    prob_.obj_sca.clear();
    for (const auto& [id, w] : objective.scalars)
      prob_.obj_sca.push_back({id, w});
    for (const auto& [ref, w] : objective.grams) {
      // <A, Q> convention: off-diagonal weight w means matrix entry w.
      prob_.obj_mat.push_back({ref.block, ref.i, ref.j, w});
    }
  }

  /// Emits sigma blocks with degree-truncated bases plus one coefficient
  /// matching row per monomial of degree <= 2p, in graded-lex order.
  PutinarCompilation compile_positivity(const PutinarCertificate& c) {
    const int p = c.half_degree;
    for (const auto& [mono, e] : c.target.terms())
      if (mono.degree() > 2 * p) {
        std::ostringstream os;
        os << "certificate degree too low: target term of degree "
           << mono.degree() << " exceeds 2p = " << 2 * p << " (" << c.label
           << ")";
        throw std::invalid_argument(os.str());
      }

    PutinarCompilation out;
    out.sigma0 = gram_parametrize(c.variables, p);
    AffinePoly acc = gram_poly(out.sigma0);
    for (const auto& g : c.set.inequalities) {
      int dg = g.degree();
      if (dg > 2 * p)
        throw std::invalid_argument(
            "certificate degree too low for set inequality (" + c.label + ")");
      GramVariable sig = gram_parametrize(c.variables, (2 * p - dg) / 2);
      acc += gram_poly(sig).times(g);
      out.multipliers.push_back(sig);
    }
    for (const auto& h : c.set.equalities) {
      int dh = h.degree();
      if (dh > 2 * p)
        throw std::invalid_argument(
            "certificate degree too low for set equality (" + c.label + ")");
      std::vector<std::pair<Monomial, int>> ids;
      AffinePoly lambda = free_poly(c.variables, 2 * p - dh, &ids);
      acc += lambda.times(h);
      std::vector<int> scalar_ids;
      for (auto& [mono, id] : ids) scalar_ids.push_back(id);
      out.eq_multipliers.push_back(std::move(scalar_ids));
    }

    out.first_row = static_cast<int>(prob_.rows.size());
    const VariableSpace render{true, 64, 64};
    for (const Monomial& mono : monomial_basis(c.variables, 2 * p).elements) {
      LinExpr lhs;
      auto it = acc.terms().find(mono);
      if (it != acc.terms().end()) lhs = it->second;
      auto jt = c.target.terms().find(mono);
      if (jt != c.target.terms().end()) lhs.add_scaled(jt->second, -1.0);
      std::string name = c.label + ":";
      for (const auto& [id, e] : mono.exponents()) {
        name += render.name(id);
        if (e > 1) name += "^" + std::to_string(e);
      }
      if (mono.is_constant()) name += "1";
      // acc - target has constant -target_const; move it to the rhs.
      double rhs = -lhs.constant;
      lhs.constant = 0.0;
      add_eq(lhs, rhs, std::move(name));
    }
    out.num_rows = static_cast<int>(prob_.rows.size()) - out.first_row;
    return out;
  }

  const sdp::SdpProblem& problem() const { return prob_; }

  /// Plain-text structure dump: block sizes, then every matching row.
  std::string dump() const {
    std::ostringstream os;
    os << "blocks:";
    for (int s : prob_.block_sizes) os << " " << s;
    os << "\nfree scalars: " << prob_.num_scalars
       << "\nrows: " << prob_.rows.size() << "\n";
    for (const auto& row : prob_.rows) {
      os << "  " << (row.name.empty() ? "(row)" : row.name) << ": "
         << row.mat.size() << " block entries, " << row.sca.size()
         << " scalar entries, rhs " << row.rhs
         << (row.kind == sdp::RowKind::kEq ? "" : " (<=)") << "\n";
    }
    return os.str();
  }

 private:
  friend class AffinePolyAccess;

  void add_row(const LinExpr& expr, double rhs, sdp::RowKind kind,
               std::string name) {
    sdp::LinearRow row;
    row.kind = kind;
    row.rhs = rhs - expr.constant;
    row.name = std::move(name);
    for (const auto& [id, w] : expr.scalars)
      if (w != 0.0) row.sca.push_back({id, w});
    for (const auto& [ref, w] : expr.grams)
      if (w != 0.0) row.mat.push_back({ref.block, ref.i, ref.j, w});
    prob_.rows.push_back(std::move(row));
  }

  sdp::SdpProblem prob_;
};

}  // namespace ioc::sos
