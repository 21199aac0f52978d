#pragma once

// Sparse multivariate polynomials over a named variable space
// (t, x1..xn, u1..um), with the calculus needed by HJB certificates:
// arithmetic, formal derivatives, evaluation, graded-lex monomial bases,
// and a parseable text format.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ioc {

inline std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Ordered variable layout shared by every polynomial of one problem
/// instance. Variable ids are fixed: t = 0, x_i = 1..n, u_j = n+1..n+m.
struct VariableSpace {
  bool has_time = false;
  int n = 0;  // number of state variables
  int m = 0;  // number of control variables

  static constexpr int kTimeId = 0;

  int state_id(int i) const { return 1 + i; }        // i in [0, n)
  int control_id(int j) const { return 1 + n + j; }  // j in [0, m)
  int id_count() const { return 1 + n + m; }

  bool is_state(int id) const { return id >= 1 && id <= n; }
  bool is_control(int id) const { return id > n && id <= n + m; }

  std::vector<int> state_ids() const {
    std::vector<int> v(n);
    for (int i = 0; i < n; ++i) v[i] = state_id(i);
    return v;
  }
  std::vector<int> control_ids() const {
    std::vector<int> v(m);
    for (int j = 0; j < m; ++j) v[j] = control_id(j);
    return v;
  }
  /// All usable ids: t (if present), states, controls.
  std::vector<int> all_ids() const {
    std::vector<int> v;
    if (has_time) v.push_back(kTimeId);
    for (int i = 0; i < n; ++i) v.push_back(state_id(i));
    for (int j = 0; j < m; ++j) v.push_back(control_id(j));
    return v;
  }

  std::string name(int id) const {
    if (id == kTimeId) return "t";
    if (is_state(id)) return "x" + std::to_string(id);
    if (is_control(id)) return "u" + std::to_string(id - n);
    throw std::invalid_argument("VariableSpace: unknown variable id " +
                                std::to_string(id));
  }

  std::optional<int> find(const std::string& name) const {
    if (name == "t") return has_time ? std::optional<int>(kTimeId)
                                     : std::nullopt;
    if (name.size() >= 2 && (name[0] == 'x' || name[0] == 'u')) {
      int k = 0;
      for (size_t i = 1; i < name.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) return {};
        k = 10 * k + (name[i] - '0');
      }
      if (name[0] == 'x' && k >= 1 && k <= n) return state_id(k - 1);
      if (name[0] == 'u' && k >= 1 && k <= m) return control_id(k - 1);
    }
    return {};
  }

  bool operator==(const VariableSpace& o) const {
    return has_time == o.has_time && n == o.n && m == o.m;
  }
};

using VariableSpacePtr = std::shared_ptr<const VariableSpace>;

inline VariableSpacePtr make_space(int n, int m, bool has_time) {
  auto s = std::make_shared<VariableSpace>();
  s->has_time = has_time;
  s->n = n;
  s->m = m;
  return s;
}

/// Power product with sparse exponents (no zero exponents stored).
/// Ordering is graded lexicographic over the variable-id order, so that
/// std::map iteration enumerates [1, x1, x2, x1^2, x1*x2, x2^2, ...].
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::vector<std::pair<int, int>> exps)
      : exps_(std::move(exps)) {
    normalize();
  }
  static Monomial variable(int id, int power = 1) {
    return Monomial({{id, power}});
  }

  const std::vector<std::pair<int, int>>& exponents() const { return exps_; }
  bool is_constant() const { return exps_.empty(); }

  int degree() const {
    int d = 0;
    for (const auto& [id, e] : exps_) d += e;
    return d;
  }
  int degree_in(int id) const {
    for (const auto& [vid, e] : exps_)
      if (vid == id) return e;
    return 0;
  }

  Monomial times(const Monomial& o) const {
    std::vector<std::pair<int, int>> r;
    r.reserve(exps_.size() + o.exps_.size());
    auto a = exps_.begin();
    auto b = o.exps_.begin();
    while (a != exps_.end() || b != o.exps_.end()) {
      if (b == o.exps_.end() || (a != exps_.end() && a->first < b->first)) {
        r.push_back(*a++);
      } else if (a == exps_.end() || b->first < a->first) {
        r.push_back(*b++);
      } else {
        r.emplace_back(a->first, a->second + b->second);
        ++a, ++b;
      }
    }
    Monomial out;
    out.exps_ = std::move(r);
    return out;
  }

  /// Formal derivative: returns (multiplier, reduced monomial);
  /// multiplier is 0 when the variable does not occur.
  std::pair<int, Monomial> derivative(int id) const {
    Monomial r = *this;
    for (auto& [vid, e] : r.exps_) {
      if (vid == id) {
        int mult = e;
        if (--e == 0) {
          r.exps_.erase(std::find_if(r.exps_.begin(), r.exps_.end(),
                                     [&](auto& p) { return p.first == id; }));
        }
        return {mult, r};
      }
    }
    return {0, Monomial{}};
  }

  double evaluate(std::span<const double> point) const {
    double v = 1.0;
    for (const auto& [id, e] : exps_) {
      if (static_cast<size_t>(id) >= point.size())
        throw std::invalid_argument("Monomial::evaluate: point misses " +
                                    std::to_string(id));
      double base = point[id];
      for (int k = 0; k < e; ++k) v *= base;
    }
    return v;
  }

  bool operator==(const Monomial& o) const { return exps_ == o.exps_; }

  // Graded lex: lower total degree first; within a degree, the monomial
  // with the higher exponent on the earliest variable comes first.
  bool operator<(const Monomial& o) const {
    int da = degree(), db = o.degree();
    if (da != db) return da < db;
    auto a = exps_.begin();
    auto b = o.exps_.begin();
    while (a != exps_.end() && b != o.exps_.end()) {
      if (a->first != b->first) return a->first < b->first;
      if (a->second != b->second) return a->second > b->second;
      ++a, ++b;
    }
    return false;  // equal
  }

 private:
  void normalize() {
    std::sort(exps_.begin(), exps_.end());
    std::vector<std::pair<int, int>> merged;
    for (const auto& [id, e] : exps_) {
      if (e < 0) throw std::invalid_argument("Monomial: negative exponent");
      if (e == 0) continue;
      if (!merged.empty() && merged.back().first == id)
        merged.back().second += e;
      else
        merged.emplace_back(id, e);
    }
    exps_ = std::move(merged);
  }

  std::vector<std::pair<int, int>> exps_;
};

/// Immutable sparse polynomial with real coefficients. All operations
/// return fresh values; coefficients below kDropTol are not stored.
class Polynomial {
 public:
  static constexpr double kDropTol = 1e-14;

  Polynomial() = default;
  explicit Polynomial(VariableSpacePtr space) : space_(std::move(space)) {}

  static Polynomial zero(VariableSpacePtr space) {
    return Polynomial(std::move(space));
  }
  static Polynomial constant(VariableSpacePtr space, double c) {
    Polynomial p(std::move(space));
    if (std::abs(c) >= kDropTol) p.terms_[Monomial{}] = c;
    return p;
  }
  static Polynomial variable(VariableSpacePtr space, int id, int power = 1) {
    Polynomial p(space);
    p.check_var(id);
    p.terms_[Monomial::variable(id, power)] = 1.0;
    return p;
  }
  static Polynomial from_terms(VariableSpacePtr space,
                               std::map<Monomial, double> terms) {
    Polynomial p(std::move(space));
    for (auto& [mono, c] : terms)
      if (std::abs(c) >= kDropTol) p.terms_.emplace(mono, c);
    return p;
  }

  const VariableSpacePtr& space() const { return space_; }
  const std::map<Monomial, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  /// Max total degree of stored terms; degree(0) is defined as 0.
  int degree() const {
    int d = 0;
    for (const auto& [mono, c] : terms_) d = std::max(d, mono.degree());
    return d;
  }
  int degree_in(int id) const {
    int d = 0;
    for (const auto& [mono, c] : terms_) d = std::max(d, mono.degree_in(id));
    return d;
  }
  bool depends_on(int id) const { return degree_in(id) > 0; }

  double coeff(const Monomial& mono) const {
    auto it = terms_.find(mono);
    return it == terms_.end() ? 0.0 : it->second;
  }

  Polynomial operator+(const Polynomial& o) const {
    check_same_space(o);
    Polynomial r(space_ ? space_ : o.space_);
    r.terms_ = terms_;
    for (const auto& [mono, c] : o.terms_) r.terms_[mono] += c;
    r.prune();
    return r;
  }
  Polynomial operator-() const {
    Polynomial r(space_);
    r.terms_ = terms_;
    for (auto& [mono, c] : r.terms_) c = -c;
    return r;
  }
  Polynomial operator-(const Polynomial& o) const { return *this + (-o); }

  Polynomial operator*(const Polynomial& o) const {
    check_same_space(o);
    Polynomial r(space_ ? space_ : o.space_);
    for (const auto& [ma, ca] : terms_)
      for (const auto& [mb, cb] : o.terms_) r.terms_[ma.times(mb)] += ca * cb;
    r.prune();
    return r;
  }
  Polynomial operator*(double s) const {
    Polynomial r(space_);
    for (const auto& [mono, c] : terms_) r.terms_[mono] = c * s;
    r.prune();
    return r;
  }
  friend Polynomial operator*(double s, const Polynomial& p) { return p * s; }

  Polynomial differentiate(int id) const {
    check_var(id);
    Polynomial r(space_);
    for (const auto& [mono, c] : terms_) {
      auto [mult, reduced] = mono.derivative(id);
      if (mult != 0) r.terms_[reduced] += mult * c;
    }
    r.prune();
    return r;
  }

  /// Sum of monomial evaluations in canonical term order. `point` is
  /// indexed by variable id and must cover every variable occurring here.
  double evaluate(std::span<const double> point) const {
    double v = 0.0;
    for (const auto& [mono, c] : terms_) v += c * mono.evaluate(point);
    return v;
  }

  /// Substitute a constant for one variable (used for the t = T boundary).
  Polynomial substitute(int id, double value) const {
    check_var(id);
    Polynomial r(space_);
    for (const auto& [mono, c] : terms_) {
      int e = mono.degree_in(id);
      double scale = c;
      for (int k = 0; k < e; ++k) scale *= value;
      std::vector<std::pair<int, int>> exps;
      for (const auto& [vid, ve] : mono.exponents())
        if (vid != id) exps.emplace_back(vid, ve);
      r.terms_[Monomial(std::move(exps))] += scale;
    }
    r.prune();
    return r;
  }

  bool operator==(const Polynomial& o) const { return terms_ == o.terms_; }

  friend std::ostream& operator<<(std::ostream& os, const Polynomial& p);

  /// Largest absolute coefficient (0 for the zero polynomial).
  double max_abs_coeff() const {
    double v = 0.0;
    for (const auto& [mono, c] : terms_) v = std::max(v, std::abs(c));
    return v;
  }

 private:
  void check_same_space(const Polynomial& o) const {
    if (space_ && o.space_ && !(*space_ == *o.space_))
      throw std::invalid_argument("Polynomial: mismatched variable spaces");
  }
  void check_var(int id) const {
    if (space_) {
      bool ok = (id == VariableSpace::kTimeId && space_->has_time) ||
                space_->is_state(id) || space_->is_control(id);
      if (!ok)
        throw std::invalid_argument("Polynomial: variable id " +
                                    std::to_string(id) +
                                    " not in the variable space");
    }
  }
  void prune() {
    for (auto it = terms_.begin(); it != terms_.end();) {
      if (std::abs(it->second) < kDropTol)
        it = terms_.erase(it);
      else
        ++it;
    }
  }

  std::map<Monomial, double> terms_;
  VariableSpacePtr space_;
};

/// All monomials of total degree <= `degree` in `variables`, in graded-lex
/// order. Length is binomial(p + degree, degree) for p variables.
struct MonomialBasis {
  std::vector<int> variables;
  int degree = 0;
  std::vector<Monomial> elements;

  int size() const { return static_cast<int>(elements.size()); }
};

inline MonomialBasis monomial_basis(std::vector<int> variables, int degree) {
  if (degree < 0) throw std::invalid_argument("monomial_basis: degree < 0");
  std::sort(variables.begin(), variables.end());
  MonomialBasis basis;
  basis.variables = variables;
  basis.degree = degree;
  // Enumerate exponent vectors by total degree, then recursively with the
  // leading variable taking the largest share first (graded lex).
  std::vector<std::pair<int, int>> current;
  auto rec = [&](auto&& self, size_t vi, int remaining) -> void {
    if (vi + 1 == variables.size()) {
      if (remaining > 0) current.emplace_back(variables[vi], remaining);
      basis.elements.emplace_back(
          Monomial(std::vector<std::pair<int, int>>(current)));
      if (remaining > 0) current.pop_back();
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      if (e > 0) current.emplace_back(variables[vi], e);
      self(self, vi + 1, remaining - e);
      if (e > 0) current.pop_back();
    }
  };
  for (int d = 0; d <= degree; ++d) {
    if (variables.empty()) {
      if (d == 0) basis.elements.emplace_back();
      continue;
    }
    rec(rec, 0, d);
  }
  return basis;
}

enum class TimeMode { kFixedTime, kFreeTime };

/// H_f(L, phi) = L + dphi/dt + grad_x(phi)' f. In free-time mode phi must
/// not depend on t and the time derivative vanishes identically.
inline Polynomial hjb_operator(const Polynomial& L, const Polynomial& phi,
                               const std::vector<Polynomial>& f,
                               TimeMode mode) {
  const VariableSpacePtr& space = L.space() ? L.space() : phi.space();
  if (!space) throw std::invalid_argument("hjb_operator: no variable space");
  if (static_cast<int>(f.size()) != space->n)
    throw std::invalid_argument("hjb_operator: dim(f) != n");
  if (mode == TimeMode::kFreeTime && phi.depends_on(VariableSpace::kTimeId))
    throw std::invalid_argument(
        "hjb_operator: phi depends on t in free-time mode");
  Polynomial h = L;
  if (mode == TimeMode::kFixedTime)
    h = h + phi.differentiate(VariableSpace::kTimeId);
  for (int i = 0; i < space->n; ++i)
    h = h + phi.differentiate(space->state_id(i)) * f[i];
  return h;
}

// ---------------------------------------------------------------------------
// Text format: human-readable and round-trippable, e.g. "2*x1^2 + 0.5*x1*x2".

inline std::string format_coeff(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string to_string(const Polynomial& p) {
  if (p.is_zero()) return "0";
  const VariableSpace fallback{true, 64, 64};
  const VariableSpace& sp = p.space() ? *p.space() : fallback;
  // Highest-degree terms first, keeping graded-lex order within a degree.
  std::vector<std::pair<Monomial, double>> terms(p.terms().begin(),
                                                 p.terms().end());
  std::stable_sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
    return a.first.degree() > b.first.degree();
  });
  std::string out;
  bool first = true;
  for (const auto& [mono, c] : terms) {
    double mag = std::abs(c);
    bool neg = c < 0;
    if (first) {
      if (neg) out += "-";
      first = false;
    } else {
      out += neg ? " - " : " + ";
    }
    std::string vars;
    for (const auto& [id, e] : mono.exponents()) {
      if (!vars.empty()) vars += "*";
      vars += sp.name(id);
      if (e > 1) vars += "^" + std::to_string(e);
    }
    if (vars.empty()) {
      out += format_coeff(mag);
    } else if (mag == 1.0) {
      out += vars;
    } else {
      out += format_coeff(mag) + "*" + vars;
    }
  }
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const Polynomial& p) {
  return os << to_string(p);
}

/// Parses the format produced by to_string. Unknown variable names and
/// malformed input raise std::invalid_argument.
inline Polynomial parse_polynomial(const std::string& text,
                                   const VariableSpacePtr& space) {
  std::map<Monomial, double> terms;
  size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
  };
  skip_ws();
  if (i == text.size())
    throw std::invalid_argument("parse_polynomial: empty input");
  while (i < text.size()) {
    double sign = 1.0;
    skip_ws();
    while (i < text.size() && (text[i] == '+' || text[i] == '-')) {
      if (text[i] == '-') sign = -sign;
      ++i;
      skip_ws();
    }
    if (i == text.size())
      throw std::invalid_argument("parse_polynomial: dangling sign");
    double coeff = 1.0;
    std::vector<std::pair<int, int>> exps;
    bool expect_factor = true;
    while (expect_factor) {
      skip_ws();
      if (i < text.size() &&
          (std::isdigit(static_cast<unsigned char>(text[i])) ||
           text[i] == '.')) {
        size_t pos = 0;
        coeff *= std::stod(text.substr(i), &pos);
        i += pos;
      } else if (i < text.size() &&
                 std::isalpha(static_cast<unsigned char>(text[i]))) {
        size_t j = i + 1;
        while (j < text.size() &&
               std::isalnum(static_cast<unsigned char>(text[j])))
          ++j;
        std::string name = text.substr(i, j - i);
        i = j;
        auto id = space->find(name);
        if (!id)
          throw std::invalid_argument("parse_polynomial: unknown variable '" +
                                      name + "'");
        int power = 1;
        skip_ws();
        if (i < text.size() && text[i] == '^') {
          ++i;
          skip_ws();
          size_t pos = 0;
          power = std::stoi(text.substr(i), &pos);
          i += pos;
          if (power < 0)
            throw std::invalid_argument("parse_polynomial: negative power");
        }
        exps.emplace_back(*id, power);
      } else {
        throw std::invalid_argument("parse_polynomial: expected factor at '" +
                                    text.substr(i) + "'");
      }
      skip_ws();
      if (i < text.size() && text[i] == '*') {
        ++i;
      } else {
        expect_factor = false;
      }
    }
    terms[Monomial(std::move(exps))] += sign * coeff;
  }
  return Polynomial::from_terms(space, std::move(terms));
}

}  // namespace ioc
