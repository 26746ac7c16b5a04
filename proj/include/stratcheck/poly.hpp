#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "stratcheck/format.hpp"

namespace stratcheck::poly {

using Point = Eigen::VectorXd;

inline bool finite(const Point& x) { return x.allFinite(); }

struct ParseError : std::runtime_error {
  std::size_t position;
  ParseError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"), position(pos) {}
};

struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GermError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct JetMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Exponents = std::vector<int>;

inline int total_degree(const Exponents& e) { return std::accumulate(e.begin(), e.end(), 0); }

struct Monomial {
  Exponents exponents;
  double coefficient = 0.0;

  int degree() const { return total_degree(exponents); }
};

// Canonical term order: by total degree, then x1-dominant first within a degree.
struct GradedLexLess {
  bool operator()(const Exponents& a, const Exponents& b) const {
    const int da = total_degree(a);
    const int db = total_degree(b);
    if (da != db) return da < db;
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
  }
};

class Polynomial {
 public:
  using TermMap = std::map<Exponents, double, GradedLexLess>;

  explicit Polynomial(int nvars = 0) : nvars_(nvars) {
    if (nvars < 0) throw DimensionError("polynomial needs a non-negative variable count");
  }

  static Polynomial constant(int nvars, double c) {
    Polynomial p(nvars);
    p.add_term(Exponents(static_cast<std::size_t>(nvars), 0), c);
    return p;
  }

  /// x_{index} (0-based).
  static Polynomial variable(int nvars, int index) {
    if (index < 0 || index >= nvars) throw DimensionError("variable index out of range");
    Polynomial p(nvars);
    Exponents e(static_cast<std::size_t>(nvars), 0);
    e[static_cast<std::size_t>(index)] = 1;
    p.add_term(e, 1.0);
    return p;
  }

  int nvars() const { return nvars_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  /// Max total degree; -1 for the zero polynomial.
  int degree() const { return terms_.empty() ? -1 : total_degree(terms_.rbegin()->first); }

  /// Accumulate a term; exact-zero results are erased (canonical form).
  void add_term(const Exponents& e, double c) {
    if (static_cast<int>(e.size()) != nvars_) throw DimensionError("exponent vector length must equal nvars");
    for (int k : e)
      if (k < 0) throw DimensionError("negative exponent");
    if (c == 0.0) return;
    auto [it, inserted] = terms_.emplace(e, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  double eval(const Point& x) const {
    if (x.size() != nvars_) throw DimensionError("point dimension does not match variable count");
    double s = 0.0;
    for (const auto& [e, c] : terms_) {
      double v = c;
      for (int i = 0; i < nvars_; ++i) {
        const double xi = x[i];
        for (int k = 0; k < e[static_cast<std::size_t>(i)]; ++k) v *= xi;
      }
      s += v;
    }
    return s;
  }

  Polynomial derivative(int var) const {
    if (var < 0 || var >= nvars_) throw DimensionError("derivative variable out of range");
    Polynomial d(nvars_);
    for (const auto& [e, c] : terms_) {
      const int k = e[static_cast<std::size_t>(var)];
      if (k == 0) continue;
      Exponents ed = e;
      ed[static_cast<std::size_t>(var)] = k - 1;
      d.add_term(ed, c * k);
    }
    return d;
  }

  std::vector<Polynomial> gradient() const {
    std::vector<Polynomial> g;
    g.reserve(static_cast<std::size_t>(nvars_));
    for (int i = 0; i < nvars_; ++i) g.push_back(derivative(i));
    return g;
  }

  /// Terms of total degree <= r.
  Polynomial truncate_degree(int r) const {
    Polynomial p(nvars_);
    for (const auto& [e, c] : terms_)
      if (total_degree(e) <= r) p.terms_.emplace(e, c);
    return p;
  }

  /// Terms of total degree > r (complement of truncate_degree).
  Polynomial tail_above_degree(int r) const {
    Polynomial p(nvars_);
    for (const auto& [e, c] : terms_)
      if (total_degree(e) > r) p.terms_.emplace(e, c);
    return p;
  }

  /// Same polynomial viewed in a larger variable set (new variables unused).
  Polynomial extend_vars(int new_nvars) const {
    if (new_nvars < nvars_) throw DimensionError("extend_vars cannot shrink the variable count");
    Polynomial p(new_nvars);
    for (const auto& [e, c] : terms_) {
      Exponents ex = e;
      ex.resize(static_cast<std::size_t>(new_nvars), 0);
      p.terms_.emplace(std::move(ex), c);
    }
    return p;
  }

  Polynomial operator+(const Polynomial& o) const {
    require_same_vars(o);
    Polynomial p = *this;
    for (const auto& [e, c] : o.terms_) p.add_term(e, c);
    return p;
  }

  Polynomial operator-(const Polynomial& o) const {
    require_same_vars(o);
    Polynomial p = *this;
    for (const auto& [e, c] : o.terms_) p.add_term(e, -c);
    return p;
  }

  Polynomial operator*(const Polynomial& o) const {
    require_same_vars(o);
    Polynomial p(nvars_);
    for (const auto& [ea, ca] : terms_)
      for (const auto& [eb, cb] : o.terms_) {
        Exponents e = ea;
        for (std::size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
        p.add_term(e, ca * cb);
      }
    return p;
  }

  Polynomial operator*(double c) const {
    Polynomial p(nvars_);
    if (c == 0.0) return p;
    for (const auto& [e, k] : terms_) p.terms_.emplace(e, k * c);
    return p;
  }

  bool operator==(const Polynomial& o) const { return nvars_ == o.nvars_ && terms_ == o.terms_; }

  /// Canonical text form; parse(to_string()) reproduces the polynomial exactly.
  /// t_index >= 0 names that variable "t" instead of "x<i>".
  std::string to_string(int t_index = -1) const {
    if (terms_.empty()) return "0";
    std::string out;
    for (const auto& [e, c] : terms_) {
      const bool neg = c < 0.0;
      if (out.empty()) {
        if (neg) out += "-";
      } else {
        out += neg ? " - " : " + ";
      }
      const double a = neg ? -c : c;
      std::string factors;
      for (int i = 0; i < nvars_; ++i) {
        const int k = e[static_cast<std::size_t>(i)];
        if (k == 0) continue;
        if (!factors.empty()) factors += "*";
        factors += (i == t_index) ? "t" : "x" + std::to_string(i + 1);
        if (k >= 2) factors += "^" + std::to_string(k);
      }
      if (factors.empty()) {
        out += format_double(a);
      } else {
        if (a != 1.0) {
          out += format_double(a);
          out += "*";
        }
        out += factors;
      }
    }
    return out;
  }

 private:
  void require_same_vars(const Polynomial& o) const {
    if (nvars_ != o.nvars_) throw DimensionError("polynomials have different variable counts");
  }

  int nvars_;
  TermMap terms_;
};

inline Polynomial operator*(double c, const Polynomial& p) { return p * c; }

namespace detail {

// Recursive-descent parser for sums of monomials over x1..x<n> (plus `t` when
// t_index >= 0), operators + - * ^, integer/decimal/scientific coefficients.
class Parser {
 public:
  Parser(std::string_view text, int nvars, int t_index) : text_(text), nvars_(nvars), t_index_(t_index) {}

  Polynomial run() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("empty polynomial", pos_);
    Polynomial p(nvars_);
    double sign = 1.0;
    if (peek() == '+' || peek() == '-') {
      sign = (get() == '-') ? -1.0 : 1.0;
    }
    for (;;) {
      Monomial m = parse_monomial();
      p.add_term(m.exponents, sign * m.coefficient);
      skip_ws();
      if (pos_ >= text_.size()) break;
      const char op = peek();
      if (op != '+' && op != '-') throw ParseError(std::string("expected '+' or '-', found '") + op + "'", pos_);
      get();
      sign = (op == '-') ? -1.0 : 1.0;
    }
    return p;
  }

 private:
  Monomial parse_monomial() {
    Monomial m;
    m.exponents.assign(static_cast<std::size_t>(nvars_), 0);
    m.coefficient = 1.0;
    bool first = true;
    for (;;) {
      skip_ws();
      if (!first) {
        if (pos_ >= text_.size() || peek() != '*') break;
        get();
        skip_ws();
      }
      if (pos_ >= text_.size()) throw ParseError("expected a coefficient or variable", pos_);
      const char c = peek();
      if (c == 'x' || c == 't') {
        const int idx = parse_variable();
        int exp = 1;
        skip_ws();
        if (pos_ < text_.size() && peek() == '^') {
          get();
          exp = parse_exponent();
        }
        m.exponents[static_cast<std::size_t>(idx)] += exp;
      } else if ((c >= '0' && c <= '9') || c == '.') {
        m.coefficient *= parse_number();
        skip_ws();
        if (pos_ < text_.size() && peek() == '^')
          throw ParseError("'^' applies to variables, not coefficients", pos_);
      } else {
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
      }
      first = false;
    }
    return m;
  }

  int parse_variable() {
    const std::size_t start = pos_;
    const char c = get();
    if (c == 't') {
      if (t_index_ < 0) throw ParseError("'t' is only allowed in deformation expressions", start);
      return t_index_;
    }
    std::size_t end = pos_;
    while (end < text_.size() && text_[end] >= '0' && text_[end] <= '9') ++end;
    if (end == pos_) throw ParseError("variable needs an index, e.g. x1", start);
    int idx = 0;
    std::from_chars(text_.data() + pos_, text_.data() + end, idx);
    pos_ = end;
    if (idx < 1 || idx > nvars_)
      throw ParseError("variable index out of range: x" + std::to_string(idx) + " with n=" + std::to_string(nvars_),
                       start);
    return idx - 1;
  }

  int parse_exponent() {
    skip_ws();
    const std::size_t start = pos_;
    std::size_t end = pos_;
    while (end < text_.size() && text_[end] >= '0' && text_[end] <= '9') ++end;
    if (end == pos_) throw ParseError("'^' needs a non-negative integer exponent", start);
    int e = 0;
    const auto res = std::from_chars(text_.data() + pos_, text_.data() + end, e);
    if (res.ec != std::errc()) throw ParseError("exponent out of range", start);
    pos_ = end;
    return e;
  }

  double parse_number() {
    const std::size_t start = pos_;
    double v = 0.0;
    const auto res = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
    if (res.ec != std::errc() || res.ptr == text_.data() + pos_)
      throw ParseError("malformed number", start);
    pos_ = static_cast<std::size_t>(res.ptr - text_.data());
    return v;
  }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r'))
      ++pos_;
  }

  char peek() const { return text_[pos_]; }
  char get() { return text_[pos_++]; }

  std::string_view text_;
  int nvars_;
  int t_index_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Polynomial parse_polynomial(std::string_view text, int nvars) {
  return detail::Parser(text, nvars, -1).run();
}

/// Deformation context: variables x1..x<n> plus `t`; result has nvars+1
/// variables with t at index nvars.
inline Polynomial parse_polynomial_t(std::string_view text, int nvars) {
  return detail::Parser(text, nvars + 1, nvars).run();
}

class MapGerm {
 public:
  explicit MapGerm(std::vector<Polynomial> components) : components_(std::move(components)) {
    if (components_.empty()) throw GermError("a map-germ needs at least one component");
    nvars_ = components_[0].nvars();
    ncomps_ = static_cast<int>(components_.size());
    for (const auto& p : components_) {
      if (p.nvars() != nvars_) throw GermError("all components must share the variable count");
      const auto it = p.terms().find(Exponents(static_cast<std::size_t>(nvars_), 0));
      if (it != p.terms().end()) throw GermError("germ condition violated: component has a constant term");
    }
    if (nvars_ < ncomps_) throw GermError("need n >= p (no more components than variables)");
    grads_.reserve(static_cast<std::size_t>(ncomps_));
    for (const auto& p : components_) grads_.push_back(p.gradient());
  }

  int nvars() const { return nvars_; }
  int ncomps() const { return ncomps_; }
  const std::vector<Polynomial>& components() const { return components_; }
  const Polynomial& component(int j) const { return components_[static_cast<std::size_t>(j)]; }
  const Polynomial& partial(int j, int i) const { return grads_[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]; }

  Eigen::VectorXd eval(const Point& x) const {
    Eigen::VectorXd v(ncomps_);
    for (int j = 0; j < ncomps_; ++j) v[j] = components_[static_cast<std::size_t>(j)].eval(x);
    return v;
  }

  /// Columns are grad f_j(x); shape n x p.
  Eigen::MatrixXd gradients_at(const Point& x) const {
    Eigen::MatrixXd m(nvars_, ncomps_);
    for (int j = 0; j < ncomps_; ++j)
      for (int i = 0; i < nvars_; ++i) m(i, j) = partial(j, i).eval(x);
    return m;
  }

  /// Jacobian dF(x); shape p x n.
  Eigen::MatrixXd jacobian(const Point& x) const { return gradients_at(x).transpose(); }

  int degree() const {
    int d = -1;
    for (const auto& p : components_) d = std::max(d, p.degree());
    return d;
  }

  bool operator==(const MapGerm& o) const { return components_ == o.components_; }

 private:
  std::vector<Polynomial> components_;
  std::vector<std::vector<Polynomial>> grads_;
  int nvars_ = 0;
  int ncomps_ = 0;
};

/// Degree-<= r truncation of every component: the polynomial representative z
/// of the r-jet.
inline MapGerm jet(const MapGerm& f, int r) {
  if (r < 1) throw GermError("jet order must be >= 1");
  std::vector<Polynomial> comps;
  comps.reserve(static_cast<std::size_t>(f.ncomps()));
  for (const auto& p : f.components()) comps.push_back(p.truncate_degree(r));
  return MapGerm(std::move(comps));
}

/// q = f - z and rres = g - z with z = jet(f, r); requires matching r-jets.
inline std::pair<MapGerm, MapGerm> residuals(const MapGerm& f, const MapGerm& g, int r) {
  if (f.nvars() != g.nvars() || f.ncomps() != g.ncomps())
    throw DimensionError("residuals need germs of matching dimensions");
  for (int j = 0; j < f.ncomps(); ++j) {
    const Polynomial diff = f.component(j).truncate_degree(r) - g.component(j).truncate_degree(r);
    if (!diff.is_zero()) {
      const auto& [e, c] = *diff.terms().begin();
      Polynomial witness(f.nvars());
      witness.add_term(e, c);
      throw JetMismatchError("jets differ at order " + std::to_string(r) + " in component " + std::to_string(j + 1) +
                             ": " + witness.to_string());
    }
  }
  // With matching r-jets, f - z and g - z are the components' own tails.
  std::vector<Polynomial> qc, rc;
  for (int j = 0; j < f.ncomps(); ++j) {
    qc.push_back(f.component(j).tail_above_degree(r));
    rc.push_back(g.component(j).tail_above_degree(r));
  }
  return {MapGerm(std::move(qc)), MapGerm(std::move(rc))};
}

inline MapGerm germ_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("nvars") || !j.contains("components"))
    throw GermError(R"(germ JSON needs {"nvars": n, "components": [...]})");
  const int n = j.at("nvars").get<int>();
  std::vector<Polynomial> comps;
  for (const auto& c : j.at("components")) comps.push_back(parse_polynomial(c.get<std::string>(), n));
  return MapGerm(std::move(comps));
}

inline nlohmann::json germ_to_json(const MapGerm& f) {
  nlohmann::json j;
  j["nvars"] = f.nvars();
  auto arr = nlohmann::json::array();
  for (const auto& p : f.components()) arr.push_back(p.to_string());
  j["components"] = std::move(arr);
  return j;
}

}  // namespace stratcheck::poly
