#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "effmom/rational.hpp"
#include "effmom/symbols.hpp"

namespace effmom {

// Monomial over the flat symbol universe: sorted (symbol, exponent) factors
// plus the cached half-order grade of the product.
struct Mono {
  std::vector<std::pair<SymId, std::uint32_t>> f;
  int grade = 0;

  bool empty() const { return f.empty(); }
  std::uint32_t exp_of(SymId s) const {
    for (const auto& [sym, e] : f)
      if (sym == s) return e;
    return 0;
  }
};

// Term order: grade first, then lexicographic over the symbol axis in content
// order with a higher exponent on an earlier symbol sorting first.  Map
// iteration order therefore is the canonical dump order.
struct MonoLess {
  const SymbolTable* tab = nullptr;

  bool operator()(const Mono& a, const Mono& b) const {
    if (a.grade != b.grade) return a.grade < b.grade;
    std::size_t i = 0, j = 0;
    while (i < a.f.size() && j < b.f.size()) {
      if (a.f[i].first == b.f[j].first) {
        if (a.f[i].second != b.f[j].second) return a.f[i].second > b.f[j].second;
        ++i;
        ++j;
      } else {
        return tab->less(a.f[i].first, b.f[j].first);
      }
    }
    return i < a.f.size();
  }
};

class Poly {
 public:
  using TermMap = std::map<Mono, CRat, MonoLess>;

  Poly() : terms_(MonoLess{nullptr}) {}
  explicit Poly(const SymbolTable* tab) : tab_(tab), terms_(MonoLess{tab}) {}

  static Poly constant(const SymbolTable* tab, CRat c) {
    Poly p(tab);
    if (!c.is_zero()) p.terms_.emplace(Mono{}, std::move(c));
    return p;
  }
  static Poly symbol(const SymbolTable* tab, SymId s, std::uint32_t exp = 1) {
    Poly p(tab);
    if (exp == 0) return constant(tab, CRat(1));
    Mono m;
    m.f.push_back({s, exp});
    m.grade = tab->info(s).grade * static_cast<int>(exp);
    p.terms_.emplace(std::move(m), CRat(1));
    return p;
  }

  const SymbolTable* table() const { return tab_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
  }
  CRat constant_value() const {
    if (terms_.empty()) return CRat(0);
    if (!is_constant()) throw Error("polynomial is not constant");
    return terms_.begin()->second;
  }

  void add_term(Mono m, CRat c) {
    if (c.is_zero()) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      terms_.emplace(std::move(m), std::move(c));
    } else {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  Poly operator-() const {
    Poly r = *this;
    for (auto& [m, c] : r.terms_) c = -c;
    return r;
  }

  Poly& operator+=(const Poly& o) {
    merge_table(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    merge_table(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }

  friend Poly operator*(const Poly& a, const Poly& b) {
    const SymbolTable* tab = a.tab_ ? a.tab_ : b.tab_;
    if (a.tab_ && b.tab_ && a.tab_ != b.tab_)
      throw AlgebraMismatch("polynomials belong to different systems");
    Poly r(tab);
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_)
        r.add_term(mono_mul(tab, ma, mb), ca * cb);
    return r;
  }
  Poly& operator*=(const Poly& o) { return *this = *this * o; }

  Poly& scale(const CRat& c) {
    if (c.is_zero()) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, v] : terms_) v *= c;
    return *this;
  }
  friend Poly operator*(Poly a, const CRat& c) { return a.scale(c); }

  Poly pow(std::uint32_t n) const {
    Poly r = constant(tab_, CRat(1));
    Poly base = *this;
    while (n) {
      if (n & 1) r *= base;
      base = (n >>= 1) ? base * base : base;
    }
    return r;
  }

  friend bool operator==(const Poly& a, const Poly& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    auto ia = a.terms_.begin();
    auto ib = b.terms_.begin();
    for (; ia != a.terms_.end(); ++ia, ++ib)
      if (ia->first.f != ib->first.f || ia->second != ib->second) return false;
    return true;
  }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  // Factor lists stay sorted in symbol content order; every construction path
  // goes through here or preserves the order of an existing list.
  static Mono mono_mul(const SymbolTable* tab, const Mono& a, const Mono& b) {
    Mono r;
    r.grade = a.grade + b.grade;
    r.f.reserve(a.f.size() + b.f.size());
    std::size_t i = 0, j = 0;
    while (i < a.f.size() && j < b.f.size()) {
      if (a.f[i].first == b.f[j].first) {
        r.f.push_back({a.f[i].first, a.f[i].second + b.f[j].second});
        ++i;
        ++j;
      } else if (tab->less(a.f[i].first, b.f[j].first)) {
        r.f.push_back(a.f[i++]);
      } else {
        r.f.push_back(b.f[j++]);
      }
    }
    for (; i < a.f.size(); ++i) r.f.push_back(a.f[i]);
    for (; j < b.f.size(); ++j) r.f.push_back(b.f[j]);
    return r;
  }

  int min_grade() const {
    int g = 0;
    bool first = true;
    for (const auto& [m, c] : terms_) {
      if (first || m.grade < g) g = m.grade;
      first = false;
    }
    return g;
  }
  int max_grade() const {
    int g = 0;
    for (const auto& [m, c] : terms_)
      if (m.grade > g) g = m.grade;
    return g;
  }

  Poly truncate_grade(int half_order) const {
    Poly r(tab_);
    for (const auto& [m, c] : terms_)
      if (m.grade <= half_order) r.terms_.emplace(m, c);
    return r;
  }
  Poly grade_part(int g) const {
    Poly r(tab_);
    for (const auto& [m, c] : terms_)
      if (m.grade == g) r.terms_.emplace(m, c);
    return r;
  }

  // Degree in one symbol and the coefficient polynomial of sym^k.
  std::uint32_t degree_in(SymId s) const {
    std::uint32_t d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.exp_of(s));
    return d;
  }
  Poly coeff_of(SymId s, std::uint32_t k) const {
    Poly r(tab_);
    int sg = tab_->info(s).grade;
    for (const auto& [m, c] : terms_) {
      if (m.exp_of(s) != k) continue;
      Mono stripped;
      stripped.grade = m.grade - sg * static_cast<int>(k);
      for (const auto& fac : m.f)
        if (fac.first != s) stripped.f.push_back(fac);
      r.terms_.emplace(std::move(stripped), c);
    }
    return r;
  }
  bool contains_symbol(SymId s) const {
    for (const auto& [m, c] : terms_)
      if (m.exp_of(s) > 0) return true;
    return false;
  }
  template <class Pred>
  bool contains_symbol_if(Pred pred) const {
    for (const auto& [m, c] : terms_)
      for (const auto& [sym, e] : m.f)
        if (pred(tab_->info(sym))) return true;
    return false;
  }

  Poly derivative(SymId s) const {
    Poly r(tab_);
    int sg = tab_->info(s).grade;
    for (const auto& [m, c] : terms_) {
      std::uint32_t e = m.exp_of(s);
      if (e == 0) continue;
      Mono d;
      d.grade = m.grade - sg;
      for (const auto& fac : m.f) {
        if (fac.first == s) {
          if (fac.second > 1) d.f.push_back({s, fac.second - 1});
        } else {
          d.f.push_back(fac);
        }
      }
      r.add_term(std::move(d), c * CRat(Rat(e)));
    }
    return r;
  }

  // Substitute selected symbols by polynomials.
  Poly subst(const std::map<SymId, Poly>& repl) const {
    Poly r(tab_);
    for (const auto& [m, c] : terms_) {
      Poly term = constant(tab_, c);
      Mono rest;
      for (const auto& [sym, e] : m.f) {
        auto it = repl.find(sym);
        if (it == repl.end()) {
          rest.f.push_back({sym, e});
          rest.grade += tab_->info(sym).grade * static_cast<int>(e);
        } else {
          term *= it->second.pow(e);
        }
      }
      Poly restp(tab_);
      restp.terms_.emplace(std::move(rest), CRat(1));
      r += term * restp;
    }
    return r;
  }

  // Conjugate coefficients (hbar and parameters are real symbols).
  Poly conj_coeffs() const {
    Poly r(tab_);
    for (const auto& [m, c] : terms_) r.terms_.emplace(m, c.conj());
    return r;
  }

  // Exact division by i*hbar; every term must carry hbar.
  Poly divide_by_ihbar(SymId hbar_sym) const {
    Poly r(tab_);
    for (const auto& [m, c] : terms_) {
      Mono d;
      d.grade = m.grade - 2;
      bool found = false;
      for (const auto& fac : m.f) {
        if (fac.first == hbar_sym) {
          found = true;
          if (fac.second > 1) d.f.push_back({fac.first, fac.second - 1});
        } else {
          d.f.push_back(fac);
        }
      }
      if (!found) throw Error("term without hbar in commutator expectation");
      r.terms_.emplace(std::move(d), c * CRat(Rat(0), Rat(-1)));
    }
    return r;
  }

  std::complex<double> eval(
      const std::function<std::complex<double>(SymId)>& value_of) const {
    std::complex<double> acc{0.0, 0.0};
    for (const auto& [m, c] : terms_) {
      std::complex<double> t = c.to_complex();
      for (const auto& [sym, e] : m.f) {
        std::complex<double> v = value_of(sym);
        for (std::uint32_t k = 0; k < e; ++k) t *= v;
      }
      acc += t;
    }
    return acc;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (const auto& [m, c] : terms_) {
      bool negative = c.is_real() ? (c.re < 0) : (c.re == 0 && c.im < 0);
      CRat mag = negative ? -c : c;
      if (out.empty()) {
        if (negative) out += "-";
      } else {
        out += negative ? " - " : " + ";
      }
      std::string cs = crat_to_string(mag);
      std::string ms = mono_to_string(m);
      if (ms.empty()) {
        out += cs;
      } else if (cs == "1") {
        out += ms;
      } else {
        out += cs + "*" + ms;
      }
    }
    return out;
  }

  std::string mono_to_string(const Mono& m) const {
    // Display convention: hbar first, then parameters, expectations, moments,
    // and algebraic roots last.  Purely cosmetic; term order is unaffected.
    auto display_rank = [](SymKind k) {
      switch (k) {
        case SymKind::Hbar:
          return 0;
        case SymKind::Param:
          return 1;
        case SymKind::Expect:
          return 2;
        case SymKind::Moment:
          return 3;
        case SymKind::Raw:
          return 4;
        case SymKind::AuxSqrt:
          return 5;
        default:
          return 6;
      }
    };
    std::vector<std::pair<SymId, std::uint32_t>> fs = m.f;
    std::sort(fs.begin(), fs.end(), [&](const auto& a, const auto& b) {
      int ra = display_rank(tab_->info(a.first).kind);
      int rb = display_rank(tab_->info(b.first).kind);
      if (ra != rb) return ra < rb;
      return tab_->less(a.first, b.first);
    });
    std::string out;
    for (const auto& [sym, e] : fs) {
      if (!out.empty()) out += "*";
      out += tab_->info(sym).name;
      if (e > 1) out += "^" + std::to_string(e);
    }
    return out;
  }

 private:
  void merge_table(const Poly& o) {
    if (!tab_) {
      tab_ = o.tab_;
      TermMap fresh(MonoLess{tab_});
      for (auto& t : terms_) fresh.insert(t);
      terms_.swap(fresh);
    } else if (o.tab_ && o.tab_ != tab_) {
      throw AlgebraMismatch("polynomials belong to different systems");
    }
  }

  const SymbolTable* tab_ = nullptr;
  TermMap terms_;
};

}  // namespace effmom
