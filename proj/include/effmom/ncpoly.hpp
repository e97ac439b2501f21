#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "effmom/poly.hpp"

namespace effmom {

// Word over generator indices, a plain product read left to right.
using Word = std::vector<std::uint32_t>;

// Canonical ordered monomial a_1^{n_1} ... a_N^{n_N}.
struct NCMono {
  std::vector<std::uint32_t> exp;

  std::uint32_t degree() const {
    std::uint32_t d = 0;
    for (auto e : exp) d += e;
    return d;
  }
  Word word() const {
    Word w;
    for (std::uint32_t g = 0; g < exp.size(); ++g)
      for (std::uint32_t k = 0; k < exp[g]; ++k) w.push_back(g);
    return w;
  }
  static NCMono from_word(std::size_t ngen, const Word& w) {
    NCMono m;
    m.exp.assign(ngen, 0);
    for (auto g : w) ++m.exp[g];
    return m;
  }

  friend bool operator==(const NCMono& a, const NCMono& b) { return a.exp == b.exp; }
  friend bool operator<(const NCMono& a, const NCMono& b) {
    std::uint32_t da = a.degree(), db = b.degree();
    if (da != db) return da < db;
    // Higher exponent on an earlier generator sorts first.
    for (std::size_t i = 0; i < a.exp.size(); ++i)
      if (a.exp[i] != b.exp[i]) return a.exp[i] > b.exp[i];
    return false;
  }
};

// Element of the generated algebra in the ordered-monomial basis.  The
// coefficients are commutative polynomials; for plain operator elements they
// only involve hbar and parameters, for centered (delta) elements they may
// also involve expectation-value symbols.
class NCPoly {
 public:
  using TermMap = std::map<NCMono, Poly>;

  NCPoly() = default;
  explicit NCPoly(const SymbolTable* tab, std::size_t ngen)
      : tab_(tab), ngen_(ngen) {}

  static NCPoly zero(const SymbolTable* tab, std::size_t ngen) {
    return NCPoly(tab, ngen);
  }
  static NCPoly identity(const SymbolTable* tab, std::size_t ngen) {
    NCPoly r(tab, ngen);
    NCMono one;
    one.exp.assign(ngen, 0);
    r.terms_.emplace(one, Poly::constant(tab, CRat(1)));
    return r;
  }
  static NCPoly generator(const SymbolTable* tab, std::size_t ngen,
                          std::uint32_t g) {
    NCPoly r(tab, ngen);
    NCMono m;
    m.exp.assign(ngen, 0);
    m.exp[g] = 1;
    r.terms_.emplace(m, Poly::constant(tab, CRat(1)));
    return r;
  }

  const TermMap& terms() const { return terms_; }
  const SymbolTable* table() const { return tab_; }
  std::size_t ngen() const { return ngen_; }
  bool is_zero() const { return terms_.empty(); }

  std::uint32_t degree() const {
    std::uint32_t d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
  }

  void add_term(const NCMono& m, const Poly& c) {
    if (c.is_zero()) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      terms_.emplace(m, c);
    } else {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  NCPoly operator-() const {
    NCPoly r = *this;
    for (auto& [m, c] : r.terms_) c = -c;
    return r;
  }
  NCPoly& operator+=(const NCPoly& o) {
    check(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  NCPoly& operator-=(const NCPoly& o) {
    check(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  friend NCPoly operator+(NCPoly a, const NCPoly& b) { return a += b; }
  friend NCPoly operator-(NCPoly a, const NCPoly& b) { return a -= b; }

  NCPoly& scale(const Poly& c) {
    if (c.is_zero()) {
      terms_.clear();
      return *this;
    }
    TermMap out;
    for (auto& [m, v] : terms_) {
      Poly p = v * c;
      if (!p.is_zero()) out.emplace(m, std::move(p));
    }
    terms_.swap(out);
    return *this;
  }
  friend NCPoly operator*(NCPoly a, const Poly& c) { return a.scale(c); }

  friend bool operator==(const NCPoly& a, const NCPoly& b) {
    return a.terms_ == b.terms_;
  }
  friend bool operator!=(const NCPoly& a, const NCPoly& b) { return !(a == b); }

  // Smallest hbar exponent over all terms; commutators must report >= 1.
  int min_hbar_degree(SymId hbar_sym) const {
    int best = -1;
    for (const auto& [m, c] : terms_)
      for (const auto& [mono, coef] : c.terms()) {
        int e = static_cast<int>(mono.exp_of(hbar_sym));
        if (best < 0 || e < best) best = e;
      }
    return best;
  }

  std::string to_string(const std::vector<std::string>& gen_names) const {
    if (terms_.empty()) return "0";
    std::string out;
    for (const auto& [m, c] : terms_) {
      std::string ms;
      for (std::size_t g = 0; g < m.exp.size(); ++g) {
        if (m.exp[g] == 0) continue;
        if (!ms.empty()) ms += "*";
        ms += gen_names[g];
        if (m.exp[g] > 1) ms += "^" + std::to_string(m.exp[g]);
      }
      std::string cs = c.to_string();
      bool bare = c.terms().size() == 1;
      std::string piece;
      if (ms.empty()) {
        piece = cs;
      } else if (cs == "1") {
        piece = ms;
      } else if (bare) {
        piece = cs + "*" + ms;
      } else {
        piece = "(" + cs + ")*" + ms;
      }
      if (!out.empty()) {
        if (!piece.empty() && piece[0] == '-') {
          out += " - " + piece.substr(1);
        } else {
          out += " + " + piece;
        }
      } else {
        out = piece;
      }
    }
    return out;
  }

 private:
  void check(const NCPoly& o) {
    if (!tab_) {
      tab_ = o.tab_;
      ngen_ = o.ngen_;
    } else if (o.tab_ && o.tab_ != tab_) {
      throw AlgebraMismatch("operator polynomials from different algebras");
    }
  }

  const SymbolTable* tab_ = nullptr;
  std::size_t ngen_ = 0;
  TermMap terms_;
};

}  // namespace effmom
