#pragma once

#include <complex>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "effmom/context.hpp"
#include "effmom/error.hpp"
#include "effmom/moments.hpp"
#include "effmom/poly.hpp"

namespace effmom {

// ---------------------------------------------------------------------------
// Polynomials extended by algebraic square roots
// ---------------------------------------------------------------------------

// Replace aux^k (k >= 2) by def^(k/2) * aux^(k%2).  Definitions are grade-0
// polynomials over expectations and parameters, so this terminates in one
// pass per symbol layer.
inline Poly reduce_aux(Context& ctx, const Poly& p) {
  bool dirty = false;
  for (const auto& [m, c] : p.terms())
    for (const auto& [sym, e] : m.f)
      if (e >= 2 && ctx.syms.info(sym).kind == SymKind::AuxSqrt) dirty = true;
  if (!dirty) return p;
  Poly out(&ctx.syms);
  for (const auto& [m, c] : p.terms()) {
    Poly term = Poly::constant(&ctx.syms, c);
    Mono rest;
    for (const auto& [sym, e] : m.f) {
      const auto& info = ctx.syms.info(sym);
      if (info.kind == SymKind::AuxSqrt && e >= 2) {
        term *= ctx.aux_def(info.aux).pow(e / 2);
        if (e % 2) {
          rest.f.push_back({sym, 1});
          rest.grade += info.grade;
        }
      } else {
        rest.f.push_back({sym, e});
        rest.grade += info.grade * static_cast<int>(e);
      }
    }
    Poly restp(&ctx.syms);
    restp.add_term(std::move(rest), CRat(1));
    out += term * restp;
  }
  return reduce_aux(ctx, out);
}

// Fraction of two polynomials in canonical form: aux powers reduced, the
// denominator free of algebraic roots, common monomial content cancelled and
// the denominator's leading coefficient normalised to one.
struct RatExpr {
  Poly num, den;

  bool is_zero() const { return num.is_zero(); }
  bool is_poly() const {
    return den.is_constant() && den.constant_value() == CRat(1);
  }

  std::string to_string() const {
    if (is_poly()) return num.to_string();
    std::string n = num.size() > 1 ? "(" + num.to_string() + ")" : num.to_string();
    std::string d = den.size() > 1 ? "(" + den.to_string() + ")" : den.to_string();
    return n + " / " + d;
  }
};

namespace detail {

inline Mono mono_gcd(const Mono& a, const Mono& b, const SymbolTable* tab) {
  Mono g;
  for (const auto& [sym, e] : a.f) {
    std::uint32_t eb = b.exp_of(sym);
    if (eb == 0) continue;
    std::uint32_t ge = std::min(e, eb);
    g.f.push_back({sym, ge});
    g.grade += tab->info(sym).grade * static_cast<int>(ge);
  }
  return g;
}

inline Poly divide_mono(const Poly& p, const Mono& m) {
  Poly out(p.table());
  for (const auto& [mono, c] : p.terms()) {
    Mono d;
    d.grade = mono.grade - m.grade;
    for (const auto& [sym, e] : mono.f) {
      std::uint32_t me = m.exp_of(sym);
      if (e > me) d.f.push_back({sym, e - me});
    }
    out.add_term(std::move(d), c);
  }
  return out;
}

using BigInt = boost::multiprecision::cpp_int;

inline BigInt int_square_part(BigInt n) {
  if (n <= 1) return 1;
  BigInt s = 1;
  for (BigInt p = 2; p * p * p * p <= n && p < 1000; ++p) {
    while (n % (p * p) == 0) {
      n /= p * p;
      s *= p;
    }
  }
  BigInt r = boost::multiprecision::sqrt(n);
  if (r * r == n) s *= r;
  return s;
}

inline Rat rat_gcd(const Rat& a, const Rat& b) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::gcd;
  using boost::multiprecision::numerator;
  if (a == 0) return b < 0 ? Rat(-b) : b;
  if (b == 0) return a < 0 ? Rat(-a) : a;
  BigInt an = numerator(a) < 0 ? BigInt(-numerator(a)) : numerator(a);
  BigInt bn = numerator(b) < 0 ? BigInt(-numerator(b)) : numerator(b);
  BigInt ad = denominator(a), bd = denominator(b);
  return Rat(gcd(an * bd, bn * ad)) / Rat(ad * bd);
}

}  // namespace detail

// Square root of a grade-0 polynomial in canonical form: perfect-square
// monomial and rational content are pulled out front, so algebraically equal
// arguments always intern the same root symbol.
inline Poly sqrt_poly(Context& ctx, const Poly& arg_in) {
  Poly arg = reduce_aux(ctx, arg_in);
  if (arg.is_zero()) return arg;
  if (arg.contains_symbol_if(
          [](const SymbolInfo& si) { return si.kind == SymKind::AuxSqrt; }))
    throw Error("nested algebraic roots are not supported");
  // Monomial square content.
  bool first = true;
  Mono content;
  for (const auto& [m, c] : arg.terms()) {
    if (first) {
      content = m;
      first = false;
    } else {
      content = detail::mono_gcd(content, m, &ctx.syms);
    }
  }
  Mono half;
  for (const auto& [sym, e] : content.f)
    if (e >= 2) {
      half.f.push_back({sym, e / 2});
      half.grade += ctx.syms.info(sym).grade * static_cast<int>(e / 2);
    }
  if (!half.f.empty()) {
    Mono square = Poly::mono_mul(&ctx.syms, half, half);
    arg = detail::divide_mono(arg, square);
  }
  // Rational square content.
  Rat c(0);
  for (const auto& [m, coef] : arg.terms()) {
    c = detail::rat_gcd(c, coef.re);
    c = detail::rat_gcd(c, coef.im);
  }
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  Rat s = Rat(detail::int_square_part(numerator(c))) /
          Rat(detail::int_square_part(denominator(c)));
  if (s != 1) arg.scale(CRat(Rat(1) / (s * s)));

  SymId aux = ctx.intern_sqrt(arg);
  Poly scale(&ctx.syms);
  scale.add_term(half, CRat(s));
  return scale * ctx.poly_sym(aux);
}

// Attempted exact division in the root-extended ring; nullopt when num is
// not a polynomial multiple of den.
inline std::optional<Poly> poly_try_div_exact(Context& ctx, Poly num,
                                              Poly den) {
  if (den.is_zero()) return std::nullopt;
  if (num.is_zero()) return Poly(&ctx.syms);
  // Clear roots out of the divisor; the quotient is unchanged.
  for (;;) {
    SymId aux = 0;
    bool found = false;
    for (const auto& [m, c] : den.terms())
      for (const auto& [sym, e] : m.f)
        if (ctx.syms.info(sym).kind == SymKind::AuxSqrt) {
          aux = sym;
          found = true;
          break;
        }
    if (!found) break;
    Poly d1 = den.coeff_of(aux, 1);
    Poly d0 = den.coeff_of(aux, 0);
    Poly conj = d0 - ctx.poly_sym(aux) * d1;
    num = reduce_aux(ctx, num * conj);
    den = reduce_aux(ctx, den * conj);
    if (den.is_zero()) return std::nullopt;
  }
  // Split the dividend on root monomials and long-divide each component.
  auto lead = den.terms().rbegin();
  Poly quotient(&ctx.syms);
  Poly rem = std::move(num);
  while (!rem.is_zero()) {
    auto it = rem.terms().rbegin();
    const Mono& t = it->first;
    for (const auto& [sym, e] : lead->first.f)
      if (t.exp_of(sym) < e) return std::nullopt;
    Mono q;
    q.grade = t.grade - lead->first.grade;
    for (const auto& [sym, e] : t.f) {
      std::uint32_t le = lead->first.exp_of(sym);
      if (e > le) q.f.push_back({sym, e - le});
    }
    Poly qp(&ctx.syms);
    qp.add_term(std::move(q), it->second / lead->second);
    quotient += qp;
    rem -= qp * den;
    rem = reduce_aux(ctx, rem);
  }
  return quotient;
}

inline RatExpr rat_normalize(Context& ctx, Poly num, Poly den) {
  num = reduce_aux(ctx, num);
  den = reduce_aux(ctx, den);
  if (den.is_zero()) throw Error("zero denominator in rational expression");
  if (num.is_zero()) return {Poly(&ctx.syms), Poly::constant(&ctx.syms, CRat(1))};

  auto cancel_content = [&] {
    bool first = true;
    Mono content;
    auto fold = [&](const Poly& p) {
      for (const auto& [m, c] : p.terms()) {
        if (first) {
          content = m;
          first = false;
        } else {
          content = detail::mono_gcd(content, m, &ctx.syms);
        }
      }
    };
    fold(num);
    fold(den);
    if (!content.f.empty()) {
      num = detail::divide_mono(num, content);
      den = detail::divide_mono(den, content);
    }
  };

  // Shared monomial factors (including roots) cancel before the denominator
  // is rationalised, otherwise the conjugation inflates both sides.
  cancel_content();

  // Clear the remaining algebraic roots out of the denominator.
  for (;;) {
    SymId aux = 0;
    bool found = false;
    for (const auto& [m, c] : den.terms()) {
      for (const auto& [sym, e] : m.f)
        if (ctx.syms.info(sym).kind == SymKind::AuxSqrt) {
          aux = sym;
          found = true;
          break;
        }
      if (found) break;
    }
    if (!found) break;
    Poly d1 = den.coeff_of(aux, 1);
    Poly d0 = den.coeff_of(aux, 0);
    if (d0.is_zero()) {
      // den = s*d1: multiply by s and fold s^2 into its definition.
      num = reduce_aux(ctx, num * ctx.poly_sym(aux));
      den = reduce_aux(ctx,
                       ctx.aux_def(ctx.syms.info(aux).aux) * d1);
    } else {
      Poly conj = d0 - ctx.poly_sym(aux) * d1;
      num = reduce_aux(ctx, num * conj);
      den = reduce_aux(ctx, den * conj);
    }
    cancel_content();
  }

  // Collapse to a polynomial when the division is exact.
  if (!den.is_constant()) {
    if (auto q = poly_try_div_exact(ctx, num, den)) {
      num = std::move(*q);
      den = Poly::constant(&ctx.syms, CRat(1));
    }
  }

  // Unit-normalise on the denominator's leading coefficient.
  CRat lead = den.terms().rbegin()->second;
  if (!(lead == CRat(1))) {
    CRat inv = CRat(1) / lead;
    num.scale(inv);
    den.scale(inv);
  }
  return {std::move(num), std::move(den)};
}

inline RatExpr rat_from_poly(Context& ctx, const Poly& p) {
  return rat_normalize(ctx, p, Poly::constant(&ctx.syms, CRat(1)));
}
inline RatExpr rat_const(Context& ctx, CRat c) {
  return rat_from_poly(ctx, Poly::constant(&ctx.syms, std::move(c)));
}

inline RatExpr rat_add(Context& ctx, const RatExpr& a, const RatExpr& b) {
  if (a.den == b.den) return rat_normalize(ctx, a.num + b.num, a.den);
  return rat_normalize(ctx, a.num * b.den + b.num * a.den, a.den * b.den);
}
inline RatExpr rat_sub(Context& ctx, const RatExpr& a, const RatExpr& b) {
  if (a.den == b.den) return rat_normalize(ctx, a.num - b.num, a.den);
  return rat_normalize(ctx, a.num * b.den - b.num * a.den, a.den * b.den);
}
inline RatExpr rat_mul(Context& ctx, const RatExpr& a, const RatExpr& b) {
  return rat_normalize(ctx, a.num * b.num, a.den * b.den);
}
inline RatExpr rat_div(Context& ctx, const RatExpr& a, const RatExpr& b) {
  if (b.num.is_zero()) throw Error("division by zero rational expression");
  return rat_normalize(ctx, a.num * b.den, a.den * b.num);
}
inline RatExpr rat_neg(const RatExpr& a) { return {-a.num, a.den}; }

// Exact equality in the quotient ring (cross multiplication).
inline bool rat_equal(Context& ctx, const RatExpr& a, const RatExpr& b) {
  return reduce_aux(ctx, a.num * b.den - b.num * a.den).is_zero();
}

// Truncation to half-order <= h.  The denominator is expanded geometrically
// around its lowest-grade homogeneous part d_low; the result is represented
// over a power of d_low, so a ratio whose grade content is finite truncates
// even when every denominator term carries positive grade.
inline RatExpr rat_grade_truncate(Context& ctx, const RatExpr& r, int h) {
  if (r.num.is_zero()) return r;
  int gmin = r.den.min_grade();
  Poly d_low = r.den.grade_part(gmin);
  Poly d_rest = r.den - d_low;
  if (d_rest.is_zero() && gmin == 0) {
    Poly num = r.num.truncate_grade(h);
    return rat_normalize(ctx, std::move(num), r.den);
  }
  // Ratio grade g corresponds to numerator grade g + (J+1)*gmin.
  int rmin = r.num.min_grade() - gmin;
  int terms = h - rmin;  // geometric terms that can still contribute
  if (terms < 0) return {Poly(&ctx.syms), Poly::constant(&ctx.syms, CRat(1))};
  int keep = h + (terms + 1) * gmin;
  Poly acc(&ctx.syms);
  Poly power = Poly::constant(&ctx.syms, CRat(1));  // (-d_rest)^j
  for (int j = 0; j <= terms; ++j) {
    acc += reduce_aux(ctx,
                      r.num * power * d_low.pow(static_cast<std::uint32_t>(terms - j)))
               .truncate_grade(keep);
    if (j < terms) {
      power = reduce_aux(ctx, power * (-d_rest)).truncate_grade(keep);
      if (power.is_zero()) break;
    }
  }
  acc = reduce_aux(ctx, acc).truncate_grade(keep);
  return rat_normalize(ctx, acc,
                       d_low.pow(static_cast<std::uint32_t>(terms) + 1));
}

// Equality of two expressions up to terms of grade > h.
inline bool rat_equal_to_grade(Context& ctx, const RatExpr& a, const RatExpr& b,
                               int h) {
  RatExpr diff = rat_sub(ctx, a, b);
  if (diff.is_zero()) return true;
  return rat_grade_truncate(ctx, diff, h).is_zero();
}

// Substitute selected symbols of a polynomial by rational expressions.
inline RatExpr rat_subst(Context& ctx, const Poly& p,
                         const std::map<SymId, RatExpr>& repl) {
  RatExpr acc = rat_const(ctx, CRat(0));
  for (const auto& [m, c] : p.terms()) {
    RatExpr term = rat_const(ctx, c);
    Mono rest;
    for (const auto& [sym, e] : m.f) {
      auto it = repl.find(sym);
      if (it == repl.end()) {
        rest.f.push_back({sym, e});
        rest.grade += ctx.syms.info(sym).grade * static_cast<int>(e);
      } else {
        for (std::uint32_t k = 0; k < e; ++k)
          term = rat_mul(ctx, term, it->second);
      }
    }
    Poly restp(&ctx.syms);
    restp.add_term(std::move(rest), CRat(1));
    term = rat_mul(ctx, term, rat_from_poly(ctx, restp));
    acc = rat_add(ctx, acc, term);
  }
  return acc;
}

inline std::complex<double> rat_eval(const Context& ctx, const RatExpr& r,
                                     const StatePoint& s) {
  std::complex<double> n = evaluate(ctx, r.num, s);
  std::complex<double> d = evaluate(ctx, r.den, s);
  if (std::abs(d) == 0.0) throw Error("rational expression pole at state point");
  return n / d;
}

}  // namespace effmom
