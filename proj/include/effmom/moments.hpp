#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "effmom/algebra.hpp"
#include "effmom/context.hpp"
#include "effmom/error.hpp"

namespace effmom {

// ---------------------------------------------------------------------------
// Expectations of centered words in Weyl-moment coordinates
// ---------------------------------------------------------------------------

namespace detail {

inline Word multideg_word(const std::vector<std::uint32_t>& n) {
  Word w;
  for (std::uint32_t g = 0; g < n.size(); ++g)
    for (std::uint32_t k = 0; k < n[g]; ++k) w.push_back(g);
  return w;
}

inline std::uint32_t multideg_total(const std::vector<std::uint32_t>& n) {
  std::uint32_t d = 0;
  for (auto e : n) d += e;
  return d;
}

}  // namespace detail

// Expectation of the ordered centered word da_1^{n_1}...da_N^{n_N}: the Weyl
// moment of the same multidegree plus lower-degree corrections produced by
// the commutator swaps of the symmetrisation.  Degree-1 expectations vanish
// identically by centering, which terminates the recursion.
inline Poly delta_word_expect(Context& ctx,
                              const std::vector<std::uint32_t>& n) {
  const std::uint32_t deg = detail::multideg_total(n);
  if (deg == 0) return ctx.poly_const(CRat(1));
  if (deg == 1) return Poly(&ctx.syms);
  if (auto hit = ctx.delta_cache.find(n)) return *hit;

  Word sorted = detail::multideg_word(n);
  Poly corr(&ctx.syms);
  std::uint64_t count = 0;
  Word perm = sorted;
  do {
    ++count;
    NCPoly nf = normal_order_word(ctx, perm, /*centered=*/true);
    for (const auto& [m, c] : nf.terms()) {
      if (m.degree() == deg) continue;  // the leading ordered monomial itself
      corr += c * delta_word_expect(ctx, m.exp);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  Poly result = ctx.poly_sym(ctx.moment_sym(n));
  result -= corr * CRat(Rat(1, static_cast<long long>(count)));
  ctx.delta_cache.put(n, result);
  return result;
}

// Expectation of an arbitrary (not necessarily ordered) centered word.
inline Poly weyl_from_ordered(Context& ctx, const Word& w) {
  NCPoly nf = normal_order_word(ctx, w, /*centered=*/true);
  Poly out(&ctx.syms);
  for (const auto& [m, c] : nf.terms()) out += c * delta_word_expect(ctx, m.exp);
  return out;
}

// <A> as a moment polynomial: substitute a_i = <a_i> + da_i, expand, convert
// each ordered centered word through its Weyl expansion.  Exact, no
// truncation; linear in A; the identity maps to 1.
inline Poly expand_expectation(Context& ctx, const NCPoly& a) {
  Poly out(&ctx.syms);
  const std::size_t ng = ctx.ngen();
  for (const auto& [mono, coeff] : a.terms()) {
    // Walk the centered-degree odometer k <= n.
    std::vector<std::uint32_t> k(ng, 0);
    for (;;) {
      CRat binom(1);
      Poly expects = ctx.poly_const(CRat(1));
      for (std::size_t i = 0; i < ng; ++i) {
        std::uint32_t ni = mono.exp[i], ki = k[i];
        // C(ni, ki)
        Rat b = 1;
        for (std::uint32_t t = 0; t < ki; ++t)
          b = b * Rat(ni - t) / Rat(t + 1);
        binom *= CRat(b);
        if (ni - ki > 0)
          expects *= ctx.poly_sym(ctx.expect_syms[i], ni - ki);
      }
      out += coeff * expects * delta_word_expect(ctx, k) * binom;
      // increment odometer
      std::size_t pos = 0;
      while (pos < ng) {
        if (k[pos] < mono.exp[pos]) {
          ++k[pos];
          break;
        }
        k[pos] = 0;
        ++pos;
      }
      if (pos == ng) break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Raw expectation coordinates <a_1^{n_1}...a_N^{n_N}> and the Poisson bracket
// ---------------------------------------------------------------------------

namespace detail {

// Linear map from operator elements to raw-coordinate polynomials.
inline Poly rawify(Context& ctx, const NCPoly& a) {
  Poly out(&ctx.syms);
  for (const auto& [m, c] : a.terms()) {
    std::uint32_t deg = m.degree();
    if (deg == 0) {
      out += c;
    } else if (deg == 1) {
      for (std::uint32_t g = 0; g < m.exp.size(); ++g)
        if (m.exp[g]) out += c * ctx.poly_sym(ctx.expect_syms[g]);
    } else {
      out += c * ctx.poly_sym(ctx.raw_sym(m.exp));
    }
  }
  return out;
}

inline NCPoly op_from_multideg(Context& ctx,
                               const std::vector<std::uint32_t>& n) {
  NCPoly r(&ctx.syms, ctx.ngen());
  NCMono m;
  m.exp = n;
  if (m.exp.size() != ctx.ngen()) m.exp.resize(ctx.ngen(), 0);
  r.add_term(m, ctx.poly_const(CRat(1)));
  return r;
}

inline std::vector<std::uint32_t> symbol_multideg(const Context& ctx, SymId s) {
  const auto& info = ctx.syms.info(s);
  if (info.kind == SymKind::Expect) {
    std::vector<std::uint32_t> n(ctx.ngen(), 0);
    n[info.gen] = 1;
    return n;
  }
  return info.multideg;
}

}  // namespace detail

// <A> written directly in raw expectation coordinates.
inline Poly raw_expectation(Context& ctx, const NCPoly& a) {
  return detail::rawify(ctx, a);
}

// Weyl moment written in raw coordinates: average over all orderings of the
// centered word, expanded with a_i = <a_i> + da_i and normal-ordered.
inline Poly moment_to_raw(Context& ctx, SymId moment) {
  if (auto hit = ctx.moment_raw_cache.find(moment)) return *hit;
  const auto& info = ctx.syms.info(moment);
  Word sorted = detail::multideg_word(info.multideg);
  Poly acc(&ctx.syms);
  std::uint64_t count = 0;
  Word perm = sorted;
  do {
    ++count;
    NCPoly prod = NCPoly::identity(&ctx.syms, ctx.ngen());
    for (auto g : perm) {
      NCPoly factor = NCPoly::generator(&ctx.syms, ctx.ngen(), g);
      factor -= NCPoly::identity(&ctx.syms, ctx.ngen()) *
                ctx.poly_sym(ctx.expect_syms[g]);
      prod = nc_mul(ctx, prod, factor);
    }
    acc += detail::rawify(ctx, prod);
  } while (std::next_permutation(perm.begin(), perm.end()));
  acc = acc * CRat(Rat(1, static_cast<long long>(count)));
  ctx.moment_raw_cache.put(moment, acc);
  return acc;
}

inline Poly to_raw(Context& ctx, const Poly& f) {
  std::map<SymId, Poly> repl;
  for (const auto& [m, c] : f.terms())
    for (const auto& [sym, e] : m.f)
      if (ctx.syms.info(sym).kind == SymKind::Moment && !repl.count(sym))
        repl.emplace(sym, moment_to_raw(ctx, sym));
  return repl.empty() ? f : f.subst(repl);
}

// <monomial> expanded back into expectation values and Weyl moments.
inline Poly raw_to_moment(Context& ctx, SymId raw) {
  if (auto hit = ctx.raw_moment_cache.find(raw)) return *hit;
  Poly out = expand_expectation(
      ctx, detail::op_from_multideg(ctx, detail::symbol_multideg(ctx, raw)));
  ctx.raw_moment_cache.put(raw, out);
  return out;
}

inline Poly from_raw(Context& ctx, const Poly& f) {
  std::map<SymId, Poly> repl;
  for (const auto& [m, c] : f.terms())
    for (const auto& [sym, e] : m.f)
      if (ctx.syms.info(sym).kind == SymKind::Raw && !repl.count(sym))
        repl.emplace(sym, raw_to_moment(ctx, sym));
  return repl.empty() ? f : f.subst(repl);
}

// {<A>, <B>} = <[A,B]>/(i hbar) on basic coordinates, a Lie-Poisson bracket.
inline Poly raw_bracket(Context& ctx, SymId u, SymId v) {
  auto key = std::make_pair(u, v);
  if (auto hit = ctx.raw_bracket_cache.find(key)) return *hit;
  NCPoly cu = detail::op_from_multideg(ctx, detail::symbol_multideg(ctx, u));
  NCPoly cv = detail::op_from_multideg(ctx, detail::symbol_multideg(ctx, v));
  NCPoly comm = commutator(ctx, cu, cv);
  NCPoly scaled(&ctx.syms, ctx.ngen());
  for (const auto& [m, c] : comm.terms())
    scaled.add_term(m, c.divide_by_ihbar(ctx.hbar_sym));
  Poly out = detail::rawify(ctx, scaled);
  ctx.raw_bracket_cache.put(key, out);
  return out;
}

// Quantum Poisson bracket on moment polynomials: lift to raw coordinates,
// apply the Leibniz extension of the basic bracket, convert back.  Exact and
// untruncated, so antisymmetry and the Jacobi identity hold identically.
inline Poly poisson_bracket(Context& ctx, const Poly& f, const Poly& g) {
  Poly fr = to_raw(ctx, f);
  Poly gr = to_raw(ctx, g);
  auto collect_vars = [&](const Poly& p) {
    std::vector<SymId> vars;
    for (const auto& [m, c] : p.terms())
      for (const auto& [sym, e] : m.f) {
        auto k = ctx.syms.info(sym).kind;
        if (k == SymKind::Expect || k == SymKind::Raw)
          if (std::find(vars.begin(), vars.end(), sym) == vars.end())
            vars.push_back(sym);
      }
    return vars;
  };
  Poly out(&ctx.syms);
  for (SymId u : collect_vars(fr)) {
    Poly df = fr.derivative(u);
    if (df.is_zero()) continue;
    for (SymId v : collect_vars(gr)) {
      Poly dg = gr.derivative(v);
      if (dg.is_zero()) continue;
      Poly br = raw_bracket(ctx, u, v);
      if (br.is_zero()) continue;
      out += df * dg * br;
    }
  }
  return from_raw(ctx, out);
}

// Semiclassical truncation: drop every term of half-order grade above the
// cut.  A degree-M moment counts M, each explicit hbar counts 2.
inline Poly truncate(const Poly& f, int half_order) {
  return f.truncate_grade(half_order);
}

// ---------------------------------------------------------------------------
// Numeric states
// ---------------------------------------------------------------------------

struct StatePoint {
  double hbar = 1.0;
  std::map<SymId, std::complex<double>> values;
  int order = 2;  // moments supplied up to this total degree

  void set(SymId s, std::complex<double> v) { values[s] = v; }
};

inline std::complex<double> evaluate(const Context& ctx, const Poly& f,
                                     const StatePoint& s) {
  std::function<std::complex<double>(SymId)> value_of =
      [&](SymId sym) -> std::complex<double> {
    const auto& info = ctx.syms.info(sym);
    switch (info.kind) {
      case SymKind::Hbar:
        return {s.hbar, 0.0};
      case SymKind::AuxSqrt:
        return std::sqrt(ctx.aux_def(info.aux).eval(value_of));
      default: {
        auto it = s.values.find(sym);
        if (it == s.values.end())
          throw MissingMoment("state point does not assign a value to " +
                              info.name);
        return it->second;
      }
    }
  };
  return f.eval(value_of);
}

// Right-hand sides {var, <H>} of the Hamiltonian flow, untruncated.
inline std::vector<std::pair<SymId, Poly>> hamiltonian_flow(
    Context& ctx, const NCPoly& hamiltonian, const std::vector<SymId>& vars) {
  Poly h = expand_expectation(ctx, hamiltonian);
  std::vector<std::pair<SymId, Poly>> out;
  out.reserve(vars.size());
  for (SymId v : vars)
    out.emplace_back(v, poisson_bracket(ctx, ctx.poly_sym(v), h));
  return out;
}

// All moment symbols of total degree in [2, max_degree].
inline std::vector<SymId> moment_basis(Context& ctx, int max_degree) {
  std::vector<SymId> out;
  std::vector<std::uint32_t> n(ctx.ngen(), 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
    if (pos == ctx.ngen()) {
      std::uint32_t tot = detail::multideg_total(n);
      if (tot >= 2) out.push_back(ctx.moment_sym(n));
      return;
    }
    for (int k = 0; k <= left; ++k) {
      n[pos] = static_cast<std::uint32_t>(k);
      rec(pos + 1, left - k);
    }
    n[pos] = 0;
  };
  rec(0, max_degree);
  std::sort(out.begin(), out.end(),
            [&](SymId a, SymId b) { return ctx.syms.less(a, b); });
  return out;
}

}  // namespace effmom
