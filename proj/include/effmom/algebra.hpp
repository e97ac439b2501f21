#pragma once

#include <algorithm>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "effmom/context.hpp"
#include "effmom/error.hpp"
#include "effmom/ncpoly.hpp"

namespace effmom {

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

inline ContextPtr make_context(const std::vector<std::string>& generators,
                               const std::vector<std::string>& parameters) {
  auto ctx = std::make_shared<Context>();
  ctx->gens = generators;
  for (std::uint32_t i = 0; i < generators.size(); ++i)
    ctx->expect_syms.push_back(ctx->syms.expect(i, generators[i]));
  // Parameters keep declaration order so dumps are reproducible.
  std::uint32_t pi = 0;
  for (const auto& p : parameters) ctx->params[p] = ctx->syms.param(p, pi++);
  ctx->hbar_sym = ctx->syms.hbar();
  ctx->star_perm.resize(generators.size());
  for (std::uint32_t i = 0; i < generators.size(); ++i) ctx->star_perm[i] = i;
  std::size_t n = generators.size();
  ctx->bracket.assign(n, std::vector<BracketValue>(n));
  for (auto& row : ctx->bracket)
    for (auto& bv : row) {
      bv.central = Poly(&ctx->syms);
      bv.linear.assign(n, Poly(&ctx->syms));
    }
  return ctx;
}

// Installs [a_i, a_j] = value and its antisymmetric mirror.
inline void set_bracket(Context& ctx, std::uint32_t i, std::uint32_t j,
                        const BracketValue& value) {
  if (i == j && !value.is_zero())
    throw AlgebraInconsistent("[a,a] must vanish for generator " + ctx.gens[i]);
  ctx.bracket[i][j] = value;
  BracketValue neg;
  neg.central = -value.central;
  for (const auto& p : value.linear) neg.linear.push_back(-p);
  ctx.bracket[j][i] = neg;
}

// ---------------------------------------------------------------------------
// Validation: antisymmetry, coefficient form, Jacobi identity
// ---------------------------------------------------------------------------

inline void validate_algebra(const Context& ctx) {
  const std::size_t n = ctx.ngen();
  // Antisymmetry by table scan.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto& ij = ctx.bracket[i][j];
      const auto& ji = ctx.bracket[j][i];
      if (!(ij.central + ji.central).is_zero())
        throw AlgebraInconsistent("bracket table is not antisymmetric: [" +
                                  ctx.gens[i] + "," + ctx.gens[j] + "]");
      for (std::size_t k = 0; k < n; ++k)
        if (!(ij.linear[k] + ji.linear[k]).is_zero())
          throw AlgebraInconsistent("bracket table is not antisymmetric: [" +
                                    ctx.gens[i] + "," + ctx.gens[j] + "]");
    }
  // Every commutator coefficient carries at least one hbar; central terms are
  // exactly i*hbar times a real rational.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto& bv = ctx.bracket[i][j];
      auto check_hbar = [&](const Poly& p) {
        for (const auto& [m, c] : p.terms())
          if (m.exp_of(ctx.hbar_sym) == 0)
            throw AlgebraInconsistent(
                "bracket coefficient without hbar factor in [" + ctx.gens[i] +
                "," + ctx.gens[j] + "]");
      };
      check_hbar(bv.central);
      for (const auto& p : bv.linear) check_hbar(p);
      if (!bv.central.is_zero()) {
        for (const auto& [m, c] : bv.central.terms()) {
          bool pure_hbar = m.f.size() == 1 && m.f[0].first == ctx.hbar_sym &&
                           m.f[0].second == 1;
          if (!pure_hbar || c.re != 0)
            throw AlgebraInconsistent("central term of [" + ctx.gens[i] + "," +
                                      ctx.gens[j] +
                                      "] must be i*hbar times a rational");
        }
      }
    }
  // Jacobi, exhaustively over generator triples.  [[a_i,a_j],a_k] only needs
  // the table because brackets close linearly.
  auto bracket_with_gen = [&](const BracketValue& bv,
                              std::size_t k) -> BracketValue {
    BracketValue out;
    out.central = Poly(&ctx.syms);
    out.linear.assign(n, Poly(&ctx.syms));
    for (std::size_t l = 0; l < n; ++l) {
      if (bv.linear[l].is_zero()) continue;
      const auto& lk = ctx.bracket[l][k];
      out.central += bv.linear[l] * lk.central;
      for (std::size_t m = 0; m < n; ++m)
        out.linear[m] += bv.linear[l] * lk.linear[m];
    }
    return out;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        BracketValue s1 = bracket_with_gen(ctx.bracket[i][j], k);
        BracketValue s2 = bracket_with_gen(ctx.bracket[j][k], i);
        BracketValue s3 = bracket_with_gen(ctx.bracket[k][i], j);
        Poly central = s1.central + s2.central + s3.central;
        if (!central.is_zero())
          throw AlgebraInconsistent("Jacobi identity fails on (" + ctx.gens[i] +
                                    "," + ctx.gens[j] + "," + ctx.gens[k] + ")");
        for (std::size_t m = 0; m < n; ++m)
          if (!(s1.linear[m] + s2.linear[m] + s3.linear[m]).is_zero())
            throw AlgebraInconsistent("Jacobi identity fails on (" +
                                      ctx.gens[i] + "," + ctx.gens[j] + "," +
                                      ctx.gens[k] + ")");
      }
}

// ---------------------------------------------------------------------------
// Normal ordering (PBW rewriting)
// ---------------------------------------------------------------------------

// Rewrites an arbitrary word into the ordered-monomial basis.  Strategy:
// leftmost out-of-order adjacent pair is swapped, the commutator remainder
// recurses on strictly shorter words, so the rewriting terminates.
inline NCPoly normal_order_word(Context& ctx, const Word& w, bool centered) {
  const std::size_t n = w.size();
  std::size_t inv = n;
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (w[i] > w[i + 1]) {
      inv = i;
      break;
    }
  if (inv == n) {
    NCPoly r(&ctx.syms, ctx.ngen());
    r.add_term(NCMono::from_word(ctx.ngen(), w), ctx.poly_const(CRat(1)));
    return r;
  }
  if (auto hit = ctx.word_cache.find({centered, w})) return *hit;

  Word swapped = w;
  std::swap(swapped[inv], swapped[inv + 1]);
  NCPoly res = normal_order_word(ctx, swapped, centered);

  BracketValue bv = ctx.bracket_value(w[inv], w[inv + 1], centered);
  Word prefix(w.begin(), w.begin() + static_cast<long>(inv));
  Word suffix(w.begin() + static_cast<long>(inv) + 2, w.end());
  if (!bv.central.is_zero()) {
    Word uv = prefix;
    uv.insert(uv.end(), suffix.begin(), suffix.end());
    res += normal_order_word(ctx, uv, centered) * bv.central;
  }
  for (std::uint32_t k = 0; k < ctx.ngen(); ++k) {
    if (bv.linear[k].is_zero()) continue;
    Word ukv = prefix;
    ukv.push_back(k);
    ukv.insert(ukv.end(), suffix.begin(), suffix.end());
    res += normal_order_word(ctx, ukv, centered) * bv.linear[k];
  }
  ctx.word_cache.put({centered, w}, res);
  return res;
}

inline NCPoly normal_order(Context& ctx, const Word& w) {
  return normal_order_word(ctx, w, /*centered=*/false);
}

inline NCPoly nc_mul(Context& ctx, const NCPoly& a, const NCPoly& b,
                     bool centered = false) {
  if (a.table() && b.table() && a.table() != b.table())
    throw AlgebraMismatch("operator polynomials from different algebras");
  NCPoly r(&ctx.syms, ctx.ngen());
  for (const auto& [ma, ca] : a.terms())
    for (const auto& [mb, cb] : b.terms()) {
      Word w = ma.word();
      Word wb = mb.word();
      w.insert(w.end(), wb.begin(), wb.end());
      r += normal_order_word(ctx, w, centered) * (ca * cb);
    }
  return r;
}

inline NCPoly commutator(Context& ctx, const NCPoly& a, const NCPoly& b,
                         bool centered = false) {
  return nc_mul(ctx, a, b, centered) - nc_mul(ctx, b, a, centered);
}

// Antilinear involution: reverse each word, map generators through the star
// permutation, conjugate coefficients, reorder.
inline NCPoly star(Context& ctx, const NCPoly& a) {
  NCPoly r(&ctx.syms, ctx.ngen());
  for (const auto& [m, c] : a.terms()) {
    Word w = m.word();
    std::reverse(w.begin(), w.end());
    for (auto& g : w) g = ctx.star_perm[g];
    r += normal_order_word(ctx, w, /*centered=*/false) * c.conj_coeffs();
  }
  return r;
}

}  // namespace effmom
