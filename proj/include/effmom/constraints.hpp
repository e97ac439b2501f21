#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "effmom/algebra.hpp"
#include "effmom/context.hpp"
#include "effmom/moments.hpp"

namespace effmom {

// ---------------------------------------------------------------------------
// Constraint tower
// ---------------------------------------------------------------------------

struct ConstraintSet {
  NCPoly element;  // the constraint C itself
  int half_order = 2;
  std::vector<Poly> functions;                      // truncated, nonzero
  std::vector<std::vector<std::uint32_t>> labels;   // centered prefix degree
  std::vector<std::string> label_names;
};

namespace detail {

// Multidegrees of one total degree, earlier-generator-heavy first, matching
// the canonical moment order.
inline void multidegrees_of(std::size_t ngen, std::uint32_t degree,
                            std::vector<std::vector<std::uint32_t>>& out) {
  std::vector<std::uint32_t> n(ngen, 0);
  std::function<void(std::size_t, std::uint32_t)> rec = [&](std::size_t pos,
                                                            std::uint32_t left) {
    if (pos + 1 == ngen) {
      n[pos] = left;
      out.push_back(n);
      n[pos] = 0;
      return;
    }
    for (int k = static_cast<int>(left); k >= 0; --k) {
      n[pos] = static_cast<std::uint32_t>(k);
      rec(pos + 1, left - static_cast<std::uint32_t>(k));
    }
    n[pos] = 0;
  };
  if (ngen == 0) return;
  rec(0, degree);
}

inline std::string prefix_name(const Context& ctx,
                               const std::vector<std::uint32_t>& n) {
  std::uint32_t deg = 0;
  for (auto e : n) deg += e;
  if (deg == 0) return "1";
  std::string out;
  for (std::size_t g = 0; g < n.size(); ++g) {
    if (n[g] == 0) continue;
    if (!out.empty()) out += "*";
    out += "d" + ctx.gens[g];
    if (n[g] > 1) out += "^" + std::to_string(n[g]);
  }
  return out;
}

// The centered prefix (a_1 - <a_1>)^{n_1} ... as an operator element.
inline NCPoly centered_prefix(Context& ctx, const std::vector<std::uint32_t>& n) {
  NCPoly prod = NCPoly::identity(&ctx.syms, ctx.ngen());
  for (std::uint32_t g = 0; g < n.size(); ++g)
    for (std::uint32_t k = 0; k < n[g]; ++k) {
      NCPoly factor = NCPoly::generator(&ctx.syms, ctx.ngen(), g);
      factor -= NCPoly::identity(&ctx.syms, ctx.ngen()) *
                ctx.poly_sym(ctx.expect_syms[g]);
      prod = nc_mul(ctx, prod, factor);
    }
  return prod;
}

}  // namespace detail

// Truncated tower <prefix * C> = 0 over centered prefixes of degree
// 0 .. half_order-1; identically vanishing truncations are dropped.
inline ConstraintSet generate_constraints(Context& ctx, const NCPoly& c,
                                          int half_order) {
  if (half_order < 2) throw Error("half_order must be at least 2");
  ConstraintSet cs;
  cs.element = c;
  cs.half_order = half_order;
  for (std::uint32_t d = 0; d + 1 <= static_cast<std::uint32_t>(half_order);
       ++d) {
    std::vector<std::vector<std::uint32_t>> degs;
    detail::multidegrees_of(ctx.ngen(), d, degs);
    for (const auto& n : degs) {
      NCPoly prefixed = nc_mul(ctx, detail::centered_prefix(ctx, n), c);
      Poly fn = truncate(expand_expectation(ctx, prefixed), half_order);
      if (fn.is_zero()) continue;
      cs.functions.push_back(std::move(fn));
      cs.labels.push_back(n);
      cs.label_names.push_back(detail::prefix_name(ctx, n));
    }
  }
  return cs;
}

// ---------------------------------------------------------------------------
// First-class closure check
// ---------------------------------------------------------------------------

struct ClosurePair {
  std::size_t i = 0, j = 0;
  int residual_grade = 0;  // min grade of the irreducible remainder
  bool pass = false;
};

struct ClosureReport {
  bool pass = true;
  int half_order = 0;
  std::vector<ClosurePair> pairs;
};

namespace detail {

// Multivariate division by the constraint functions: repeatedly cancel the
// largest reducible term against a leading term.  The remainder's grade
// decides closure at the working order.
inline Poly reduce_modulo(Context& ctx, Poly b, const std::vector<Poly>& fs) {
  struct Lead {
    Mono mono;
    CRat coef;
    const Poly* f;
  };
  std::vector<Lead> leads;
  for (const auto& f : fs) {
    if (f.is_zero()) continue;
    auto it = f.terms().rbegin();
    leads.push_back({it->first, it->second, &f});
  }
  auto divides = [](const Mono& a, const Mono& b) {
    for (const auto& [sym, e] : a.f)
      if (b.exp_of(sym) < e) return false;
    return true;
  };
  auto total_deg = [](const Mono& m) {
    std::uint32_t d = 0;
    for (const auto& [sym, e] : m.f) d += e;
    return d;
  };
  for (;;) {
    bool reduced = false;
    for (auto it = b.terms().rbegin(); it != b.terms().rend(); ++it) {
      // Among all constraints whose lead divides this term, take the most
      // specific lead (largest total degree) so constant quotients win over
      // monomial ones.
      const Lead* best = nullptr;
      for (const auto& lead : leads) {
        if (!divides(lead.mono, it->first)) continue;
        if (!best || total_deg(lead.mono) > total_deg(best->mono)) best = &lead;
      }
      if (!best) continue;
      Poly quotient(&ctx.syms);
      Mono q;
      q.grade = it->first.grade - best->mono.grade;
      for (const auto& [sym, e] : it->first.f) {
        std::uint32_t le = best->mono.exp_of(sym);
        if (e > le) q.f.push_back({sym, e - le});
      }
      quotient.add_term(std::move(q), it->second / best->coef);
      b -= quotient * (*best->f);
      reduced = true;
      break;
    }
    if (!reduced) break;
  }
  return b;
}

}  // namespace detail

inline ClosureReport check_first_class(Context& ctx, const ConstraintSet& cs) {
  ClosureReport report;
  report.half_order = cs.half_order;
  for (std::size_t i = 0; i < cs.functions.size(); ++i)
    for (std::size_t j = i + 1; j < cs.functions.size(); ++j) {
      Poly b = poisson_bracket(ctx, cs.functions[i], cs.functions[j]);
      Poly rem = detail::reduce_modulo(ctx, std::move(b), cs.functions);
      ClosurePair pair;
      pair.i = i;
      pair.j = j;
      pair.residual_grade =
          rem.is_zero() ? std::numeric_limits<int>::max() : rem.min_grade();
      pair.pass = pair.residual_grade > cs.half_order;
      if (!pair.pass) report.pass = false;
      report.pairs.push_back(pair);
    }
  return report;
}

// ---------------------------------------------------------------------------
// Independent gauge flows at a numeric point
// ---------------------------------------------------------------------------

// All state variables of the truncated system: expectations plus moments up
// to the half order.
inline std::vector<SymId> state_variables(Context& ctx, int half_order) {
  std::vector<SymId> vars = ctx.expect_syms;
  auto moments = moment_basis(ctx, half_order);
  vars.insert(vars.end(), moments.begin(), moments.end());
  return vars;
}

inline int count_independent_flows(Context& ctx, const ConstraintSet& cs,
                                   const StatePoint& at,
                                   double surface_tol = 1e-9,
                                   double rank_tol = 1e-9) {
  if (cs.functions.empty()) return 0;
  for (std::size_t k = 0; k < cs.functions.size(); ++k) {
    double r = std::abs(evaluate(ctx, cs.functions[k], at));
    if (r > surface_tol)
      throw NotOnSurface("constraint " + cs.label_names[k] +
                         " has residual " + std::to_string(r));
  }
  auto vars = state_variables(ctx, cs.half_order);
  Eigen::MatrixXcd m(vars.size(), cs.functions.size());
  for (std::size_t v = 0; v < vars.size(); ++v)
    for (std::size_t k = 0; k < cs.functions.size(); ++k) {
      Poly flow = poisson_bracket(ctx, ctx.poly_sym(vars[v]), cs.functions[k]);
      m(static_cast<long>(v), static_cast<long>(k)) =
          evaluate(ctx, truncate(flow, cs.half_order), at);
    }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  auto sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (long i = 0; i < sv.size(); ++i)
    if (sv(i) > rank_tol * sv(0)) ++rank;
  return rank;
}

// ---------------------------------------------------------------------------
// Clock gauge
// ---------------------------------------------------------------------------

struct GaugeFixing {
  std::uint32_t clock = 0;  // generator index
  std::vector<std::pair<SymId, Poly>> conditions;  // moment -> fixed value

  std::map<SymId, Poly> as_map() const {
    std::map<SymId, Poly> m;
    for (const auto& [s, p] : conditions) m.emplace(s, p);
    return m;
  }
};

// <dX dA> = 0 for every centered word A: each moment carrying the clock is
// pinned to minus the lower-degree corrections of its Weyl expansion, i.e.
// conjugate pairings get -i*hbar/2 and commuting pairings get zero.
inline GaugeFixing clock_gauge_conditions(Context& ctx, std::uint32_t clock,
                                          int half_order) {
  if (clock >= ctx.ngen()) throw Error("clock generator out of range");
  GaugeFixing gf;
  gf.clock = clock;
  std::map<SymId, Poly> fixed;
  for (SymId m : moment_basis(ctx, half_order)) {
    const auto& info = ctx.syms.info(m);
    if (info.multideg[clock] == 0) continue;
    // Word: the clock first, the remaining centered factors in order.
    Word w;
    w.push_back(clock);
    std::vector<std::uint32_t> rest = info.multideg;
    --rest[clock];
    for (std::uint32_t g = 0; g < rest.size(); ++g)
      for (std::uint32_t k = 0; k < rest[g]; ++k) w.push_back(g);
    Poly expansion = weyl_from_ordered(ctx, w);
    // expansion = moment(m) + corrections; condition: moment = -corrections,
    // with previously fixed clock moments substituted into the corrections.
    Poly corrections = expansion - ctx.poly_sym(m);
    Poly rhs = (-corrections).subst(fixed);
    fixed.emplace(m, rhs);
    gf.conditions.emplace_back(m, std::move(rhs));
  }
  return gf;
}

}  // namespace effmom
