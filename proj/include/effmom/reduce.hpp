#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "effmom/constraints.hpp"
#include "effmom/ratexpr.hpp"

namespace effmom {

struct SolveOptions {
  char branch = '+';
  double newton_tol = 1e-12;
  int newton_max_iter = 50;
  double newton_damping = 0.5;
};

// Solved constraint surface plus the residual-generator data.
struct ReducedSystem {
  int half_order = 2;
  char branch = '+';
  std::uint32_t clock = 0;
  GaugeFixing gauge;
  std::vector<SymId> eliminated_vars;
  std::map<SymId, RatExpr> eliminated;   // over the physical variables
  std::vector<SymId> physical_vars;
  std::vector<RatExpr> lambda;           // residual generator multipliers
  std::optional<RatExpr> c_ham;          // normal form: conjugate minus surface value
};

// The generator canonically paired with the clock: [clock, y] has a central
// part.
inline std::uint32_t conjugate_generator(const Context& ctx,
                                         std::uint32_t clock) {
  for (std::uint32_t y = 0; y < ctx.ngen(); ++y)
    if (y != clock && !ctx.bracket[clock][y].central.is_zero()) return y;
  throw DegenerateClock("clock " + ctx.gens[clock] +
                        " has no conjugate direction");
}

// Default elimination block: the conjugate expectation and every moment that
// carries the conjugate direction.
inline std::vector<SymId> default_eliminate(Context& ctx, std::uint32_t clock,
                                            int half_order) {
  std::uint32_t y = conjugate_generator(ctx, clock);
  std::vector<SymId> out{ctx.expect_syms[y]};
  for (SymId m : moment_basis(ctx, half_order))
    if (ctx.syms.info(m).multideg[y] > 0) out.push_back(m);
  return out;
}

namespace detail {

inline void require_consistent(Context& ctx, const ConstraintSet& cs) {
  for (std::size_t k = 0; k < cs.functions.size(); ++k)
    if (cs.functions[k].is_constant() && !cs.functions[k].is_zero())
      throw Inconsistent("constraint inconsistent: <" + cs.label_names[k] +
                         "*C> = " +
                         crat_to_string(cs.functions[k].constant_value()) +
                         " != 0");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Mode A: symbolic-perturbative solution, matched grade by grade
// ---------------------------------------------------------------------------

inline ReducedSystem solve_surface(Context& ctx, const ConstraintSet& cs,
                                   const GaugeFixing& gf,
                                   const std::vector<SymId>& eliminate,
                                   const StatePoint& seed,
                                   const SolveOptions& opt = {}) {
  detail::require_consistent(ctx, cs);
  if (eliminate.size() != cs.functions.size())
    throw Error("eliminate list has " + std::to_string(eliminate.size()) +
                " variables for " + std::to_string(cs.functions.size()) +
                " constraint functions");
  const int h = cs.half_order;

  // Series ansatz: one unknown per (variable, grade) slot.
  struct Slot {
    SymId var;
    int grade;
  };
  std::map<SymId, Slot> slot_of;           // unknown -> origin
  std::map<SymId, Poly> ansatz;            // variable -> sum of unknowns
  std::uint32_t counter = 0;
  for (SymId v : eliminate) {
    const auto& info = ctx.syms.info(v);
    int g0 = info.grade;
    Poly series(&ctx.syms);
    for (int g = g0; g <= h; ++g) {
      SymId u = ctx.syms.unknown(counter++, g,
                                 "u(" + info.name + "," + std::to_string(g) + ")");
      slot_of[u] = {v, g};
      series += ctx.poly_sym(u);
    }
    ansatz.emplace(v, std::move(series));
  }

  // Homogeneous grade components of every substituted constraint.
  std::vector<Poly> components;
  for (const auto& f : cs.functions) {
    Poly sub = f.subst(ansatz);
    for (int g = 0; g <= h; ++g) {
      Poly part = sub.grade_part(g);
      if (!part.is_zero()) components.push_back(std::move(part));
    }
  }
  // Unknowns never met by any component are unconstrained at working order
  // and stay at their classical value zero.
  std::map<SymId, bool> appears;
  for (const auto& comp : components)
    for (const auto& [m, c] : comp.terms())
      for (const auto& [sym, e] : m.f)
        if (ctx.syms.info(sym).kind == SymKind::Unknown) appears[sym] = true;

  auto unsolved_in = [&](const Poly& p) {
    std::vector<SymId> us;
    for (const auto& [m, c] : p.terms())
      for (const auto& [sym, e] : m.f)
        if (ctx.syms.info(sym).kind == SymKind::Unknown)
          if (std::find(us.begin(), us.end(), sym) == us.end())
            us.push_back(sym);
    return us;
  };

  std::map<SymId, RatExpr> solved;  // unknown -> expression
  bool branch_used = false;
  for (;;) {
    bool progress = false;
    // Lowest-grade single-unknown component first.
    std::size_t pick = components.size();
    for (std::size_t i = 0; i < components.size(); ++i) {
      if (components[i].is_zero()) continue;
      auto us = unsolved_in(components[i]);
      if (us.size() != 1) continue;
      if (pick == components.size() ||
          components[i].min_grade() < components[pick].min_grade())
        pick = i;
    }
    if (pick < components.size()) {
      Poly eq = components[pick];
      SymId u = unsolved_in(eq)[0];
      std::uint32_t deg = eq.degree_in(u);
      RatExpr sol;
      if (deg == 1) {
        Poly c1 = eq.coeff_of(u, 1);
        Poly c0 = eq.coeff_of(u, 0);
        sol = rat_normalize(ctx, -c0, c1);
      } else if (deg == 2) {
        Poly a = eq.coeff_of(u, 2);
        Poly b = eq.coeff_of(u, 1);
        Poly c = eq.coeff_of(u, 0);
        Poly disc = reduce_aux(ctx, b * b - a * c * CRat(4));
        if (disc.max_grade() != 0 || disc.min_grade() != 0)
          throw NoConvergence(
              "perturbative solve needs a graded root; discriminant is not "
              "classical");
        if (disc.contains_symbol_if([](const SymbolInfo& si) {
              return si.kind == SymKind::AuxSqrt;
            }))
          throw NoConvergence("nested algebraic roots are not supported");
        RatExpr root_plus, root_minus;
        if (disc.is_zero()) {
          root_plus = root_minus = rat_normalize(ctx, -b, a * CRat(2));
        } else {
          Poly s = sqrt_poly(ctx, disc);
          root_plus = rat_normalize(ctx, s - b, a * CRat(2));
          root_minus = rat_normalize(ctx, -s - b, a * CRat(2));
        }
        if (!branch_used) {
          branch_used = true;
          sol = (opt.branch == '-') ? root_minus : root_plus;
        } else {
          // Later roots are disambiguated against the seed.
          std::complex<double> target;
          try {
            target = evaluate(ctx, ctx.poly_sym(slot_of[u].var), seed);
          } catch (const MissingMoment&) {
            throw BranchAmbiguous("seed does not value " +
                                  ctx.syms.info(slot_of[u].var).name);
          }
          double dp = std::abs(rat_eval(ctx, root_plus, seed) - target);
          double dm = std::abs(rat_eval(ctx, root_minus, seed) - target);
          double scale = std::max({dp, dm, 1e-30});
          if (std::abs(dp - dm) <= 1e-9 * scale)
            throw BranchAmbiguous("seed is equidistant from both roots of " +
                                  ctx.syms.info(slot_of[u].var).name);
          sol = dp < dm ? root_plus : root_minus;
        }
      } else {
        throw NoConvergence("constraint component of degree " +
                            std::to_string(deg) +
                            " in a single unknown; cannot solve");
      }
      solved.emplace(u, sol);
      // Substitute everywhere and re-split into homogeneous parts.
      std::vector<Poly> next;
      std::map<SymId, RatExpr> one{{u, sol}};
      for (auto& comp : components) {
        if (comp.is_zero()) continue;
        Poly numerator = comp.contains_symbol(u)
                             ? reduce_aux(ctx, rat_subst(ctx, comp, one).num)
                             : comp;
        if (numerator.is_zero()) continue;
        for (int g = numerator.min_grade(); g <= h; ++g) {
          Poly part = numerator.grade_part(g);
          if (!part.is_zero()) next.push_back(std::move(part));
        }
      }
      components.swap(next);
      progress = true;
    }
    if (!progress) break;
  }

  // Anything left must be free of unknowns and identically zero.
  for (const auto& comp : components) {
    if (comp.is_zero()) continue;
    if (!unsolved_in(comp).empty())
      throw NoConvergence("perturbative solve is stuck: no component isolates "
                          "a single unknown");
    throw Inconsistent("constraint system has no solution at working order: " +
                       comp.to_string());
  }

  ReducedSystem rs;
  rs.half_order = h;
  rs.branch = opt.branch;
  rs.clock = gf.clock;
  rs.gauge = gf;
  rs.eliminated_vars = eliminate;
  for (SymId v : eliminate) {
    RatExpr total = rat_const(ctx, CRat(0));
    for (const auto& [u, slot] : slot_of) {
      if (slot.var != v) continue;
      auto it = solved.find(u);
      if (it != solved.end()) {
        total = rat_add(ctx, total, it->second);
      } else if (appears.count(u)) {
        throw NoConvergence("series coefficient " + ctx.syms.info(u).name +
                            " was never isolated");
      }
    }
    rs.eliminated.emplace(v, total);
  }

  // Physical variables: everything not eliminated and not gauge-fixed.
  auto gauge_map = gf.as_map();
  for (SymId v : state_variables(ctx, h)) {
    if (rs.eliminated.count(v) || gauge_map.count(v)) continue;
    rs.physical_vars.push_back(v);
  }

  // Residuals of the solved surface vanish at working order.
  for (std::size_t k = 0; k < cs.functions.size(); ++k) {
    RatExpr res = rat_subst(ctx, cs.functions[k], rs.eliminated);
    if (!rat_grade_truncate(ctx, res, h).is_zero())
      throw NoConvergence("surface residual survives truncation for <" +
                          cs.label_names[k] + "*C>");
  }
  return rs;
}

// ---------------------------------------------------------------------------
// Mode B: damped Newton iteration at a numeric point
// ---------------------------------------------------------------------------

struct NewtonResult {
  std::map<SymId, std::complex<double>> values;
  double residual = 0.0;
  int iterations = 0;
};

inline NewtonResult newton_solve(Context& ctx, const ConstraintSet& cs,
                                 const std::vector<SymId>& eliminate,
                                 const StatePoint& seed,
                                 const SolveOptions& opt = {}) {
  detail::require_consistent(ctx, cs);
  if (eliminate.size() != cs.functions.size())
    throw Error("eliminate list does not match the constraint count");
  const auto n = static_cast<long>(eliminate.size());

  // Symbolic Jacobian columns.
  std::vector<std::vector<Poly>> jac(cs.functions.size());
  for (std::size_t k = 0; k < cs.functions.size(); ++k)
    for (SymId v : eliminate) jac[k].push_back(cs.functions[k].derivative(v));

  StatePoint work = seed;
  auto residual_vec = [&](Eigen::VectorXcd& f) {
    for (std::size_t k = 0; k < cs.functions.size(); ++k)
      f(static_cast<long>(k)) = evaluate(ctx, cs.functions[k], work);
    return f.lpNorm<Eigen::Infinity>();
  };

  Eigen::VectorXcd f(n);
  double res = residual_vec(f);
  NewtonResult out;
  for (int iter = 0; iter < opt.newton_max_iter; ++iter) {
    if (res < opt.newton_tol) {
      for (std::size_t j = 0; j < eliminate.size(); ++j)
        out.values[eliminate[j]] = work.values.at(eliminate[j]);
      out.residual = res;
      out.iterations = iter;
      return out;
    }
    Eigen::MatrixXcd jm(n, n);
    for (long k = 0; k < n; ++k)
      for (long j = 0; j < n; ++j)
        jm(k, j) = evaluate(ctx, jac[static_cast<std::size_t>(k)]
                                    [static_cast<std::size_t>(j)],
                            work);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(jm);
    lu.setThreshold(1e-12);
    if (lu.rank() < n) {
      if (iter == 0)
        throw BranchAmbiguous(
            "seed Jacobian is singular; the starting point does not select a "
            "solution branch");
      throw NoConvergence("singular Jacobian during Newton iteration");
    }
    Eigen::VectorXcd dx = lu.solve(-f);
    if (!dx.allFinite()) throw NoConvergence("Newton step is not finite");

    double step = 1.0;
    std::map<SymId, std::complex<double>> saved;
    for (SymId v : eliminate) saved[v] = work.values.at(v);
    for (;;) {
      for (long j = 0; j < n; ++j)
        work.values[eliminate[static_cast<std::size_t>(j)]] =
            saved[eliminate[static_cast<std::size_t>(j)]] + step * dx(j);
      double new_res = residual_vec(f);
      if (new_res <= res || step < 1e-6) {
        res = new_res;
        break;
      }
      step *= opt.newton_damping;
    }
  }
  if (res < opt.newton_tol) {
    for (SymId v : eliminate) out.values[v] = work.values.at(v);
    out.residual = res;
    out.iterations = opt.newton_max_iter;
    return out;
  }
  throw NoConvergence("Newton iteration did not reach tolerance " +
                      std::to_string(opt.newton_tol));
}

// ---------------------------------------------------------------------------
// Residual generator
// ---------------------------------------------------------------------------

// Substitution carrying a moment polynomial onto the gauge-fixed constraint
// surface: gauge values substituted into the surface expressions first.
inline std::map<SymId, RatExpr> surface_gauge_map(Context& ctx,
                                                  const ReducedSystem& rs) {
  std::map<SymId, RatExpr> gmap;
  for (const auto& [s, p] : rs.gauge.conditions)
    gmap.emplace(s, rat_from_poly(ctx, p));
  std::map<SymId, RatExpr> out = gmap;
  for (const auto& [v, e] : rs.eliminated) {
    RatExpr num = rat_subst(ctx, e.num, gmap);
    RatExpr den = rat_subst(ctx, e.den, gmap);
    out[v] = rat_div(ctx, num, den);
  }
  return out;
}

namespace detail {

// Flow entries {f, F_k} restricted to the reduced manifold at working order.
inline std::vector<RatExpr> reduced_flow_row(
    Context& ctx, const Poly& f, const ConstraintSet& cs,
    const std::map<SymId, RatExpr>& on_surface, int h) {
  std::vector<RatExpr> row;
  row.reserve(cs.functions.size());
  for (const auto& fk : cs.functions) {
    Poly br = truncate(poisson_bracket(ctx, f, fk), h);
    row.push_back(rat_grade_truncate(ctx, rat_subst(ctx, br, on_surface), h));
  }
  return row;
}

}  // namespace detail

// Finds the combination of constraint functions whose flow preserves every
// gauge condition at working order, normalised to move the clock at unit
// rate.  Fills rs.lambda and the conjugate-direction normal form rs.c_ham.
inline void residual_generator(Context& ctx, const ConstraintSet& cs,
                               ReducedSystem& rs) {
  const int h = cs.half_order;
  const std::size_t nf = cs.functions.size();
  auto on_surface = surface_gauge_map(ctx, rs);

  // Rows: one per gauge condition, plus the clock normalisation.
  std::vector<std::vector<RatExpr>> a;
  std::vector<RatExpr> b;
  for (const auto& [s, rhs] : rs.gauge.conditions) {
    Poly g = ctx.poly_sym(s) - rhs;
    a.push_back(detail::reduced_flow_row(ctx, g, cs, on_surface, h));
    b.push_back(rat_const(ctx, CRat(0)));
  }
  a.push_back(detail::reduced_flow_row(
      ctx, ctx.poly_sym(ctx.expect_syms[rs.clock]), cs, on_surface, h));
  b.push_back(rat_const(ctx, CRat(1)));

  // Gauss-Jordan over the rational-function field.  Pivots prefer entries
  // with the lowest leading grade (classically invertible first).
  const std::size_t nrows = a.size();
  std::vector<long> pivot_row_of_col(nf, -1);
  std::vector<bool> row_used(nrows, false);
  for (std::size_t col = 0; col < nf; ++col) {
    long best = -1;
    int best_grade = 0;
    for (std::size_t r = 0; r < nrows; ++r) {
      if (row_used[r] || a[r][col].is_zero()) continue;
      int lead = a[r][col].num.min_grade() - a[r][col].den.min_grade();
      if (best < 0 || lead < best_grade) {
        best = static_cast<long>(r);
        best_grade = lead;
      }
    }
    if (best < 0) continue;  // free direction
    row_used[static_cast<std::size_t>(best)] = true;
    pivot_row_of_col[col] = best;
    const RatExpr pivot = a[static_cast<std::size_t>(best)][col];
    for (std::size_t r = 0; r < nrows; ++r) {
      if (static_cast<long>(r) == best || a[r][col].is_zero()) continue;
      RatExpr factor = rat_div(ctx, a[r][col], pivot);
      for (std::size_t c = 0; c < nf; ++c)
        a[r][c] = rat_sub(ctx, a[r][c],
                          rat_mul(ctx, factor, a[static_cast<std::size_t>(best)][c]));
      b[r] = rat_sub(ctx, b[r],
                     rat_mul(ctx, factor, b[static_cast<std::size_t>(best)]));
    }
  }

  // Consistency: an unused row with a surviving right-hand side means the
  // clock cannot be normalised against the residual flow.
  for (std::size_t r = 0; r < nrows; ++r) {
    if (row_used[r]) continue;
    if (!rat_grade_truncate(ctx, b[r], h).is_zero())
      throw NoResidualFlow(
          "gauge over-fixes the flow: no combination moves the clock at unit "
          "rate");
  }

  // Particular solution with free columns set to zero.
  std::vector<RatExpr> lambda(nf, rat_const(ctx, CRat(0)));
  for (std::size_t col = 0; col < nf; ++col) {
    long r = pivot_row_of_col[col];
    if (r < 0) continue;
    lambda[col] = rat_div(ctx, b[static_cast<std::size_t>(r)],
                          a[static_cast<std::size_t>(r)][col]);
  }

  // Free directions must not generate any motion on the reduced manifold,
  // otherwise the preferred flow is not unique.
  for (std::size_t free_col = 0; free_col < nf; ++free_col) {
    if (pivot_row_of_col[free_col] >= 0) continue;
    std::vector<RatExpr> mu(nf, rat_const(ctx, CRat(0)));
    mu[free_col] = rat_const(ctx, CRat(1));
    for (std::size_t col = 0; col < nf; ++col) {
      long r = pivot_row_of_col[col];
      if (r < 0) continue;
      mu[col] = rat_neg(rat_div(ctx, a[static_cast<std::size_t>(r)][free_col],
                                a[static_cast<std::size_t>(r)][col]));
    }
    for (SymId v : rs.physical_vars) {
      auto row = detail::reduced_flow_row(ctx, ctx.poly_sym(v), cs, on_surface, h);
      RatExpr flow = rat_const(ctx, CRat(0));
      for (std::size_t k = 0; k < nf; ++k)
        flow = rat_add(ctx, flow, rat_mul(ctx, mu[k], row[k]));
      if (!rat_grade_truncate(ctx, flow, h).is_zero())
        throw MultipleResidualFlows(
            "gauge conditions admit more than one residual flow direction (" +
            cs.label_names[free_col] + " moves " + ctx.syms.info(v).name + ")");
    }
  }

  rs.lambda = std::move(lambda);

  // Normal form pinned to the clock's conjugate direction.
  std::uint32_t y = conjugate_generator(ctx, rs.clock);
  SymId ysym = ctx.expect_syms[y];
  auto it = rs.eliminated.find(ysym);
  if (it != rs.eliminated.end())
    rs.c_ham = rat_sub(ctx, rat_from_poly(ctx, ctx.poly_sym(ysym)), it->second);
}

}  // namespace effmom
