#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "effmom/constraints.hpp"
#include "model_fixtures.hpp"

using namespace effmom;
using fixtures::ex;
using fixtures::mom;
using fixtures::particle;
using fixtures::particle_constraint;
using fixtures::sym;

namespace {

// Generic state on the truncated constraint surface, built from the
// closed-form branch-plus solution.  The clock moments stay away from the
// gauge slice so the point is not accidentally special.
StatePoint on_shell_point(Context& ctx, double m, double p, double dpp,
                          double dqq, double dqp, double hbar) {
  double e = std::sqrt(p * p + m * m);
  double big_e = e * (1.0 + m * m * dpp / (2.0 * e * e * e * e));
  std::complex<double> ih(0.0, hbar);
  std::complex<double> dtp(2e-4, 0.0), dtq(1e-4, 0.0), dtt(5e-5, 0.0);
  StatePoint s;
  s.hbar = hbar;
  s.set(ctx.params.at("m"), m);
  s.set(ex(ctx, "t"), 0.3);
  s.set(ex(ctx, "q"), 0.7);
  s.set(ex(ctx, "p"), p);
  s.set(ex(ctx, "pt"), big_e);
  s.set(mom(ctx, {"t", "t"}), dtt);
  s.set(mom(ctx, {"t", "q"}), dtq);
  s.set(mom(ctx, {"t", "p"}), dtp);
  s.set(mom(ctx, {"t", "pt"}), (p / big_e) * dtp - 0.5 * ih);
  s.set(mom(ctx, {"q", "q"}), dqq);
  s.set(mom(ctx, {"q", "p"}), dqp);
  s.set(mom(ctx, {"p", "p"}), dpp);
  s.set(mom(ctx, {"pt", "pt"}), p * p * dpp / (big_e * big_e));
  s.set(mom(ctx, {"pt", "p"}), p * dpp / big_e);
  s.set(mom(ctx, {"pt", "q"}), p * (dqp + 0.5 * ih) / big_e);
  return s;
}

}  // namespace

TEST_CASE("particle constraint tower at half order 2") {
  auto ctx = particle();
  ConstraintSet cs = generate_constraints(*ctx, particle_constraint(*ctx), 2);

  SECTION("exactly five nontrivial functions over fourteen variables") {
    REQUIRE(cs.functions.size() == 5);
    REQUIRE(state_variables(*ctx, 2).size() == 14);
    REQUIRE(cs.label_names ==
            std::vector<std::string>{"1", "dt", "dpt", "dq", "dp"});
  }
  SECTION("degree-0 function is the expectation of C") {
    REQUIRE(cs.functions[0].to_string() ==
            "pt^2 - p^2 - m^2 + D(pt,pt) - D(p,p)");
  }
  SECTION("clock-prefix function matches the truncated expansion") {
    REQUIRE(cs.functions[1].to_string() ==
            "2*pt*D(t,pt) + i*hbar*pt - 2*p*D(t,p)");
  }
  SECTION("remaining prefixes") {
    // <dq C> = 2 pt D(pt,q) - 2 p D(q,p) - i hbar p
    Poly cq = sym(*ctx, ex(*ctx, "pt")) * sym(*ctx, mom(*ctx, {"pt", "q"})) *
                  CRat(2) -
              sym(*ctx, ex(*ctx, "p")) * sym(*ctx, mom(*ctx, {"q", "p"})) *
                  CRat(2) -
              ctx->poly_sym(ctx->hbar_sym) * sym(*ctx, ex(*ctx, "p")) *
                  CRat::i();
    REQUIRE(cs.functions[3] == cq);
    // <dpt C> = 2 pt D(pt,pt) - 2 p D(pt,p)
    Poly cpt = sym(*ctx, ex(*ctx, "pt")) * sym(*ctx, mom(*ctx, {"pt", "pt"})) *
                   CRat(2) -
               sym(*ctx, ex(*ctx, "p")) * sym(*ctx, mom(*ctx, {"pt", "p"})) *
                   CRat(2);
    REQUIRE(cs.functions[2] == cpt);
    // <dp C> = 2 pt D(pt,p) - 2 p D(p,p)
    Poly cp = sym(*ctx, ex(*ctx, "pt")) * sym(*ctx, mom(*ctx, {"pt", "p"})) *
                  CRat(2) -
              sym(*ctx, ex(*ctx, "p")) * sym(*ctx, mom(*ctx, {"p", "p"})) *
                  CRat(2);
    REQUIRE(cs.functions[4] == cp);
  }
}

TEST_CASE("inconsistent constraint produces the constant function") {
  auto ctx = particle();
  ConstraintSet cs =
      generate_constraints(*ctx, NCPoly::identity(&ctx->syms, 4), 2);
  REQUIRE(cs.functions.size() == 1);
  REQUIRE(cs.functions[0] == ctx->poly_const(CRat(1)));
}

TEST_CASE("first-class closure of the particle tower") {
  auto ctx = particle();
  ConstraintSet cs = generate_constraints(*ctx, particle_constraint(*ctx), 2);

  SECTION("a hand-expanded pair: {C, C_t} = -2 C_dpt exactly") {
    Poly b = poisson_bracket(*ctx, cs.functions[0], cs.functions[1]);
    REQUIRE(b == cs.functions[2] * CRat(-2));
  }
  SECTION("all pairwise residuals exceed the working order") {
    ClosureReport rep = check_first_class(*ctx, cs);
    REQUIRE(rep.pass);
    for (const auto& pair : rep.pairs) REQUIRE(pair.residual_grade > 2);
  }
  SECTION("single function is trivially closed") {
    ConstraintSet one = cs;
    one.functions.resize(1);
    one.label_names.resize(1);
    one.labels.resize(1);
    REQUIRE(check_first_class(*ctx, one).pass);
  }
  SECTION("perturbing a function breaks closure") {
    ConstraintSet bad = cs;
    bad.functions[1] += sym(*ctx, ex(*ctx, "q"));
    ClosureReport rep = check_first_class(*ctx, bad);
    REQUIRE_FALSE(rep.pass);
  }
}

TEST_CASE("independent gauge flows at an on-shell point") {
  auto ctx = particle();
  ConstraintSet cs = generate_constraints(*ctx, particle_constraint(*ctx), 2);
  StatePoint at = on_shell_point(*ctx, 1.0, 0.5, 1e-6, 0.25, 0.0, 1e-3);

  SECTION("five constraints generate four flows") {
    REQUIRE(count_independent_flows(*ctx, cs, at) == 4);
  }
  SECTION("duplicated functions do not change the count") {
    ConstraintSet dup = cs;
    dup.functions.push_back(cs.functions[2]);
    dup.labels.push_back(cs.labels[2]);
    dup.label_names.push_back(cs.label_names[2]);
    REQUIRE(count_independent_flows(*ctx, dup, at) == 4);
  }
  SECTION("empty set has no flows") {
    ConstraintSet empty;
    empty.half_order = 2;
    REQUIRE(count_independent_flows(*ctx, empty, at) == 0);
  }
  SECTION("off-surface points are rejected") {
    StatePoint off = at;
    off.set(ex(*ctx, "pt"), 2.0);
    REQUIRE_THROWS_AS(count_independent_flows(*ctx, cs, off), NotOnSurface);
  }
}

TEST_CASE("clock gauge conditions") {
  auto ctx = particle();
  Poly zero(&ctx->syms);
  Poly minus_ihalf_hbar =
      ctx->poly_sym(ctx->hbar_sym) * CRat(Rat(0), Rat(-1, 2));

  SECTION("clock t pins all four t-moments") {
    GaugeFixing gf = clock_gauge_conditions(*ctx, 0, 2);
    REQUIRE(gf.conditions.size() == 4);
    auto m = gf.as_map();
    REQUIRE(m.at(mom(*ctx, {"t", "t"})) == zero);
    REQUIRE(m.at(mom(*ctx, {"t", "pt"})) == minus_ihalf_hbar);
    REQUIRE(m.at(mom(*ctx, {"t", "q"})) == zero);
    REQUIRE(m.at(mom(*ctx, {"t", "p"})) == zero);
  }
  SECTION("clock q mirrors the rule on the other pair") {
    GaugeFixing gf = clock_gauge_conditions(*ctx, 2, 2);
    auto m = gf.as_map();
    REQUIRE(m.at(mom(*ctx, {"q", "q"})) == zero);
    REQUIRE(m.at(mom(*ctx, {"q", "p"})) == minus_ihalf_hbar);
    REQUIRE(m.at(mom(*ctx, {"t", "q"})) == zero);
    REQUIRE(m.at(mom(*ctx, {"pt", "q"})) == zero);
  }
  SECTION("a commuting clock zeroes every clock moment") {
    auto ab = make_context({"a", "b"}, {});
    validate_algebra(*ab);
    GaugeFixing gf = clock_gauge_conditions(*ab, 0, 2);
    REQUIRE(gf.conditions.size() == 2);
    for (const auto& [s, rhs] : gf.conditions) REQUIRE(rhs.is_zero());
  }
  SECTION("higher order conditions eliminate every clock-bearing moment") {
    GaugeFixing gf = clock_gauge_conditions(*ctx, 0, 3);
    REQUIRE(gf.conditions.size() == 4 + 10);  // degree 2 and degree 3
    for (const auto& [s, rhs] : gf.conditions) {
      for (const auto& [m, c] : rhs.terms())
        for (const auto& [symid, e] : m.f) {
          const auto& info = ctx->syms.info(symid);
          if (info.kind == SymKind::Moment) REQUIRE(info.multideg[0] == 0);
        }
    }
  }
}
