#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <random>

#include "effmom/moments.hpp"
#include "model_fixtures.hpp"

using namespace effmom;
using fixtures::ex;
using fixtures::mom;
using fixtures::particle;
using fixtures::particle_constraint;
using fixtures::sym;

namespace {

NCPoly gen(Context& ctx, std::uint32_t g) {
  return NCPoly::generator(&ctx.syms, ctx.ngen(), g);
}

// Small random moment polynomial with moments up to the given degree.
Poly random_moment_poly(Context& ctx, std::mt19937& rng, int max_moment_degree,
                        int terms = 2) {
  std::uniform_int_distribution<int> coef(-2, 2);
  std::uniform_int_distribution<int> pick(0, 3);
  auto moments = moment_basis(ctx, max_moment_degree);
  std::uniform_int_distribution<std::size_t> mi(0, moments.size() - 1);
  std::uniform_int_distribution<std::size_t> gi(0, ctx.ngen() - 1);
  Poly out(&ctx.syms);
  for (int t = 0; t < terms; ++t) {
    int c = coef(rng);
    if (c == 0) c = 1;
    Poly term = ctx.poly_const(CRat(Rat(c)));
    switch (pick(rng)) {
      case 0:
        term *= ctx.poly_sym(ctx.expect_syms[gi(rng)]);
        break;
      case 1:
        term *= ctx.poly_sym(moments[mi(rng)]);
        break;
      case 2:
        term *= ctx.poly_sym(moments[mi(rng)]) *
                ctx.poly_sym(ctx.expect_syms[gi(rng)]);
        break;
      default:
        term *= ctx.poly_sym(ctx.expect_syms[gi(rng)], 2);
        break;
    }
    out += term;
  }
  return out;
}

}  // namespace

TEST_CASE("expectation of linear and identity elements") {
  auto ctx = particle();
  REQUIRE(expand_expectation(*ctx, gen(*ctx, 2)) == sym(*ctx, ex(*ctx, "q")));
  REQUIRE(expand_expectation(*ctx, NCPoly::identity(&ctx->syms, 4)) ==
          ctx->poly_const(CRat(1)));
}

TEST_CASE("constraint expectation matches the moment expansion") {
  auto ctx = particle();
  Poly c = expand_expectation(*ctx, particle_constraint(*ctx));
  Poly expected = sym(*ctx, ex(*ctx, "pt"), 2) - sym(*ctx, ex(*ctx, "p"), 2) -
                  ctx->poly_sym(ctx->params.at("m"), 2) +
                  sym(*ctx, mom(*ctx, {"pt", "pt"})) -
                  sym(*ctx, mom(*ctx, {"p", "p"}));
  REQUIRE(c == expected);
  REQUIRE(c.to_string() == "pt^2 - p^2 - m^2 + D(pt,pt) - D(p,p)");
}

TEST_CASE("centered-prefix constraint function truncates to the known form") {
  auto ctx = particle();
  NCPoly dt = gen(*ctx, 0);
  dt -= NCPoly::identity(&ctx->syms, 4) * sym(*ctx, ex(*ctx, "t"));
  Poly ct = expand_expectation(
      *ctx, nc_mul(*ctx, dt, particle_constraint(*ctx)));
  Poly hbar = ctx->poly_sym(ctx->hbar_sym);

  Poly truncated = truncate(ct, 2);
  Poly expected = sym(*ctx, ex(*ctx, "pt")) * sym(*ctx, mom(*ctx, {"t", "pt"})) *
                      CRat(2) +
                  hbar * sym(*ctx, ex(*ctx, "pt")) * CRat::i() -
                  sym(*ctx, ex(*ctx, "p")) * sym(*ctx, mom(*ctx, {"t", "p"})) *
                      CRat(2);
  REQUIRE(truncated == expected);
  REQUIRE(truncated.to_string() ==
          "2*pt*D(t,pt) + i*hbar*pt - 2*p*D(t,p)");
  // The untruncated function carries third-order moments.
  REQUIRE(ct != truncated);
  REQUIRE((ct - truncated).min_grade() >= 3);
}

TEST_CASE("ordered centered words expand through Weyl moments") {
  auto ctx = particle();
  Poly ihbar_half = ctx->poly_sym(ctx->hbar_sym) * fixtures::ihalf();
  SECTION("<dt dpt> = D(t,pt) + i hbar/2") {
    Poly r = weyl_from_ordered(*ctx, {0, 1});
    REQUIRE(r == sym(*ctx, mom(*ctx, {"t", "pt"})) + ihbar_half);
  }
  SECTION("<dq dq> = D(q,q)") {
    REQUIRE(weyl_from_ordered(*ctx, {2, 2}) == sym(*ctx, mom(*ctx, {"q", "q"})));
  }
  SECTION("<dq dp dq> = D(q,q,p): palindromic corrections cancel") {
    REQUIRE(weyl_from_ordered(*ctx, {2, 3, 2}) ==
            sym(*ctx, mom(*ctx, {"q", "q", "p"})));
  }
}

TEST_CASE("moment and raw coordinates are two routes to one expectation") {
  auto ctx = particle();
  std::mt19937 rng(101);
  std::uniform_int_distribution<int> deg(0, 3);
  std::uniform_int_distribution<int> g(0, 3);
  std::uniform_int_distribution<int> coef(-2, 2);
  for (int k = 0; k < 12; ++k) {
    NCPoly a(&ctx->syms, 4);
    for (int t = 0; t < 3; ++t) {
      Word w;
      int d = deg(rng);
      for (int j = 0; j < d; ++j) w.push_back(static_cast<std::uint32_t>(g(rng)));
      int c = coef(rng);
      if (c == 0) c = 1;
      a += normal_order(*ctx, w) * ctx->poly_const(CRat(Rat(c)));
    }
    // Expanding into moments and lifting back to raw coordinates must agree
    // with reading the expectation off the ordered basis directly.
    REQUIRE(to_raw(*ctx, expand_expectation(*ctx, a)) ==
            raw_expectation(*ctx, a));
  }
}

TEST_CASE("moment -> raw -> moment round trip is the identity") {
  auto ctx = particle();
  for (SymId m : moment_basis(*ctx, 3)) {
    Poly f = ctx->poly_sym(m);
    REQUIRE(from_raw(*ctx, to_raw(*ctx, f)) == f);
  }
}

TEST_CASE("quantum Poisson bracket golden cases") {
  auto ctx = particle();
  SECTION("{<q>, <p>} = 1") {
    Poly b = poisson_bracket(*ctx, sym(*ctx, ex(*ctx, "q")),
                             sym(*ctx, ex(*ctx, "p")));
    REQUIRE(b == ctx->poly_const(CRat(1)));
  }
  SECTION("{<t>, <pt^2>} = 2<pt>") {
    Poly pt2 = expand_expectation(
        *ctx, nc_mul(*ctx, gen(*ctx, 1), gen(*ctx, 1)));
    Poly b = poisson_bracket(*ctx, sym(*ctx, ex(*ctx, "t")), pt2);
    REQUIRE(b == sym(*ctx, ex(*ctx, "pt")) * CRat(2));
  }
  SECTION("{D(q,q), D(p,p)} = 4 D(q,p)") {
    Poly b = poisson_bracket(*ctx, sym(*ctx, mom(*ctx, {"q", "q"})),
                             sym(*ctx, mom(*ctx, {"p", "p"})));
    REQUIRE(b == sym(*ctx, mom(*ctx, {"q", "p"})) * CRat(4));
  }
  SECTION("expectations commute with their own second moments here") {
    Poly b = poisson_bracket(*ctx, sym(*ctx, ex(*ctx, "pt")),
                             sym(*ctx, mom(*ctx, {"t", "pt"})));
    REQUIRE(b.is_zero());
  }
}

TEST_CASE("bracket is antisymmetric and satisfies Jacobi and Leibniz") {
  auto ctx = particle();
  std::mt19937 rng(211);
  for (int k = 0; k < 10; ++k) {
    Poly f = random_moment_poly(*ctx, rng, 3);
    Poly g = random_moment_poly(*ctx, rng, 3);
    REQUIRE((poisson_bracket(*ctx, f, g) + poisson_bracket(*ctx, g, f))
                .is_zero());
  }
  for (int k = 0; k < 4; ++k) {
    Poly f = random_moment_poly(*ctx, rng, 2);
    Poly g = random_moment_poly(*ctx, rng, 2);
    Poly h = random_moment_poly(*ctx, rng, 2);
    Poly s = poisson_bracket(*ctx, f, poisson_bracket(*ctx, g, h));
    s += poisson_bracket(*ctx, g, poisson_bracket(*ctx, h, f));
    s += poisson_bracket(*ctx, h, poisson_bracket(*ctx, f, g));
    REQUIRE(s.is_zero());
    REQUIRE(poisson_bracket(*ctx, f * g, h) ==
            f * poisson_bracket(*ctx, g, h) + g * poisson_bracket(*ctx, f, h));
  }
}

TEST_CASE("classical limit reproduces the structure constants") {
  auto ctx = fixtures::lie3();
  // {<a>, <b>} = <c> exactly; no moment or hbar corrections survive because
  // the generator bracket is linear.
  Poly b = poisson_bracket(*ctx, sym(*ctx, ex(*ctx, "a")),
                           sym(*ctx, ex(*ctx, "b")));
  REQUIRE(b == sym(*ctx, ex(*ctx, "c")));
}

TEST_CASE("semiclassical truncation grading") {
  auto ctx = particle();
  Poly hbar = ctx->poly_sym(ctx->hbar_sym);
  SECTION("products of second-order moments drop at half order 2") {
    Poly f = sym(*ctx, mom(*ctx, {"p", "p"})) * sym(*ctx, mom(*ctx, {"q", "p"}));
    REQUIRE(truncate(f, 2).is_zero());
    REQUIRE(truncate(f, 4) == f);
  }
  SECTION("grade-0 terms always survive") {
    Poly f = sym(*ctx, ex(*ctx, "pt"), 2) - sym(*ctx, ex(*ctx, "p"), 2) -
             ctx->poly_sym(ctx->params.at("m"), 2);
    REQUIRE(truncate(f, 0) == f);
  }
  SECTION("hbar counts two half-orders") {
    Poly f = hbar * sym(*ctx, ex(*ctx, "pt"));
    REQUIRE(truncate(f, 2) == f);
    REQUIRE(truncate(f, 1).is_zero());
  }
}

TEST_CASE("numeric evaluation of moment polynomials") {
  auto ctx = particle();
  Poly c = expand_expectation(*ctx, particle_constraint(*ctx));
  StatePoint s;
  s.hbar = 0.01;
  s.set(ex(*ctx, "t"), 0.0);
  s.set(ex(*ctx, "pt"), std::sqrt(1.25));
  s.set(ex(*ctx, "q"), 0.0);
  s.set(ex(*ctx, "p"), 0.5);
  s.set(ctx->params.at("m"), 1.0);
  s.set(mom(*ctx, {"pt", "pt"}), 0.001);
  s.set(mom(*ctx, {"p", "p"}), 0.001);
  REQUIRE(std::abs(evaluate(*ctx, c, s)) < 1e-15);

  Poly f = ctx->poly_sym(ctx->hbar_sym) * sym(*ctx, ex(*ctx, "pt")) * CRat::i();
  auto v = evaluate(*ctx, f, s);
  REQUIRE(v.real() == 0.0);
  REQUIRE(v.imag() == Catch::Approx(0.01 * std::sqrt(1.25)));

  Poly g = sym(*ctx, mom(*ctx, {"q", "q"}));
  REQUIRE_THROWS_AS(evaluate(*ctx, g, s), MissingMoment);
}

TEST_CASE("Hamiltonian flow of quadratic Hamiltonians") {
  auto ctx = fixtures::canonical_pair();
  NCPoly h = nc_mul(*ctx, gen(*ctx, 0), gen(*ctx, 0));
  h += nc_mul(*ctx, gen(*ctx, 1), gen(*ctx, 1));
  h = h * ctx->poly_const(CRat(Rat(1, 2)));  // (q^2 + p^2)/2

  std::vector<SymId> vars = {ex(*ctx, "q"), ex(*ctx, "p"),
                             mom(*ctx, {"q", "q"}), mom(*ctx, {"q", "p"}),
                             mom(*ctx, {"p", "p"})};
  auto flows = hamiltonian_flow(*ctx, h, vars);
  REQUIRE(flows[0].second == sym(*ctx, ex(*ctx, "p")));
  REQUIRE(flows[1].second == -sym(*ctx, ex(*ctx, "q")));
  REQUIRE(flows[2].second == sym(*ctx, mom(*ctx, {"q", "p"})) * CRat(2));
  REQUIRE(flows[3].second ==
          sym(*ctx, mom(*ctx, {"p", "p"})) - sym(*ctx, mom(*ctx, {"q", "q"})));
  REQUIRE(flows[4].second == -sym(*ctx, mom(*ctx, {"q", "p"})) * CRat(2));
  // Quadratic Hamiltonians close on degree <= 2 variables: truncation at
  // half order 2 is exact.
  for (const auto& [v, rhs] : flows) REQUIRE(truncate(rhs, 2) == rhs);
}

TEST_CASE("free-particle Ehrenfest flow with numeric mass") {
  auto ctx = fixtures::canonical_pair();
  NCPoly h = nc_mul(*ctx, gen(*ctx, 1), gen(*ctx, 1));
  h = h * ctx->poly_const(CRat(Rat(1, 4)));  // p^2 / (2m), m = 2
  auto flows = hamiltonian_flow(
      *ctx, h, {ex(*ctx, "q"), mom(*ctx, {"p", "p"})});
  REQUIRE(flows[0].second == sym(*ctx, ex(*ctx, "p")) * CRat(Rat(1, 2)));
  REQUIRE(flows[1].second.is_zero());
}
