#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bsdep/inf_convolution.hpp"

using namespace bsdep;

namespace {

GeneratorSpec h1_spec(Expr e, double f_t, double gamma, double rho, double sigma) {
    GeneratorSpec g;
    g.expr = std::move(e);
    g.assumption_class = AssumptionClass::H1;
    g.f_t = Expr::constant(f_t);
    g.coeffs.gamma = TimeFunction::constant(gamma);
    g.coeffs.rho = TimeFunction::constant(rho);
    g.coeffs.sigma = TimeFunction::constant(sigma);
    return g;
}

/// Brute-force dense 1-D oracle for f_n of a y-only driver.
double brute_force_fn_1d(const GeneratorSpec& spec, int n, double y, double radius,
                         int grid_points) {
    double best = eval_generator(spec, 0.0, y, {}, {}, MarkSpace{});
    for (int i = 0; i <= grid_points; ++i) {
        const double yp = y - radius + 2.0 * radius * i / grid_points;
        const double v =
            eval_generator(spec, 0.0, yp, {}, {}, MarkSpace{}) + n * std::abs(y - yp);
        best = std::min(best, v);
    }
    return best;
}

} // namespace

TEST_CASE("abs driver: f_1(2) = 2 by the triangle inequality") {
    const auto spec = h1_spec(Expr::abs(Expr::var_y()), 0.0, 1.0, 0.0, 0.0);
    InfConvParams params;
    params.search_box_radius = 4.0;
    const LipschitzApprox approx{&spec, 1, params};
    CHECK(inf_convolution(approx, 0.0, 2.0, {}, {}, MarkSpace{}) == doctest::Approx(2.0));
}

TEST_CASE("quadratic driver: closed-form minimum n y - n^2/4") {
    // f(y) = y^2, n = 2 at y = 2: minimizer y' = 1 gives 1 + 2*1 = 3
    const auto spec =
        h1_spec(Expr::mul(Expr::var_y(), Expr::var_y()), 0.0, 1.0, 0.0, 0.0);
    InfConvParams params;
    params.search_box_radius = 3.0;
    params.refinement_rounds = 10;
    const LipschitzApprox approx{&spec, 2, params};
    const double got = inf_convolution(approx, 0.0, 2.0, {}, {}, MarkSpace{});
    CHECK(got == doctest::Approx(3.0).epsilon(2e-3));
    CHECK(got <= 4.0); // never above f(2)

    // independent dense-grid oracle
    const double oracle = brute_force_fn_1d(spec, 2, 2.0, 3.0, 200000);
    CHECK(got == doctest::Approx(oracle).epsilon(2e-3));

    // n = 4 at y = 2: minimizer y' = 2 is interior, value ny - n^2/4 = 4 = f(2)
    const LipschitzApprox approx4{&spec, 4, params};
    CHECK(inf_convolution(approx4, 0.0, 2.0, {}, {}, MarkSpace{}) == doctest::Approx(4.0));
}

TEST_CASE("lipschitz driver is reproduced exactly once n >= L") {
    // sin has Lipschitz constant 1, so f_2 = f at every point, with no grid error
    const auto spec = h1_spec(Expr::sin(Expr::var_y()), 1.0, 1.0, 0.0, 0.0);
    const LipschitzApprox approx{&spec, 2, InfConvParams{}};
    CHECK(inf_convolution(approx, 0.0, 0.5, {}, {}, MarkSpace{}) ==
          doctest::Approx(std::sin(0.5)).epsilon(1e-12));
}

TEST_CASE("query domination and exact monotonicity via shared candidates") {
    const auto spec =
        h1_spec(Expr::mul(Expr::var_y(), Expr::var_y()), 0.0, 1.0, 0.0, 0.0);
    InfConvParams params;
    params.search_box_radius = 5.0;
    const int ns[] = {2, 4};
    const auto vals = inf_convolution_multi(spec, ns, params, 0.0, 2.0, {}, {}, MarkSpace{});
    REQUIRE(vals.size() == 2);
    CHECK(vals[0] <= vals[1]);          // exact monotonicity
    CHECK(vals[1] <= 4.0);              // f_n <= f(2) = 4 exactly
    CHECK(vals[0] == doctest::Approx(3.0).epsilon(5e-2));
    CHECK(vals[1] == doctest::Approx(4.0).epsilon(5e-2));

    CHECK_THROWS_AS(inf_convolution_multi(spec, std::vector<int>{4, 2}, params, 0.0, 2.0, {}, {},
                                          MarkSpace{}),
                    std::invalid_argument);
}

TEST_CASE("u-direction search uses the lambda-weighted metric") {
    // f(u) = |u_0| on a single mark with lambda = 4: the penalty distance for
    // moving u_0 by delta is n * sqrt(lambda) * delta = 2 n delta.
    GeneratorSpec g = h1_spec(Expr::abs(Expr::var_u(0)), 0.0, 0.0, 0.0, 1.0);
    const MarkSpace marks({1.0}, {4.0});
    InfConvParams params;
    params.search_box_radius = 3.0;
    params.refinement_rounds = 8;
    const LipschitzApprox approx{&g, 1, params};
    const double u[] = {1.0};
    // candidates: stay (value 1) or move to 0 paying n * 2 * 1 = 2 -> min is 1
    CHECK(inf_convolution(approx, 0.0, 0.0, {}, u, marks) == doctest::Approx(1.0).epsilon(1e-6));

    // with lambda = 0.25 the move to 0 costs only 0.5, so f_1 = 0.5
    const MarkSpace cheap({1.0}, {0.25});
    CHECK(inf_convolution(approx, 0.0, 0.0, {}, u, cheap) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("fn property report on a Lipschitz driver") {
    // f = sin(y) + sin(z); Lipschitz constant 1 in the weighted metric
    auto spec = h1_spec(Expr::add(Expr::sin(Expr::var_y()), Expr::sin(Expr::var_z(0))), 2.0, 1.0,
                        1.0, 0.0);
    SampleBox box;
    box.y = {-5.0, 5.0};
    box.z = {-5.0, 5.0};
    const int ns[] = {1, 2, 4};
    const auto rep = check_fn_properties(spec, MarkSpace{}, 1, ns, box, 200, InfConvParams{},
                                         1e-2, 1.0, 1e-3, 3);
    CHECK(rep.growth_ok);
    CHECK(rep.dominated_ok);
    CHECK(rep.monotone_ok);
    CHECK(rep.gap_decreasing_ok);
    CHECK(rep.gap_tol_ok);
    CHECK(rep.final_gap <= 1e-3);
    CHECK(rep.lipschitz_ok);
    CHECK(rep.all_passed());
}

TEST_CASE("fn property report sees a strict gap for a non-Lipschitz driver") {
    auto spec = h1_spec(Expr::sqrt_abs(Expr::min(Expr::abs(Expr::var_y()), Expr::constant(1.0))),
                        1.0, 0.0, 0.0, 0.0);
    SampleBox box;
    box.y = {-1.0, 1.0};
    const int ns[] = {2, 4, 8};
    const auto rep = check_fn_properties(spec, MarkSpace{}, 1, ns, box, 150, InfConvParams{},
                                         1e-2, 0.0, 1e-3, 5);
    CHECK(rep.dominated_ok);
    CHECK(rep.monotone_ok);
    CHECK(rep.gap_decreasing_ok);
    CHECK(rep.sup_gap.front() > 1e-3); // sqrt is not n-Lipschitz near 0 for small n
    CHECK(rep.sup_gap.back() < rep.sup_gap.front());
}

TEST_CASE("cached evaluation matches the direct path") {
    const auto spec =
        h1_spec(Expr::mul(Expr::var_y(), Expr::var_y()), 0.0, 1.0, 0.0, 0.0);
    InfConvParams params;
    params.search_box_radius = 3.0;
    CachedInfConvolution cached(spec, 2, params);
    const LipschitzApprox approx{&spec, 2, params};
    const double direct = inf_convolution(approx, 0.1, 2.0, {}, {}, MarkSpace{});
    CHECK(cached.eval(3, 0.1, 2.0, {}, {}, MarkSpace{}) == direct);
    CHECK(cached.eval(3, 0.1, 2.0, {}, {}, MarkSpace{}) == direct);
    CHECK(cached.cache_size() == 1);
    cached.eval(4, 0.1, 2.0, {}, {}, MarkSpace{});
    CHECK(cached.cache_size() == 2);
}

TEST_CASE("driver depending only on t needs no search") {
    auto spec = h1_spec(Expr::coeff(TimeFunction::exp_decay(2.0, 1.0), Expr::constant(1.0)), 2.0,
                        0.0, 0.0, 0.0);
    const LipschitzApprox approx{&spec, 1, InfConvParams{}};
    CHECK(inf_convolution(approx, 0.5, 7.0, {}, {}, MarkSpace{}) ==
          doctest::Approx(2.0 * std::exp(-0.5)).epsilon(1e-12));
}
