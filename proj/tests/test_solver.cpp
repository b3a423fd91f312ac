#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bsdep/solver.hpp"
#include "test_util.hpp"

using namespace bsdep;

namespace {

GeneratorSpec lipschitz_spec(Expr e, double gamma = 1.0, double rho = 1.0, double sigma = 1.0) {
    GeneratorSpec g;
    g.expr = std::move(e);
    g.assumption_class = AssumptionClass::A;
    g.coeffs.gamma = TimeFunction::constant(gamma);
    g.coeffs.rho = TimeFunction::constant(rho);
    g.coeffs.sigma = TimeFunction::constant(sigma);
    return g;
}

BSDEPProblem zero_driver_wt_problem(int n_steps) {
    BSDEPProblem prob;
    prob.terminal = TerminalSpec::brownian(0);
    prob.generator = lipschitz_spec(Expr::constant(0.0), 0.0, 0.0, 0.0);
    prob.grid = TimeGrid(1.0, n_steps);
    return prob;
}

SolverOptions default_options() {
    SolverOptions opts;
    opts.basis.degree = 2;
    opts.basis.ridge = 1e-8;
    return opts;
}

} // namespace

TEST_CASE("terminal spec evaluation and second moments") {
    const TimeGrid grid(1.0, 4);
    NoisePath path;
    path.dw = Array2D(4, 1);
    path.dw(0, 0) = 0.5;
    path.dw(2, 0) = -0.2;
    path.jumps = {{0.1, 0}, {0.9, 0}};

    CHECK(TerminalSpec::constant(3.0).eval(path, grid) == 3.0);
    CHECK(TerminalSpec::brownian(0).eval(path, grid) == doctest::Approx(0.3));
    CHECK(TerminalSpec::jump_count().eval(path, grid) == doctest::Approx(2.0));

    const MarkSpace marks({1.0}, {2.0});
    CHECK(TerminalSpec::brownian(0).second_moment_bound(grid, marks) == doctest::Approx(1.0));
    CHECK(TerminalSpec::jump_count().second_moment_bound(grid, marks) ==
          doctest::Approx(2.0 + 4.0));
}

TEST_CASE("zero driver with brownian terminal: martingale representation") {
    const auto prob = zero_driver_wt_problem(50);
    const auto ens = sample_ensemble(prob.grid, prob.marks, 1, 4000, 7);
    const auto sol = solve_backward(prob, ens, default_options());

    // terminal exactness, bit for bit
    for (std::size_t p = 0; p < ens.n_paths(); ++p)
        CHECK(sol.y(p, 50) == prob.terminal.eval(ens.paths[p], prob.grid));

    CHECK(std::abs(sol.y0) <= 3.0 * sol.diagnostics.y0_se);
    for (int k = 0; k < 50; ++k)
        CHECK(std::abs(sol.diagnostics.z_mean(k, 0) - 1.0) <=
              3.0 * sol.diagnostics.z_se(k, 0));

    // residual of the discrete equation stays inside its statistical band
    const auto res = backward_residual(prob, sol, ens);
    int failures = 0;
    for (std::size_t k = 0; k < res.mean.size(); ++k)
        if (std::abs(res.mean[k]) > 3.0 * res.se[k] + 1e-12) ++failures;
    CHECK(failures <= 1); // 3-sigma band: allow a stray node out of 50
}

TEST_CASE("ODE oracle: f(y) = -y with unit terminal") {
    BSDEPProblem prob;
    prob.terminal = TerminalSpec::constant(1.0);
    prob.generator = lipschitz_spec(Expr::neg(Expr::var_y()), 1.0, 0.0, 0.0);
    prob.grid = TimeGrid(1.0, 100);
    const auto ens = sample_ensemble(prob.grid, prob.marks, 1, 500, 3);
    const auto sol = solve_backward(prob, ens, default_options());
    CHECK(std::abs(sol.y0 - std::exp(-1.0)) < 0.01 * std::exp(-1.0));
    // deterministic data: the per-path estimator has zero spread
    CHECK(sol.diagnostics.y0_se < 1e-12);
}

TEST_CASE("jump-driven linear driver: f(u) = -int u dlambda with count terminal") {
    // closed form: Y_t = N_t, so y0 = 0 and U == 1
    BSDEPProblem prob;
    prob.terminal = TerminalSpec::jump_count();
    prob.generator = lipschitz_spec(Expr::neg(Expr::var_u_int()), 0.0, 0.0, 1.0);
    prob.grid = TimeGrid(1.0, 50);
    prob.marks = MarkSpace({1.0}, {1.0});
    const auto ens = sample_ensemble(prob.grid, prob.marks, 1, 4000, 21);
    const auto sol = solve_backward(prob, ens, default_options());
    CHECK(std::abs(sol.y0) <= 3.0 * sol.diagnostics.y0_se);

    double u_mean = 0.0;
    for (std::size_t p = 0; p < ens.n_paths(); ++p) u_mean += sol.u(p, 25, 0);
    u_mean /= static_cast<double>(ens.n_paths());
    CHECK(u_mean == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("picard: zero driver converges in one iteration to the backward solve") {
    const auto prob = zero_driver_wt_problem(20);
    const auto ens = sample_ensemble(prob.grid, prob.marks, 1, 500, 11);
    const auto direct = solve_backward(prob, ens, default_options());
    const auto picard = picard_solve(prob, ens, default_options(), 10, 1e-12);
    CHECK(picard.converged);
    CHECK(picard.iterations == 1);
    CHECK(picard.solution.y0 == direct.y0);
    REQUIRE(!picard.distance_trace.empty());
    CHECK(picard.distance_trace.back() == 0.0);
}

TEST_CASE("picard: contraction on f(y) = -y and agreement with backward") {
    BSDEPProblem prob;
    prob.terminal = TerminalSpec::constant(1.0);
    prob.generator = lipschitz_spec(Expr::neg(Expr::var_y()), 1.0, 0.0, 0.0);
    prob.grid = TimeGrid(1.0, 50);
    const auto ens = sample_ensemble(prob.grid, prob.marks, 1, 200, 5);

    const auto result = picard_solve(prob, ens, default_options(), 100, 0.0);
    CHECK(result.converged); // reaches the exact floating-point fixed point
    CHECK(std::abs(result.solution.y0 - std::exp(-1.0)) < 0.02);

    // geometric decay of the distance trace
    REQUIRE(result.distance_trace.size() >= 4);
    for (std::size_t i = 1; i + 1 < result.distance_trace.size(); ++i)
        if (result.distance_trace[i] > 1e-14)
            CHECK(result.distance_trace[i + 1] < 0.9 * result.distance_trace[i]);

    const auto direct = solve_backward(prob, ens, default_options());
    CHECK(result.solution.y0 == direct.y0); // same fixed point, bit for bit
}

TEST_CASE("picard: non-convergence is flagged, not thrown") {
    BSDEPProblem prob;
    prob.terminal = TerminalSpec::constant(1.0);
    prob.generator = lipschitz_spec(Expr::mul(Expr::constant(-20.0), Expr::var_y()), 20.0, 0.0, 0.0);
    prob.grid = TimeGrid(1.0, 10);
    const auto ens = sample_ensemble(prob.grid, prob.marks, 1, 100, 9);
    const auto result = picard_solve(prob, ens, default_options(), 3, 1e-12);
    CHECK_FALSE(result.converged);
    CHECK(result.iterations == 3);
}

TEST_CASE("minimal solution: Lipschitz driver reproduces the direct solve across n") {
    BSDEPProblem prob;
    prob.terminal = TerminalSpec::brownian(0);
    GeneratorSpec g = lipschitz_spec(Expr::sin(Expr::var_y()), 1.0, 0.0, 0.0);
    g.assumption_class = AssumptionClass::H1;
    g.f_t = Expr::constant(1.0);
    prob.generator = g;
    prob.grid = TimeGrid(1.0, 20);
    const auto ens = sample_ensemble(prob.grid, prob.marks, 1, 400, 13);

    const int ns[] = {1, 2, 4};
    const auto rep = minimal_solution(prob, ens, default_options(), ns, InfConvParams{});
    const auto direct = solve_backward(prob, ens, default_options());
    for (double y0 : rep.y0s)
        CHECK(y0 == doctest::Approx(direct.y0).epsilon(1e-9)); // f_n = f for n >= 1
    for (double frac : rep.mono_violation_fraction) CHECK(frac == 0.0);
}

TEST_CASE("minimal solution: sqrt driver stays at zero and sits below the quadratic solution") {
    BSDEPProblem prob;
    prob.terminal = TerminalSpec::constant(0.0);
    GeneratorSpec g;
    g.expr = Expr::sqrt_abs(Expr::min(Expr::abs(Expr::var_y()), Expr::constant(1.0)));
    g.assumption_class = AssumptionClass::H1;
    g.f_t = Expr::constant(1.0);
    g.coeffs.gamma = TimeFunction::constant(0.0);
    g.coeffs.rho = TimeFunction::constant(0.0);
    g.coeffs.sigma = TimeFunction::constant(0.0);
    prob.generator = g;
    prob.grid = TimeGrid(1.0, 20);
    const auto ens = sample_ensemble(prob.grid, prob.marks, 1, 200, 4);

    const int ns[] = {2, 4, 8};
    const auto rep = minimal_solution(prob, ens, default_options(), ns, InfConvParams{});
    for (double y0 : rep.y0s) CHECK(y0 == 0.0); // exactly zero at every n
    for (double frac : rep.mono_violation_fraction) CHECK(frac == 0.0);

    // the nonzero classical solution y(t) = (1-t)^2/4 also satisfies the
    // discrete equation up to its O(dt^2) truncation
    BSDEPSolution quad;
    quad.meta = rep.last.meta;
    quad.y = Array2D(ens.n_paths(), 21);
    quad.y_cond = Array2D(ens.n_paths(), 20);
    quad.z = Array3D(ens.n_paths(), 20, 1);
    quad.u = Array3D(ens.n_paths(), 20, 1);
    for (std::size_t p = 0; p < ens.n_paths(); ++p) {
        for (int k = 0; k <= 20; ++k) {
            const double t = prob.grid.node(k);
            quad.y(p, k) = 0.25 * (1.0 - t) * (1.0 - t);
            if (k < 20) quad.y_cond(p, k) = quad.y(p, k);
        }
    }
    const auto res = backward_residual(prob.generator, ens, quad.y, quad.y_cond, quad.z, quad.u);
    const double dt = prob.grid.dt();
    for (std::size_t k = 0; k < res.mean.size(); ++k)
        CHECK(std::abs(res.mean[k]) <= 3.0 * res.se[k] + dt * dt);

    const auto cmp = compare_solutions(rep.last, quad, 1e-10);
    CHECK(cmp.passed); // minimality: Y^n <= the other solution
}

TEST_CASE("comparison report: ordered constant drivers and the swapped negative control") {
    BSDEPProblem lower;
    lower.terminal = TerminalSpec::constant(0.0);
    lower.generator = lipschitz_spec(Expr::constant(-1.0), 0.0, 0.0, 0.0);
    lower.grid = TimeGrid(1.0, 50);
    BSDEPProblem upper = lower;
    upper.generator = lipschitz_spec(Expr::constant(1.0), 0.0, 0.0, 0.0);

    const auto ens = sample_ensemble(lower.grid, lower.marks, 1, 300, 2);
    const auto sol1 = solve_backward(lower, ens, default_options());
    const auto sol2 = solve_backward(upper, ens, default_options());

    // closed forms: -(1-t) and +(1-t), exactly
    CHECK(sol1.y0 == doctest::Approx(-1.0));
    CHECK(sol2.y0 == doctest::Approx(1.0));

    const auto identity = compare_solutions(sol1, sol1, 0.0);
    CHECK(identity.passed);
    CHECK(identity.violation_fraction == 0.0);

    const auto ordered = compare_solutions(sol1, sol2, 0.0);
    CHECK(ordered.passed);

    const auto swapped = compare_solutions(sol2, sol1, 0.0);
    CHECK_FALSE(swapped.passed);
    CHECK(swapped.interior_violation_fraction >= 0.99);
    CHECK(swapped.worst_violation == doctest::Approx(2.0));
}

TEST_CASE("truncated infinite horizon: exponential decay driver") {
    BSDEPProblem prob;
    prob.terminal = TerminalSpec::constant(0.0); // xi_tail = 0
    prob.generator = lipschitz_spec(Expr::coeff(TimeFunction::exp_decay(1.0, 1.0),
                                                Expr::sub(Expr::constant(1.0), Expr::var_y())),
                                    0.0, 0.0, 0.0);
    prob.generator.coeffs.gamma = TimeFunction::exp_decay(1.0, 1.0);
    prob.horizon_kind = HorizonKind::TruncatedInfinite;
    prob.schedule.horizons = {4.0, 8.0};
    prob.schedule.steps_per_unit = 128;

    const auto rep = solve_infinite_horizon(prob, 64, 1, 1, default_options(), 0.01);
    CHECK(rep.converged);
    const double target = 1.0 - std::exp(-1.0);
    CHECK(std::abs(rep.y0s.back() - target) < 0.01 * target);
    CHECK(rep.tails.back() == doctest::Approx(std::exp(-8.0)));

    // f == 0 keeps every truncation at zero
    BSDEPProblem zero = prob;
    zero.generator = lipschitz_spec(Expr::constant(0.0), 0.0, 0.0, 0.0);
    const auto zrep = solve_infinite_horizon(zero, 64, 1, 1, default_options(), 0.01);
    for (double v : zrep.y0s) CHECK(v == 0.0);

    // constant gamma violates (A4) and is rejected before solving
    BSDEPProblem bad = prob;
    bad.generator.coeffs.gamma = TimeFunction::constant(1.0);
    CHECK_THROWS_WITH_AS(solve_infinite_horizon(bad, 64, 1, 1, default_options(), 0.01),
                         doctest::Contains("(A4)"), std::invalid_argument);
}

TEST_CASE("regression machinery: rank deficiency raises a named error") {
    Eigen::MatrixXd x(8, 3);
    for (int i = 0; i < 8; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = static_cast<double>(i);
        x(i, 2) = 2.0 * static_cast<double>(i); // collinear
    }
    Eigen::VectorXd y = Eigen::VectorXd::Ones(8);
    CHECK_THROWS_AS(ridge_fit(x, y, 0.0, 17, "y"), RegressionError);
    try {
        ridge_fit(x, y, 0.0, 17, "y");
    } catch (const RegressionError& e) {
        CHECK(e.step() == 17);
        CHECK(std::string(e.what()).find("17") != std::string::npos);
    }
    CHECK_NOTHROW(ridge_fit(x, y, 1e-6, 17, "y"));

    RegressionBasis basis;
    basis.degree = 2;
    CHECK(feature_count(basis, 2) == 5);
    basis.cross_terms = true;
    CHECK(feature_count(basis, 2) == 6); // 1, x, y, x^2, xy, y^2
}
