#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bsdep/generator.hpp"
#include "bsdep/validators.hpp"

using namespace bsdep;

namespace {

GeneratorSpec spec_with(Expr e) {
    GeneratorSpec g;
    g.expr = std::move(e);
    g.coeffs.gamma = TimeFunction::constant(1.0);
    g.coeffs.rho = TimeFunction::constant(1.0);
    g.coeffs.sigma = TimeFunction::constant(1.0);
    return g;
}

} // namespace

TEST_CASE("time function values and closed-form integrals") {
    const auto c = TimeFunction::constant(2.0);
    CHECK(c(0.7) == 2.0);
    CHECK(c.integral(0.0, 3.0) == doctest::Approx(6.0));
    CHECK(std::isinf(c.tail_integral(1.0)));
    CHECK(TimeFunction::constant(0.0).tail_integral(1.0) == 0.0);

    const auto e = TimeFunction::exp_decay(1.0, 1.0);
    CHECK(e(0.0) == doctest::Approx(1.0));
    CHECK(e.integral(0.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)));
    CHECK(e.tail_integral(0.0) == doctest::Approx(1.0));
    CHECK(e.integral_square(0.0, 1.0) == doctest::Approx(0.5 * (1.0 - std::exp(-2.0))));

    const auto p = TimeFunction::power_decay(1.0, 2.0);
    CHECK(p(1.0) == doctest::Approx(0.25));
    CHECK(p.tail_integral(0.0) == doctest::Approx(1.0));
    CHECK(std::isinf(TimeFunction::power_decay(1.0, 1.0).tail_integral(0.0)));

    const auto pw = TimeFunction::piecewise({0.0, 1.0}, {2.0, 0.0});
    CHECK(pw(0.5) == 2.0);
    CHECK(pw(1.5) == 0.0);
    CHECK(pw.integral(0.0, 3.0) == doctest::Approx(2.0));
    CHECK(pw.tail_integral(0.5) == doctest::Approx(1.0));
}

TEST_CASE("driver evaluation on closed forms") {
    const MarkSpace marks({1.0}, {1.0});
    const double z1[] = {1.0};
    const double u1[] = {1.0};

    // f = 2y + z + int u dlambda
    const auto f1 = Expr::add(Expr::add(Expr::mul(Expr::constant(2.0), Expr::var_y()),
                                        Expr::var_z(0)),
                              Expr::var_u_int());
    CHECK(eval_generator(spec_with(f1), 0.0, 1.0, z1, u1, marks) == doctest::Approx(4.0));

    const auto f2 = Expr::abs(Expr::var_y());
    CHECK(eval_generator(spec_with(f2), 0.0, -3.0, {}, {}, MarkSpace{}) == doctest::Approx(3.0));

    // f = e^{-t} (1 - y)
    const auto f3 = Expr::coeff(TimeFunction::exp_decay(1.0, 1.0),
                                Expr::sub(Expr::constant(1.0), Expr::var_y()));
    CHECK(eval_generator(spec_with(f3), 0.0, 0.0, {}, {}, MarkSpace{}) == doctest::Approx(1.0));

    CHECK_THROWS_AS(eval_generator(spec_with(f2), 0.0, std::nan(""), {}, {}, MarkSpace{}),
                    std::invalid_argument);
}

TEST_CASE("expression json round trip and aggregates") {
    const auto j = nlohmann::json::parse(R"({
        "op": "add",
        "args": [
            {"op": "mul", "args": [2, {"var": "y"}]},
            {"var": "u_sq_int"},
            {"op": "clamp", "arg": {"var": "z", "index": 0}, "lo": -1, "hi": 1}
        ]
    })");
    const Expr e = Expr::from_json(j);
    const MarkSpace marks({2.0}, {3.0});
    Expr::Args a;
    a.y = 1.0;
    const double z[] = {5.0};
    const double u[] = {2.0};
    a.z = z;
    a.u = u;
    a.marks = &marks;
    CHECK(e.eval(a) == doctest::Approx(2.0 + 12.0 + 1.0));

    const Expr round = Expr::from_json(e.to_json());
    CHECK(round.eval(a) == doctest::Approx(e.eval(a)));

    const auto deps = e.deps();
    CHECK(deps.y);
    CHECK(deps.z);
    CHECK(deps.u);
    CHECK_FALSE(deps.t);
}

TEST_CASE("lipschitz validator (A2)") {
    const SampleBox box{{0.0, 1.0}, {-10.0, 10.0}, {-2.0, 2.0}, {0.0, 0.0}};

    // sin(y) + z is 1-Lipschitz in each argument
    auto ok = spec_with(Expr::add(Expr::sin(Expr::var_y()), Expr::var_z(0)));
    const auto rep = validate_lipschitz_A2(ok, MarkSpace{}, 1, box, 4000);
    CHECK(rep.passed);
    CHECK(rep.worst <= 1.0 + rep.tol);

    // y^2 on [-10, 10] violates a slope-1 bound
    auto quad = spec_with(Expr::mul(Expr::var_y(), Expr::var_y()));
    const auto rep2 = validate_lipschitz_A2(quad, MarkSpace{}, 1, box, 4000);
    CHECK_FALSE(rep2.passed);
    REQUIRE(rep2.witness.has_value());
    const auto& w = *rep2.witness;
    const double fa = eval_generator(quad, w.t, w.y, w.z, w.u, MarkSpace{});
    const double fb = eval_generator(quad, w.t, w.y2, w.z2, w.u, MarkSpace{});
    CHECK(std::abs(fa - fb) > (1.0 + rep2.tol) * w.rhs); // witness re-checks

    auto slope2 = spec_with(Expr::mul(Expr::constant(2.0), Expr::var_y()));
    CHECK_FALSE(validate_lipschitz_A2(slope2, MarkSpace{}, 1, box, 1000).passed);

    SampleBox degenerate = box;
    degenerate.y = {0.0, 0.0};
    degenerate.z = {0.0, 0.0};
    CHECK_THROWS_AS(validate_lipschitz_A2(ok, MarkSpace{}, 1, degenerate, 10),
                    std::invalid_argument);
}

TEST_CASE("jump monotonicity validator (A3)") {
    const MarkSpace marks({1.0}, {2.0});
    SampleBox box;
    box.u = {-2.0, 2.0};

    // f = int u beta dlambda with sigma == 1 and the same beta: equality
    auto identity = spec_with(Expr::mul(Expr::constant(1.0), Expr::var_u_int()));
    identity.kernel = JumpKernel{0.0, 1.0, MarkFunction::one_wedge(1.0)};
    // beta(1) = 1, so int u beta dlambda = u_0 * lambda_0 = u_int
    auto rep = validate_jump_monotone_A3(identity, marks, 1, box, 3000);
    CHECK(rep.passed);
    CHECK(std::abs(rep.worst) < 1e-10);

    // doubling the driver breaks the one-sided bound
    auto doubled = spec_with(Expr::mul(Expr::constant(2.0), Expr::var_u_int()));
    doubled.kernel = identity.kernel;
    const auto rep2 = validate_jump_monotone_A3(doubled, marks, 1, box, 3000);
    CHECK_FALSE(rep2.passed);
    CHECK(rep2.witness.has_value());

    // u-independent drivers pass in both orders
    auto flat = spec_with(Expr::sin(Expr::var_y()));
    flat.kernel = identity.kernel;
    CHECK(validate_jump_monotone_A3(flat, marks, 1, box, 1000).passed);
}

TEST_CASE("weak monotonicity validator (H2.1)") {
    SampleBox box;
    box.y = {-3.0, 3.0};

    // decreasing driver: left side <= 0
    auto cubic = spec_with(
        Expr::neg(Expr::mul(Expr::var_y(), Expr::mul(Expr::var_y(), Expr::var_y()))));
    cubic.varrho = Modulus{Modulus::Kind::Linear, 1.0, 0.5};
    CHECK(validate_weak_monotone_H2(cubic, MarkSpace{}, 1, box, 3000).passed);

    // f = e^{-t} y with varrho(x) = x: equality case
    auto linear = spec_with(Expr::coeff(TimeFunction::exp_decay(1.0, 1.0), Expr::var_y()));
    linear.coeffs.gamma = TimeFunction::exp_decay(1.0, 1.0);
    linear.varrho = Modulus{Modulus::Kind::Linear, 1.0, 0.5};
    const auto rep = validate_weak_monotone_H2(linear, MarkSpace{}, 1, box, 3000, 1e-9);
    CHECK(rep.passed);

    // f = sqrt(|y|) with varrho(x) = sqrt(x)
    auto root = spec_with(Expr::sqrt_abs(Expr::var_y()));
    root.varrho = Modulus{Modulus::Kind::Power, 1.0, 0.5};
    CHECK(validate_weak_monotone_H2(root, MarkSpace{}, 1, box, 3000).passed);

    // growing faster than the modulus fails
    auto steep = spec_with(Expr::mul(Expr::constant(3.0), Expr::var_y()));
    steep.varrho = Modulus{Modulus::Kind::Linear, 1.0, 0.5};
    CHECK_FALSE(validate_weak_monotone_H2(steep, MarkSpace{}, 1, box, 3000).passed);
}

TEST_CASE("growth validator (H1.2)") {
    SampleBox box;
    box.y = {-10.0, 10.0};

    auto sine = spec_with(Expr::sin(Expr::var_y()));
    sine.f_t = Expr::constant(1.0);
    sine.coeffs.gamma = TimeFunction::constant(0.0);
    sine.coeffs.rho = TimeFunction::constant(0.0);
    sine.coeffs.sigma = TimeFunction::constant(0.0);
    CHECK(validate_growth_H1(sine, MarkSpace{}, 1, box, 2000).passed);

    auto quad = spec_with(Expr::mul(Expr::var_y(), Expr::var_y()));
    quad.f_t = Expr::constant(0.0);
    const auto rep = validate_growth_H1(quad, MarkSpace{}, 1, box, 2000);
    CHECK_FALSE(rep.passed);
    REQUIRE(rep.witness.has_value());
    CHECK(rep.witness->lhs > rep.witness->rhs);

    auto decay = spec_with(Expr::coeff(TimeFunction::exp_decay(1.0, 1.0),
                                       Expr::sub(Expr::constant(1.0), Expr::var_y())));
    decay.f_t = Expr::coeff(TimeFunction::exp_decay(1.0, 1.0), Expr::constant(1.0));
    decay.coeffs.gamma = TimeFunction::exp_decay(1.0, 1.0);
    CHECK(validate_growth_H1(decay, MarkSpace{}, 1, box, 2000).passed);
}

TEST_CASE("moduli: shapes, growth, Osgood and concavity") {
    const Modulus lin{Modulus::Kind::Linear, 2.0, 0.5};
    CHECK(lin(0.0) == 0.0);
    CHECK(lin(1.5) == doctest::Approx(3.0));
    CHECK(lin.osgood_holds());
    CHECK(lin.is_concave());

    const Modulus xlog{Modulus::Kind::XLog, 1.0, 0.5};
    CHECK(xlog(0.0) == 0.0);
    CHECK(xlog(1.0) == doctest::Approx(1.0));
    CHECK(xlog(2.0) == doctest::Approx(1.0));
    CHECK(xlog(0.5) == doctest::Approx(0.5 * (1.0 - std::log(0.5))));
    CHECK(xlog.osgood_holds());

    const Modulus root{Modulus::Kind::Power, 1.0, 0.5};
    CHECK(root(4.0) == doctest::Approx(2.0));
    CHECK_FALSE(root.osgood_holds()); // sqrt fails the Osgood condition
    CHECK(root.is_concave());

    // H2 requires Osgood + concavity; sqrt must be rejected
    GeneratorSpec g = spec_with(Expr::var_y());
    g.assumption_class = AssumptionClass::H2;
    g.varrho = root;
    CHECK_THROWS_AS(g.validate(TimeGrid(1.0, 4), MarkSpace{}, 1), std::invalid_argument);
    g.varrho = lin;
    CHECK_NOTHROW(g.validate(TimeGrid(1.0, 4), MarkSpace{}, 1));
}

TEST_CASE("lemma phi bound") {
    // psi(x) = x + 1, K = 1, n = 2, x = 0: 1 <= 0 + psi(1) = 2
    const double zero[] = {0.0};
    auto affine = [](double x) { return x + 1.0; };
    auto rep = lemma_phi_bound(affine, 1.0, 2, zero);
    CHECK(rep.passed);

    // psi(x) = K (x + 1) at x = 2K/n
    const double k = 1.5;
    auto growth = [k](double x) { return k * (x + 1.0); };
    const double at[] = {2.0 * k / 4.0};
    CHECK(lemma_phi_bound(growth, k, 4, at).passed);

    // psi(x) = sqrt(x) + x with K = 1, n = 4, sweep [0, 10]
    auto mixed = [](double x) { return std::sqrt(x) + x; };
    std::vector<double> sweep;
    for (double x = 0.0; x <= 10.0; x += 0.1) sweep.push_back(x);
    CHECK(lemma_phi_bound(mixed, 1.0, 4, sweep).passed);

    CHECK_THROWS_AS(lemma_phi_bound(affine, 2.0, 3, zero), std::invalid_argument);
}

TEST_CASE("structural validation catches arity and integrability errors") {
    const TimeGrid grid(1.0, 4);
    const MarkSpace one_mark({1.0}, {1.0});

    GeneratorSpec g = spec_with(Expr::var_u(2));
    CHECK_THROWS_AS(g.validate(grid, one_mark, 1), std::invalid_argument);

    GeneratorSpec gz = spec_with(Expr::var_z(3));
    CHECK_THROWS_AS(gz.validate(grid, one_mark, 1), std::invalid_argument);

    // (A4) on the infinite horizon: constant gamma has a divergent tail
    CoefficientFns flat;
    flat.gamma = TimeFunction::constant(1.0);
    CHECK(std::isinf(flat.integrability_tail(0.0)));
    CoefficientFns decaying;
    decaying.gamma = TimeFunction::exp_decay(1.0, 1.0);
    CHECK(decaying.integrability_tail(0.0) == doctest::Approx(1.0));

    GeneratorSpec neg = spec_with(Expr::var_y());
    neg.coeffs.gamma = TimeFunction::constant(-1.0);
    CHECK_THROWS_AS(neg.validate(grid, one_mark, 1), std::invalid_argument);

    GeneratorSpec bad_ft = spec_with(Expr::var_y());
    bad_ft.f_t = Expr::constant(-0.5);
    CHECK_THROWS_AS(bad_ft.validate(grid, one_mark, 1), std::invalid_argument);

    JumpKernel bad_kernel{0.5, 1.0, MarkFunction::one_wedge(1.0)};
    CHECK_THROWS_AS(bad_kernel.validate(grid, one_mark), std::invalid_argument);
}
