#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bsdep/noise.hpp"
#include "test_util.hpp"

using namespace bsdep;

TEST_CASE("grid and mark space invariants") {
    CHECK_THROWS_AS(TimeGrid(0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(MarkSpace({0.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(MarkSpace({1.0}, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(MarkSpace({1.0}, {-2.0}), std::invalid_argument);

    const TimeGrid grid(1.0, 4);
    CHECK(grid.node(0) == 0.0);
    CHECK(grid.node(4) == 1.0);
    CHECK(grid.dt() == doctest::Approx(0.25));

    const MarkSpace marks({1.0, -0.5}, {2.0, 1.0});
    CHECK(marks.total_intensity() == doctest::Approx(3.0));
}

TEST_CASE("mean jump count matches the Poisson rate") {
    const TimeGrid grid(1.0, 4);
    const MarkSpace marks({1.0}, {2.0});
    const auto ens = sample_ensemble(grid, marks, 1, 10000, 42);

    std::vector<double> counts;
    counts.reserve(ens.n_paths());
    for (const auto& p : ens.paths) counts.push_back(static_cast<double>(p.jumps.size()));
    CHECK(std::abs(testutil::mean(counts) - 2.0) < 3.0 * std::sqrt(2.0 / 10000.0));
}

TEST_CASE("empty mark space gives a pure-diffusion ensemble") {
    const auto ens = sample_ensemble(TimeGrid(1.0, 10), MarkSpace{}, 1, 100, 7);
    for (const auto& p : ens.paths) CHECK(p.jumps.empty());
}

TEST_CASE("brownian increment variance is dt per component") {
    const TimeGrid grid(1.0, 10);
    const auto ens = sample_ensemble(grid, MarkSpace{}, 2, 10000, 3);
    for (int j = 0; j < 2; ++j) {
        std::vector<double> xs;
        xs.reserve(ens.n_paths() * 10);
        for (const auto& p : ens.paths)
            for (int k = 0; k < 10; ++k) xs.push_back(p.dw(k, j));
        CHECK(std::abs(testutil::mean(xs)) < 3.0 * testutil::se_of_mean(xs));
        CHECK(std::abs(testutil::variance(xs) - grid.dt()) < 3.0 * testutil::se_of_variance(xs));
    }
}

TEST_CASE("brownian scaling: k merged steps have variance k dt") {
    const TimeGrid grid(1.0, 12);
    const auto ens = sample_ensemble(grid, MarkSpace{}, 1, 8000, 11);
    const int merge = 3;
    std::vector<double> xs;
    for (const auto& p : ens.paths)
        for (int k = 0; k + merge <= 12; k += merge) {
            double s = 0.0;
            for (int i = 0; i < merge; ++i) s += p.dw(k + i, 0);
            xs.push_back(s);
        }
    CHECK(std::abs(testutil::variance(xs) - merge * grid.dt()) <
          3.0 * testutil::se_of_variance(xs));
}

TEST_CASE("regeneration is bit-identical and order-independent") {
    const TimeGrid grid(0.5, 6);
    const MarkSpace marks({0.5, 2.0}, {1.0, 0.5});
    const auto a = sample_ensemble(grid, marks, 2, 40, 1234);
    const auto b = sample_ensemble(grid, marks, 2, 40, 1234);
    for (std::size_t p = 0; p < 40; ++p) {
        for (std::size_t k = 0; k < 6; ++k)
            for (std::size_t j = 0; j < 2; ++j) CHECK(a.paths[p].dw(k, j) == b.paths[p].dw(k, j));
        REQUIRE(a.paths[p].jumps.size() == b.paths[p].jumps.size());
        for (std::size_t i = 0; i < a.paths[p].jumps.size(); ++i) {
            CHECK(a.paths[p].jumps[i].time == b.paths[p].jumps[i].time);
            CHECK(a.paths[p].jumps[i].mark == b.paths[p].jumps[i].mark);
        }
    }

    // a path's draws do not depend on how many other paths were generated
    const auto small = sample_ensemble(grid, marks, 2, 10, 1234);
    for (std::size_t p = 0; p < 10; ++p)
        for (std::size_t k = 0; k < 6; ++k)
            CHECK(small.paths[p].dw(k, 0) == a.paths[p].dw(k, 0));

    CHECK(a.scheme == "philox4x32-10/v1");
}

TEST_CASE("compensated integral of a zero integrand vanishes") {
    const TimeGrid grid(1.0, 10);
    const MarkSpace marks({1.0}, {1.0});
    const auto ens = sample_ensemble(grid, marks, 1, 50, 5);
    for (const auto& p : ens.paths)
        CHECK(compensated_integral(p, grid, marks, [](double, double) { return 0.0; }, 1.0) ==
              0.0);
}

TEST_CASE("compensated integral on a constructed two-jump path") {
    const TimeGrid grid(1.0, 10);
    const MarkSpace marks({1.0}, {1.0});
    NoisePath path;
    path.dw = Array2D(10, 1);
    path.jumps = {{0.3, 0}, {0.7, 0}};
    const double v =
        compensated_integral(path, grid, marks, [](double, double) { return 1.0; }, 1.0);
    CHECK(v == doctest::Approx(1.0)); // 2 jumps - compensator 1
}

TEST_CASE("martingale and isometry of the compensated integral") {
    const TimeGrid grid(1.0, 10);
    const MarkSpace marks({1.0}, {1.0});
    const auto ens = sample_ensemble(grid, marks, 1, 10000, 99);
    std::vector<double> xs;
    xs.reserve(ens.n_paths());
    for (const auto& p : ens.paths)
        xs.push_back(
            compensated_integral(p, grid, marks, [](double, double) { return 1.0; }, 1.0));
    CHECK(std::abs(testutil::mean(xs)) < 3.0 / std::sqrt(10000.0) * std::sqrt(1.0));
    CHECK(std::abs(testutil::variance(xs) - 1.0) < 3.0 * testutil::se_of_variance(xs));
}

TEST_CASE("norm estimates: exact constants and the Brownian H2 value") {
    const int n_paths = 10000, n_steps = 100;
    const TimeGrid grid(1.0, n_steps);

    // constant process: H2 squared norm is c^2 T exactly
    Array2D constant(32, n_steps, 3.0);
    CHECK(estimate_norm_h2(constant, grid.dt()) == doctest::Approx(9.0).epsilon(1e-12));

    // U == 1 over marks with total intensity 2: squared L2 norm is 2 exactly
    const MarkSpace marks({0.5, 2.0}, {1.0, 1.0});
    Array3D ones(32, n_steps, 2, 1.0);
    CHECK(estimate_norm_l2_jump(ones, marks, grid.dt()) == doctest::Approx(2.0).epsilon(1e-12));

    // Y_t = W_t: E int_0^T W_t^2 dt = T^2 / 2
    const auto ens = sample_ensemble(grid, MarkSpace{}, 1, n_paths, 17);
    Array2D w(n_paths, n_steps);
    std::vector<double> per_path(n_paths);
    for (int p = 0; p < n_paths; ++p) {
        double level = 0.0;
        double acc = 0.0;
        for (int k = 0; k < n_steps; ++k) {
            w(p, k) = level; // left endpoint
            acc += level * level * grid.dt();
            level += ens.paths[p].dw(k, 0);
        }
        per_path[p] = acc;
    }
    const double est = estimate_norm_h2(w, grid.dt());
    CHECK(est == doctest::Approx(testutil::mean(per_path)).epsilon(1e-12));
    CHECK(std::abs(est - 0.5) < 3.0 * testutil::se_of_mean(per_path));

    // S2 of a process with known per-path sup
    Array2D sup_test(3, 4);
    for (int k = 0; k < 4; ++k) {
        sup_test(0, k) = k == 2 ? -5.0 : 1.0;
        sup_test(1, k) = 2.0;
        sup_test(2, k) = 0.0;
    }
    CHECK(estimate_norm_s2(sup_test) == doctest::Approx((25.0 + 4.0 + 0.0) / 3.0));
}
