#include "bsdep/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bsdep {

namespace {

double apply_g(TerminalTerm::GFn g, double x) {
    switch (g) {
    case TerminalTerm::GFn::Identity:
        return x;
    case TerminalTerm::GFn::Abs:
        return std::abs(x);
    case TerminalTerm::GFn::Square:
        return x * x;
    case TerminalTerm::GFn::Sin:
        return std::sin(x);
    }
    return x;
}

TerminalTerm::GFn g_from_string(const std::string& s) {
    if (s == "identity") return TerminalTerm::GFn::Identity;
    if (s == "abs") return TerminalTerm::GFn::Abs;
    if (s == "square") return TerminalTerm::GFn::Square;
    if (s == "sin") return TerminalTerm::GFn::Sin;
    throw std::invalid_argument("terminal: unknown transform '" + s + "'");
}

std::string g_to_string(TerminalTerm::GFn g) {
    switch (g) {
    case TerminalTerm::GFn::Identity:
        return "identity";
    case TerminalTerm::GFn::Abs:
        return "abs";
    case TerminalTerm::GFn::Square:
        return "square";
    case TerminalTerm::GFn::Sin:
        return "sin";
    }
    return "identity";
}

/// E[g(X)^2] bounds for X ~ N(0, v) and X ~ Poisson(r).
double gaussian_sq_moment(TerminalTerm::GFn g, double v) {
    switch (g) {
    case TerminalTerm::GFn::Identity:
    case TerminalTerm::GFn::Abs:
        return v;
    case TerminalTerm::GFn::Square:
        return 3.0 * v * v;
    case TerminalTerm::GFn::Sin:
        return 1.0;
    }
    return v;
}

double poisson_sq_moment(TerminalTerm::GFn g, double r) {
    switch (g) {
    case TerminalTerm::GFn::Identity:
    case TerminalTerm::GFn::Abs:
        return r + r * r;
    case TerminalTerm::GFn::Square:
        return r + 7.0 * r * r + 6.0 * r * r * r + r * r * r * r;
    case TerminalTerm::GFn::Sin:
        return 1.0;
    }
    return r + r * r;
}

} // namespace

TerminalSpec TerminalSpec::constant(double v) {
    TerminalTerm t;
    t.kind = TerminalTerm::Kind::Constant;
    t.value = v;
    return TerminalSpec{{t}};
}

TerminalSpec TerminalSpec::brownian(int component, double scale, TerminalTerm::GFn g) {
    TerminalTerm t;
    t.kind = TerminalTerm::Kind::Brownian;
    t.component = component;
    t.scale = scale;
    t.g = g;
    return TerminalSpec{{t}};
}

TerminalSpec TerminalSpec::jump_count(int mark, double scale, TerminalTerm::GFn g) {
    TerminalTerm t;
    t.kind = TerminalTerm::Kind::JumpCount;
    t.mark = mark;
    t.scale = scale;
    t.g = g;
    return TerminalSpec{{t}};
}

double TerminalSpec::eval(const NoisePath& path, const TimeGrid& grid) const {
    double acc = 0.0;
    for (const TerminalTerm& t : terms) {
        switch (t.kind) {
        case TerminalTerm::Kind::Constant:
            acc += t.value;
            break;
        case TerminalTerm::Kind::Brownian:
            acc += t.scale * apply_g(t.g, path.terminal_brownian(static_cast<std::size_t>(t.component)));
            break;
        case TerminalTerm::Kind::JumpCount:
            acc += t.scale * apply_g(t.g, path.jump_count_up_to(grid.horizon(), t.mark));
            break;
        }
    }
    return acc;
}

double TerminalSpec::second_moment_bound(const TimeGrid& grid, const MarkSpace& marks) const {
    double root_sum = 0.0;
    for (const TerminalTerm& t : terms) {
        double m2 = 0.0;
        switch (t.kind) {
        case TerminalTerm::Kind::Constant:
            m2 = t.value * t.value;
            break;
        case TerminalTerm::Kind::Brownian:
            m2 = t.scale * t.scale * gaussian_sq_moment(t.g, grid.horizon());
            break;
        case TerminalTerm::Kind::JumpCount: {
            const double rate = t.mark < 0
                                    ? marks.total_intensity()
                                    : marks.intensity(static_cast<std::size_t>(t.mark));
            m2 = t.scale * t.scale * poisson_sq_moment(t.g, rate * grid.horizon());
            break;
        }
        }
        root_sum += std::sqrt(m2);
    }
    return root_sum * root_sum;
}

TerminalSpec TerminalSpec::from_json(const nlohmann::json& j) {
    if (j.is_number()) return constant(j.get<double>());
    if (j.is_object() && j.contains("kind")) {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "sum") {
            TerminalSpec spec;
            for (const auto& term : j.at("terms")) {
                const TerminalSpec sub = from_json(term);
                spec.terms.insert(spec.terms.end(), sub.terms.begin(), sub.terms.end());
            }
            return spec;
        }
        if (kind == "constant") return constant(j.at("value").get<double>());
        if (kind == "brownian")
            return brownian(j.value("component", 0), j.value("scale", 1.0),
                            g_from_string(j.value("g", "identity")));
        if (kind == "jump_count")
            return jump_count(j.value("mark", -1), j.value("scale", 1.0),
                              g_from_string(j.value("g", "identity")));
        throw std::invalid_argument("terminal: unknown kind '" + kind + "'");
    }
    throw std::invalid_argument("terminal: expected number or object with 'kind'");
}

nlohmann::json TerminalSpec::to_json() const {
    nlohmann::json terms_json = nlohmann::json::array();
    for (const TerminalTerm& t : terms) {
        switch (t.kind) {
        case TerminalTerm::Kind::Constant:
            terms_json.push_back({{"kind", "constant"}, {"value", t.value}});
            break;
        case TerminalTerm::Kind::Brownian:
            terms_json.push_back({{"kind", "brownian"},
                                  {"component", t.component},
                                  {"scale", t.scale},
                                  {"g", g_to_string(t.g)}});
            break;
        case TerminalTerm::Kind::JumpCount:
            terms_json.push_back({{"kind", "jump_count"},
                                  {"mark", t.mark},
                                  {"scale", t.scale},
                                  {"g", g_to_string(t.g)}});
            break;
        }
    }
    return {{"kind", "sum"}, {"terms", terms_json}};
}

void TruncationSchedule::validate() const {
    if (horizons.empty())
        throw std::invalid_argument("truncation schedule: at least one horizon required");
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        if (!(horizons[i] > 0.0))
            throw std::invalid_argument("truncation schedule: horizons must be positive");
        if (i > 0 && !(horizons[i] > horizons[i - 1]))
            throw std::invalid_argument("truncation schedule: horizons must be increasing");
    }
    if (steps_per_unit < 1)
        throw std::invalid_argument("truncation schedule: steps_per_unit must be >= 1");
}

void BSDEPProblem::validate(int brownian_dim) const {
    generator.validate(grid, marks, brownian_dim);
    for (const TerminalTerm& t : terminal.terms) {
        if (t.kind == TerminalTerm::Kind::Brownian &&
            (t.component < 0 || t.component >= brownian_dim))
            throw std::invalid_argument("terminal: brownian component out of range");
        if (t.kind == TerminalTerm::Kind::JumpCount && t.mark >= static_cast<int>(marks.size()))
            throw std::invalid_argument("terminal: mark index out of range");
    }
    if (horizon_kind == HorizonKind::TruncatedInfinite) {
        schedule.validate();
        if (!std::isfinite(generator.coeffs.integrability_tail(0.0)))
            throw std::invalid_argument(
                "infinite horizon: coefficients violate (A4), the tail integral of "
                "gamma + rho^2 + sigma^2 diverges");
    }
}

nlohmann::json SolverDiagnostics::to_json() const {
    return {{"y0_se", y0_se},
            {"max_condition", max_condition},
            {"norm_s2_y", norm_s2_y},
            {"norm_h2_z", norm_h2_z},
            {"norm_l2_u", norm_l2_u},
            {"xi_second_moment_bound", xi_second_moment_bound}};
}

namespace {

/// Per-ensemble precomputation: Brownian levels, jump counts at nodes and
/// compensated jump increments per step and mark.
struct StateData {
    Array3D w;      // M x (N+1) x d
    Array2D count;  // M x (N+1)
    Array3D dmu;    // M x N x m
};

StateData precompute_state(const PathEnsemble& ens) {
    const std::size_t m_paths = ens.n_paths();
    const int n = ens.grid.n_steps();
    const int d = ens.brownian_dim;
    const std::size_t n_marks = ens.marks.size();
    const double dt = ens.grid.dt();

    StateData s;
    s.w = Array3D(m_paths, static_cast<std::size_t>(n) + 1, d);
    s.count = Array2D(m_paths, static_cast<std::size_t>(n) + 1);
    s.dmu = Array3D(m_paths, static_cast<std::size_t>(n), std::max<std::size_t>(n_marks, 1));

    for (std::size_t p = 0; p < m_paths; ++p) {
        const NoisePath& path = ens.paths[p];
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < d; ++j)
                s.w(p, k + 1, j) = s.w(p, k, j) + path.dw(k, j);

        std::size_t ev = 0;
        std::vector<int> step_counts(n_marks, 0);
        for (int k = 0; k < n; ++k) {
            const double t1 = ens.grid.node(k + 1);
            std::fill(step_counts.begin(), step_counts.end(), 0);
            while (ev < path.jumps.size() && path.jumps[ev].time <= t1) {
                ++step_counts[static_cast<std::size_t>(path.jumps[ev].mark)];
                ++ev;
            }
            s.count(p, k + 1) = s.count(p, k);
            for (std::size_t i = 0; i < n_marks; ++i) {
                s.count(p, k + 1) += step_counts[i];
                s.dmu(p, k, i) = step_counts[i] - ens.marks.intensity(i) * dt;
            }
        }
    }
    return s;
}

Eigen::MatrixXd state_matrix(const StateData& s, const PathEnsemble& ens,
                             const RegressionBasis& basis, int k) {
    const std::size_t m_paths = ens.n_paths();
    const int d = ens.brownian_dim;
    const bool with_count = basis.include_jump_count && !ens.marks.empty();
    Eigen::MatrixXd state(m_paths, d + (with_count ? 1 : 0));
    for (std::size_t p = 0; p < m_paths; ++p) {
        for (int j = 0; j < d; ++j) state(static_cast<Eigen::Index>(p), j) = s.w(p, k, j);
        if (with_count) state(static_cast<Eigen::Index>(p), d) = s.count(p, k);
    }
    return state;
}

double sample_sd(std::span<const double> xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return xs.size() > 1 ? std::sqrt(acc / static_cast<double>(xs.size() - 1)) : 0.0;
}

} // namespace

BSDEPSolution solve_backward_with_driver(const TerminalSpec& terminal, const DriverFn& driver,
                                         const PathEnsemble& ensemble,
                                         const SolverOptions& options) {
    options.basis.validate();
    const std::size_t m_paths = ensemble.n_paths();
    const int n = ensemble.grid.n_steps();
    const int d = ensemble.brownian_dim;
    const std::size_t n_marks = ensemble.marks.size();
    const double dt = ensemble.grid.dt();

    BSDEPSolution sol;
    sol.meta = {m_paths, n, d, n_marks, ensemble.seed, dt};
    sol.y = Array2D(m_paths, static_cast<std::size_t>(n) + 1);
    sol.y_cond = Array2D(m_paths, static_cast<std::size_t>(n));
    sol.z = Array3D(m_paths, static_cast<std::size_t>(n), d);
    sol.u = Array3D(m_paths, static_cast<std::size_t>(n), std::max<std::size_t>(n_marks, 1));
    sol.diagnostics.z_mean = Array2D(static_cast<std::size_t>(n), d);
    sol.diagnostics.z_se = Array2D(static_cast<std::size_t>(n), d);

    const StateData state = precompute_state(ensemble);

    for (std::size_t p = 0; p < m_paths; ++p)
        sol.y(p, static_cast<std::size_t>(n)) = terminal.eval(ensemble.paths[p], ensemble.grid);

    std::vector<double> driver_accum(m_paths, 0.0); // dt * sum of driver values per path
    std::vector<double> target(m_paths), zbuf(static_cast<std::size_t>(d)),
        ubuf(std::max<std::size_t>(n_marks, 1));

    for (int k = n - 1; k >= 0; --k) {
        const double t = ensemble.grid.node(k);
        const std::size_t ks = static_cast<std::size_t>(k);

        Eigen::MatrixXd features;
        const bool use_regression = k > 0;
        if (use_regression)
            features = build_features(options.basis, state_matrix(state, ensemble, options.basis, k));

        auto fit_or_mean = [&](std::span<const double> tgt, const std::string& label,
                               auto&& store) {
            if (!use_regression) {
                double mean = 0.0;
                for (double v : tgt) mean += v;
                mean /= static_cast<double>(m_paths);
                for (std::size_t p = 0; p < m_paths; ++p) store(p, mean);
                return;
            }
            Eigen::Map<const Eigen::VectorXd> tv(tgt.data(), static_cast<Eigen::Index>(tgt.size()));
            const FitResult fit = ridge_fit(features, tv, options.basis.ridge, k, label);
            sol.diagnostics.max_condition = std::max(sol.diagnostics.max_condition, fit.condition);
            const Eigen::VectorXd pred = features * fit.beta;
            for (std::size_t p = 0; p < m_paths; ++p)
                store(p, pred(static_cast<Eigen::Index>(p)));
        };

        // conditional mean of Y_{k+1}
        for (std::size_t p = 0; p < m_paths; ++p) target[p] = sol.y(p, ks + 1);
        fit_or_mean(target, "y", [&](std::size_t p, double v) { sol.y_cond(p, ks) = v; });

        // Z: correlation with the Brownian increment
        for (int j = 0; j < d; ++j) {
            for (std::size_t p = 0; p < m_paths; ++p)
                target[p] = sol.y(p, ks + 1) * ensemble.paths[p].dw(k, j) / dt;
            sol.diagnostics.z_mean(ks, j) = 0.0;
            for (double v : target) sol.diagnostics.z_mean(ks, j) += v;
            sol.diagnostics.z_mean(ks, j) /= static_cast<double>(m_paths);
            sol.diagnostics.z_se(ks, j) = sample_sd(target) / std::sqrt(static_cast<double>(m_paths));
            fit_or_mean(target, "z[" + std::to_string(j) + "]",
                        [&](std::size_t p, double v) { sol.z(p, ks, j) = v; });
        }

        // U: correlation with the compensated jump increments
        for (std::size_t i = 0; i < n_marks; ++i) {
            const double li = ensemble.marks.intensity(i);
            for (std::size_t p = 0; p < m_paths; ++p)
                target[p] = sol.y(p, ks + 1) * state.dmu(p, ks, i) / (li * dt);
            fit_or_mean(target, "u[" + std::to_string(i) + "]",
                        [&](std::size_t p, double v) { sol.u(p, ks, i) = v; });
        }

        // explicit driver step, with optional fixed-point sweeps
        for (std::size_t p = 0; p < m_paths; ++p) {
            for (int j = 0; j < d; ++j) zbuf[static_cast<std::size_t>(j)] = sol.z(p, ks, j);
            for (std::size_t i = 0; i < n_marks; ++i) ubuf[i] = sol.u(p, ks, i);
            const std::span<const double> zs{zbuf.data(), static_cast<std::size_t>(d)};
            const std::span<const double> us{ubuf.data(), n_marks};

            double f_val = driver(k, static_cast<int>(p), t, sol.y_cond(p, ks), zs, us);
            double y_new = sol.y_cond(p, ks) + dt * f_val;
            for (int it = 0; it < options.implicit_iterations; ++it) {
                f_val = driver(k, static_cast<int>(p), t, y_new, zs, us);
                y_new = sol.y_cond(p, ks) + dt * f_val;
            }
            if (!std::isfinite(y_new))
                throw std::runtime_error("solve_backward: non-finite Y at step " +
                                         std::to_string(k));
            sol.y(p, ks) = y_new;
            driver_accum[p] += dt * f_val;
        }
    }

    double y0 = 0.0;
    for (std::size_t p = 0; p < m_paths; ++p) y0 += sol.y(p, 0);
    sol.y0 = y0 / static_cast<double>(m_paths);

    // y0 estimator: mean over paths of xi + dt * sum f (fitted values preserve
    // means), so its standard error comes from that per-path quantity.
    std::vector<double> g(m_paths);
    for (std::size_t p = 0; p < m_paths; ++p)
        g[p] = sol.y(p, static_cast<std::size_t>(n)) + driver_accum[p];
    sol.diagnostics.y0_se = sample_sd(g) / std::sqrt(static_cast<double>(m_paths));

    sol.diagnostics.norm_s2_y = estimate_norm_s2(sol.y);
    sol.diagnostics.norm_h2_z = estimate_norm_h2(sol.z, dt);
    if (n_marks > 0)
        sol.diagnostics.norm_l2_u = estimate_norm_l2_jump(sol.u, ensemble.marks, dt);
    return sol;
}

BSDEPSolution solve_backward(const BSDEPProblem& problem, const PathEnsemble& ensemble,
                             const SolverOptions& options) {
    if (!(problem.grid == ensemble.grid) || !(problem.marks == ensemble.marks))
        throw std::invalid_argument("solve_backward: ensemble grid/marks do not match the problem");
    problem.validate(ensemble.brownian_dim);

    const GeneratorSpec& gen = problem.generator;
    const MarkSpace& marks = problem.marks;
    const DriverFn driver = [&gen, &marks](int, int, double t, double y,
                                           std::span<const double> z,
                                           std::span<const double> u) {
        return eval_generator(gen, t, y, z, u, marks);
    };
    BSDEPSolution sol = solve_backward_with_driver(problem.terminal, driver, ensemble, options);
    sol.diagnostics.xi_second_moment_bound =
        problem.terminal.second_moment_bound(problem.grid, problem.marks);
    return sol;
}

namespace {

/// B^2 distance between two solutions on the same ensemble.
double b2_distance(const BSDEPSolution& a, const BSDEPSolution& b, const MarkSpace& marks,
                   double dt) {
    Array2D dy(a.y.rows(), a.y.cols());
    for (std::size_t p = 0; p < a.y.rows(); ++p)
        for (std::size_t k = 0; k < a.y.cols(); ++k) dy(p, k) = a.y(p, k) - b.y(p, k);
    Array3D dz(a.z.dim0(), a.z.dim1(), a.z.dim2());
    for (std::size_t p = 0; p < a.z.dim0(); ++p)
        for (std::size_t k = 0; k < a.z.dim1(); ++k)
            for (std::size_t j = 0; j < a.z.dim2(); ++j)
                dz(p, k, j) = a.z(p, k, j) - b.z(p, k, j);
    double total = estimate_norm_s2(dy) + estimate_norm_h2(dz, dt);
    if (!marks.empty()) {
        Array3D du(a.u.dim0(), a.u.dim1(), a.u.dim2());
        for (std::size_t p = 0; p < a.u.dim0(); ++p)
            for (std::size_t k = 0; k < a.u.dim1(); ++k)
                for (std::size_t i = 0; i < a.u.dim2(); ++i)
                    du(p, k, i) = a.u(p, k, i) - b.u(p, k, i);
        total += estimate_norm_l2_jump(du, marks, dt);
    }
    return std::sqrt(total);
}

} // namespace

PicardResult picard_solve(const BSDEPProblem& problem, const PathEnsemble& ensemble,
                          const SolverOptions& options, int max_iter, double tol) {
    if (max_iter < 1) throw std::invalid_argument("picard_solve: max_iter must be >= 1");
    if (tol < 0.0) throw std::invalid_argument("picard_solve: tol must be >= 0");
    if (!(problem.grid == ensemble.grid) || !(problem.marks == ensemble.marks))
        throw std::invalid_argument("picard_solve: ensemble grid/marks do not match the problem");
    problem.validate(ensemble.brownian_dim);

    const GeneratorSpec& gen = problem.generator;
    const MarkSpace& marks = problem.marks;
    const std::size_t n_marks = marks.size();
    const int d = ensemble.brownian_dim;

    PicardResult result;

    // initial sweep: driver frozen at the zero triple
    std::vector<double> zeros_z(static_cast<std::size_t>(d), 0.0);
    std::vector<double> zeros_u(std::max<std::size_t>(n_marks, 1), 0.0);
    const DriverFn zero_driver = [&](int, int, double t, double, std::span<const double>,
                                     std::span<const double>) {
        return eval_generator(gen, t, 0.0,
                              {zeros_z.data(), static_cast<std::size_t>(d)},
                              {zeros_u.data(), n_marks}, marks);
    };
    BSDEPSolution prev =
        solve_backward_with_driver(problem.terminal, zero_driver, ensemble, options);

    for (int iter = 1; iter <= max_iter; ++iter) {
        const BSDEPSolution& frozen = prev;
        const DriverFn driver = [&](int k, int p, double t, double, std::span<const double>,
                                    std::span<const double>) {
            const std::size_t ps = static_cast<std::size_t>(p);
            const std::size_t ks = static_cast<std::size_t>(k);
            return eval_generator(gen, t, frozen.y_cond(ps, ks), frozen.z.inner(ps, ks),
                                  frozen.u.inner(ps, ks).first(n_marks), marks);
        };
        BSDEPSolution next =
            solve_backward_with_driver(problem.terminal, driver, ensemble, options);
        const double dist = b2_distance(next, prev, marks, ensemble.grid.dt());
        result.distance_trace.push_back(dist);
        prev = std::move(next);
        if (dist <= tol) {
            result.converged = true;
            result.iterations = iter;
            break;
        }
        result.iterations = iter;
    }

    prev.diagnostics.xi_second_moment_bound =
        problem.terminal.second_moment_bound(problem.grid, problem.marks);
    result.solution = std::move(prev);
    return result;
}

nlohmann::json MinimalSolutionReport::to_json() const {
    return {{"n_list", n_list},
            {"y0", y0s},
            {"y0_se", y0_ses},
            {"mono_violation_fraction", mono_violation_fraction},
            {"slack", slack}};
}

MinimalSolutionReport minimal_solution(const BSDEPProblem& problem, const PathEnsemble& ensemble,
                                       const SolverOptions& options, std::span<const int> n_list,
                                       const InfConvParams& params, double inf_conv_rounding) {
    if (n_list.empty()) throw std::invalid_argument("minimal_solution: n_list must be nonempty");
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1])
            throw std::invalid_argument("minimal_solution: n_list must be increasing");
    if (!(problem.grid == ensemble.grid) || !(problem.marks == ensemble.marks))
        throw std::invalid_argument("minimal_solution: ensemble grid/marks do not match");
    problem.validate(ensemble.brownian_dim);

    MinimalSolutionReport rep;
    rep.n_list.assign(n_list.begin(), n_list.end());

    std::vector<BSDEPSolution> sols;
    sols.reserve(n_list.size());
    for (int n : n_list) {
        CachedInfConvolution fn(problem.generator, n, params, inf_conv_rounding);
        const MarkSpace& marks = problem.marks;
        const DriverFn driver = [&fn, &marks](int k, int, double t, double y,
                                              std::span<const double> z,
                                              std::span<const double> u) {
            return fn.eval(k, t, y, z, u, marks);
        };
        sols.push_back(solve_backward_with_driver(problem.terminal, driver, ensemble, options));
        rep.y0s.push_back(sols.back().y0);
        rep.y0_ses.push_back(sols.back().diagnostics.y0_se);
    }

    // slack for the monotonicity statistics: a pooled-SE band
    double pooled = 0.0;
    for (double se : rep.y0_ses) pooled = std::max(pooled, se);
    rep.slack = 3.0 * pooled + 1e-10;
    for (std::size_t j = 0; j + 1 < sols.size(); ++j) {
        std::size_t violations = 0, total = 0;
        for (std::size_t p = 0; p < sols[j].y.rows(); ++p)
            for (std::size_t k = 0; k < sols[j].y.cols(); ++k) {
                ++total;
                if (sols[j].y(p, k) > sols[j + 1].y(p, k) + rep.slack) ++violations;
            }
        rep.mono_violation_fraction.push_back(static_cast<double>(violations) /
                                              static_cast<double>(total));
    }

    rep.last = std::move(sols.back());
    return rep;
}

nlohmann::json ComparisonReport::to_json() const {
    return {{"slack", slack},
            {"violation_fraction", violation_fraction},
            {"interior_violation_fraction", interior_violation_fraction},
            {"worst_violation", worst_violation},
            {"passed", passed}};
}

ComparisonReport compare_solutions(const BSDEPSolution& sol1, const BSDEPSolution& sol2,
                                   double slack) {
    if (!(sol1.meta == sol2.meta))
        throw std::invalid_argument("compare_solutions: solutions come from different ensembles");

    ComparisonReport rep;
    rep.slack = slack;
    const std::size_t m = sol1.y.rows();
    const std::size_t nodes = sol1.y.cols();
    rep.per_node_fraction.assign(nodes, 0.0);

    std::size_t violations = 0, interior_violations = 0;
    for (std::size_t k = 0; k < nodes; ++k) {
        std::size_t node_viol = 0;
        for (std::size_t p = 0; p < m; ++p) {
            const double gap = sol1.y(p, k) - sol2.y(p, k);
            if (gap > slack) {
                ++node_viol;
                rep.worst_violation = std::max(rep.worst_violation, gap - slack);
            }
        }
        rep.per_node_fraction[k] = static_cast<double>(node_viol) / static_cast<double>(m);
        violations += node_viol;
        if (k + 1 < nodes) interior_violations += node_viol;
    }
    rep.violation_fraction =
        static_cast<double>(violations) / static_cast<double>(m * nodes);
    rep.interior_violation_fraction =
        nodes > 1 ? static_cast<double>(interior_violations) /
                        static_cast<double>(m * (nodes - 1))
                  : 0.0;
    rep.passed = violations == 0;
    return rep;
}

ResidualReport backward_residual(const GeneratorSpec& generator, const PathEnsemble& ensemble,
                                 const Array2D& y, const Array2D& y_driver_args, const Array3D& z,
                                 const Array3D& u) {
    const std::size_t m_paths = ensemble.n_paths();
    const int n = ensemble.grid.n_steps();
    const double dt = ensemble.grid.dt();
    const std::size_t n_marks = ensemble.marks.size();
    const StateData state = precompute_state(ensemble);

    ResidualReport rep;
    rep.mean.assign(static_cast<std::size_t>(n), 0.0);
    rep.se.assign(static_cast<std::size_t>(n), 0.0);

    std::vector<double> r(m_paths);
    for (int k = 0; k < n; ++k) {
        const double t = ensemble.grid.node(k);
        const std::size_t ks = static_cast<std::size_t>(k);
        for (std::size_t p = 0; p < m_paths; ++p) {
            const double f_val = eval_generator(generator, t, y_driver_args(p, ks),
                                                z.inner(p, ks), u.inner(p, ks).first(n_marks),
                                                ensemble.marks);
            double mart = 0.0;
            for (std::size_t j = 0; j < z.dim2(); ++j)
                mart += z(p, ks, j) * ensemble.paths[p].dw(k, static_cast<std::size_t>(j));
            for (std::size_t i = 0; i < n_marks; ++i)
                mart += u(p, ks, i) * state.dmu(p, ks, i);
            r[p] = y(p, ks) - y(p, ks + 1) - dt * f_val + mart;
        }
        double mean = 0.0;
        for (double v : r) mean += v;
        mean /= static_cast<double>(m_paths);
        rep.mean[ks] = mean;
        rep.se[ks] = sample_sd(r) / std::sqrt(static_cast<double>(m_paths));
        rep.worst_abs_mean = std::max(rep.worst_abs_mean, std::abs(mean));
    }
    return rep;
}

ResidualReport backward_residual(const BSDEPProblem& problem, const BSDEPSolution& solution,
                                 const PathEnsemble& ensemble) {
    return backward_residual(problem.generator, ensemble, solution.y, solution.y_cond, solution.z,
                             solution.u);
}

nlohmann::json TruncationReport::to_json() const {
    return {{"horizons", horizons}, {"y0", y0s},     {"y0_se", y0_ses},
            {"diffs", diffs},       {"tails", tails}, {"tol", tol},
            {"converged", converged}};
}

TruncationReport solve_infinite_horizon(const BSDEPProblem& problem, int n_paths,
                                        int brownian_dim, std::uint64_t seed,
                                        const SolverOptions& options, double tol) {
    if (problem.horizon_kind != HorizonKind::TruncatedInfinite)
        throw std::invalid_argument("solve_infinite_horizon: problem is not truncated-infinite");
    problem.schedule.validate();
    if (!(tol > 0.0)) throw std::invalid_argument("solve_infinite_horizon: tol must be positive");

    // (A4) gate before any solving
    if (!std::isfinite(problem.generator.coeffs.integrability_tail(0.0)))
        throw std::invalid_argument(
            "infinite horizon: coefficients violate (A4), the tail integral of "
            "gamma + rho^2 + sigma^2 diverges");

    TruncationReport rep;
    rep.tol = tol;
    for (double t_star : problem.schedule.horizons) {
        const int steps = static_cast<int>(std::ceil(t_star * problem.schedule.steps_per_unit));
        BSDEPProblem truncated = problem;
        truncated.grid = TimeGrid(t_star, steps);
        truncated.horizon_kind = HorizonKind::Finite;
        const PathEnsemble ens =
            sample_ensemble(truncated.grid, problem.marks, brownian_dim, n_paths, seed);
        BSDEPSolution sol = solve_backward(truncated, ens, options);
        rep.horizons.push_back(t_star);
        rep.y0s.push_back(sol.y0);
        rep.y0_ses.push_back(sol.diagnostics.y0_se);
        rep.tails.push_back(problem.generator.coeffs.integrability_tail(t_star));
        if (rep.y0s.size() > 1)
            rep.diffs.push_back(std::abs(rep.y0s.back() - rep.y0s[rep.y0s.size() - 2]));
        if (t_star == problem.schedule.horizons.back()) rep.last = std::move(sol);
    }
    rep.converged = !rep.diffs.empty() && rep.diffs.back() < tol && rep.tails.back() < tol;
    return rep;
}

} // namespace bsdep
