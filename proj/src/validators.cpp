#include "bsdep/validators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bsdep/philox.hpp"

namespace bsdep {

namespace {

double width(const std::array<double, 2>& r) { return r[1] - r[0]; }

double draw_in(CounterRng& rng, const std::array<double, 2>& r) {
    return r[0] + (r[1] - r[0]) * rng.next_uniform();
}

std::vector<double> draw_vec(CounterRng& rng, const std::array<double, 2>& r, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = draw_in(rng, r);
    return v;
}

double norm2(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

} // namespace

void SampleBox::validate() const {
    for (const auto& r : {t, y, z, u})
        if (!(r[1] >= r[0])) throw std::invalid_argument("sample box: range with hi < lo");
    if (width(y) == 0.0 && width(z) == 0.0 && width(u) == 0.0)
        throw std::invalid_argument("sample box: degenerate (zero volume in y, z and u)");
}

SampleBox SampleBox::from_json(const nlohmann::json& j) {
    SampleBox b;
    auto range = [&](const char* key, std::array<double, 2>& out) {
        if (!j.contains(key)) return;
        const auto& r = j.at(key);
        if (!r.is_array() || r.size() != 2)
            throw std::invalid_argument(std::string("sample box: '") + key +
                                        "' must be [lo, hi]");
        out = {r[0].get<double>(), r[1].get<double>()};
    };
    range("t", b.t);
    range("y", b.y);
    range("z", b.z);
    range("u", b.u);
    b.validate();
    return b;
}

nlohmann::json SampleBox::to_json() const {
    return {{"t", t}, {"y", y}, {"z", z}, {"u", u}};
}

nlohmann::json Witness::to_json() const {
    return {{"t", t},   {"y", y},   {"y2", y2}, {"z", z},     {"z2", z2},
            {"u", u},   {"u2", u2}, {"lhs", lhs}, {"rhs", rhs}};
}

nlohmann::json ValidationReport::to_json() const {
    nlohmann::json j{{"name", name},
                     {"passed", passed},
                     {"worst", worst},
                     {"tol", tol},
                     {"n_samples", n_samples}};
    if (witness) j["witness"] = witness->to_json();
    return j;
}

ValidationReport validate_lipschitz_A2(const GeneratorSpec& spec, const MarkSpace& marks,
                                       int brownian_dim, const SampleBox& box, int sample_budget,
                                       double tol, std::uint64_t seed) {
    if (sample_budget < 1) throw std::invalid_argument("validate: sample_budget must be >= 1");
    box.validate();

    ValidationReport rep;
    rep.name = "lipschitz_A2";
    rep.tol = tol;
    rep.n_samples = sample_budget;
    const std::size_t d = static_cast<std::size_t>(brownian_dim);
    const std::size_t m = marks.size();

    double worst = 0.0;
    for (int s = 0; s < sample_budget; ++s) {
        CounterRng rng(seed, static_cast<std::uint32_t>(s), 100);
        const double t = draw_in(rng, box.t);
        const double y1 = draw_in(rng, box.y);
        const double y2 = draw_in(rng, box.y);
        const auto z1 = draw_vec(rng, box.z, d);
        const auto z2 = draw_vec(rng, box.z, d);
        const auto u = draw_vec(rng, box.u, m);

        const double num =
            std::abs(eval_generator(spec, t, y1, z1, u, marks) -
                     eval_generator(spec, t, y2, z2, u, marks));
        const double den =
            spec.coeffs.gamma(t) * std::abs(y1 - y2) + spec.coeffs.rho(t) * norm2(z1, z2);
        double ratio;
        if (den == 0.0) {
            if (num <= 1e-14) continue;
            ratio = std::numeric_limits<double>::infinity();
        } else {
            ratio = num / den;
        }
        if (ratio > worst) {
            worst = ratio;
            if (ratio > 1.0 + tol)
                rep.witness = Witness{t, y1, y2, z1, z2, u, u, num, den};
        }
    }
    rep.worst = worst;
    rep.passed = worst <= 1.0 + tol;
    if (rep.passed) rep.witness.reset();
    return rep;
}

ValidationReport validate_jump_monotone_A3(const GeneratorSpec& spec, const MarkSpace& marks,
                                           int brownian_dim, const SampleBox& box,
                                           int sample_budget, double tol, std::uint64_t seed) {
    if (sample_budget < 1) throw std::invalid_argument("validate: sample_budget must be >= 1");
    box.validate();
    if (!spec.kernel)
        throw std::invalid_argument("validate_jump_monotone_A3: spec declares no jump kernel");

    ValidationReport rep;
    rep.name = "jump_monotone_A3";
    rep.tol = tol;
    rep.n_samples = sample_budget;
    const std::size_t d = static_cast<std::size_t>(brownian_dim);
    const std::size_t m = marks.size();
    const JumpKernel& ker = *spec.kernel;

    double worst = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < sample_budget; ++s) {
        CounterRng rng(seed, static_cast<std::uint32_t>(s), 101);
        const double t = draw_in(rng, box.t);
        const double y = draw_in(rng, box.y);
        const auto z = draw_vec(rng, box.z, d);
        const auto u1 = draw_vec(rng, box.u, m);
        const auto u2 = draw_vec(rng, box.u, m);

        const double f1 = eval_generator(spec, t, y, z, u1, marks);
        const double f2 = eval_generator(spec, t, y, z, u2, marks);
        double bound = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            bound += (u1[i] - u2[i]) * ker.beta(t, marks.mark(i), static_cast<int>(i)) *
                     marks.intensity(i);
        bound *= spec.coeffs.sigma(t);

        // both orders: (u1, u2) and (u2, u1)
        for (int order = 0; order < 2; ++order) {
            const double margin = order == 0 ? (f1 - f2) - bound : (f2 - f1) + bound;
            if (margin > worst) {
                worst = margin;
                if (margin > tol) {
                    if (order == 0)
                        rep.witness = Witness{t, y, y, z, z, u1, u2, f1 - f2, bound};
                    else
                        rep.witness = Witness{t, y, y, z, z, u2, u1, f2 - f1, -bound};
                }
            }
        }
    }
    rep.worst = worst;
    rep.passed = worst <= tol;
    if (rep.passed) rep.witness.reset();
    return rep;
}

ValidationReport validate_weak_monotone_H2(const GeneratorSpec& spec, const MarkSpace& marks,
                                           int brownian_dim, const SampleBox& box,
                                           int sample_budget, double tol, std::uint64_t seed) {
    if (sample_budget < 1) throw std::invalid_argument("validate: sample_budget must be >= 1");
    box.validate();

    ValidationReport rep;
    rep.name = "weak_monotone_H2";
    rep.tol = tol;
    rep.n_samples = sample_budget;
    const std::size_t d = static_cast<std::size_t>(brownian_dim);
    const std::size_t m = marks.size();

    double worst = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < sample_budget; ++s) {
        CounterRng rng(seed, static_cast<std::uint32_t>(s), 102);
        const double t = draw_in(rng, box.t);
        const double y1 = draw_in(rng, box.y);
        const double y2 = draw_in(rng, box.y);
        const auto z = draw_vec(rng, box.z, d);
        const auto u = draw_vec(rng, box.u, m);

        const double lhs = (y1 - y2) * (eval_generator(spec, t, y1, z, u, marks) -
                                        eval_generator(spec, t, y2, z, u, marks));
        const double rhs =
            std::abs(y1 - y2) * spec.coeffs.gamma(t) * spec.varrho(std::abs(y1 - y2));
        const double margin = lhs - rhs;
        if (margin > worst) {
            worst = margin;
            if (margin > tol) rep.witness = Witness{t, y1, y2, z, z, u, u, lhs, rhs};
        }
    }
    rep.worst = worst;
    rep.passed = worst <= tol;
    if (rep.passed) rep.witness.reset();
    return rep;
}

ValidationReport validate_growth_H1(const GeneratorSpec& spec, const MarkSpace& marks,
                                    int brownian_dim, const SampleBox& box, int sample_budget,
                                    double tol, std::uint64_t seed) {
    if (sample_budget < 1) throw std::invalid_argument("validate: sample_budget must be >= 1");
    box.validate();

    ValidationReport rep;
    rep.name = "growth_H1";
    rep.tol = tol;
    rep.n_samples = sample_budget;
    const std::size_t d = static_cast<std::size_t>(brownian_dim);
    const std::size_t m = marks.size();

    double worst = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < sample_budget; ++s) {
        CounterRng rng(seed, static_cast<std::uint32_t>(s), 103);
        const double t = draw_in(rng, box.t);
        const double y = draw_in(rng, box.y);
        const auto z = draw_vec(rng, box.z, d);
        const auto u = draw_vec(rng, box.u, m);

        const double lhs = std::abs(eval_generator(spec, t, y, z, u, marks));
        const double rhs = spec.growth_bound(t, y, z, u, marks);
        const double margin = lhs - rhs;
        if (margin > worst) {
            worst = margin;
            if (margin > tol) {
                Witness w;
                w.t = t;
                w.y = w.y2 = y;
                w.z = w.z2 = z;
                w.u = w.u2 = u;
                w.lhs = lhs;
                w.rhs = rhs;
                rep.witness = w;
            }
        }
    }
    rep.worst = worst;
    rep.passed = worst <= tol;
    if (rep.passed) rep.witness.reset();
    return rep;
}

PhiBoundReport lemma_phi_bound(const std::function<double(double)>& psi, double growth_k, int n,
                               std::span<const double> x_samples) {
    if (n < 2.0 * growth_k)
        throw std::invalid_argument("lemma_phi_bound: requires n >= 2K");
    PhiBoundReport rep;
    rep.n_samples = static_cast<int>(x_samples.size());
    const double offset = psi(2.0 * growth_k / n);
    double worst = -std::numeric_limits<double>::infinity();
    for (double x : x_samples) {
        const double margin = psi(x) - (n * x + offset);
        if (margin > worst) {
            worst = margin;
            rep.worst_x = x;
        }
    }
    rep.worst_margin = worst;
    rep.passed = worst <= 1e-12;
    return rep;
}

} // namespace bsdep
