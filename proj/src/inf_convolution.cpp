#include "bsdep/inf_convolution.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "bsdep/philox.hpp"

namespace bsdep {

namespace {

/// Axes the search actually has to explore: coordinates the driver reads.
/// For coordinates the driver ignores, the penalty term is minimized by the
/// query value itself, so they are pinned exactly.
struct SearchSpace {
    bool use_y = false;
    bool use_z = false;
    bool use_u = false;
    std::size_t d = 0, m = 0;
    std::size_t n_axes = 0;
};

SearchSpace make_space(const GeneratorSpec& spec, std::size_t d, std::size_t m) {
    const Expr::Deps deps = spec.expr.deps();
    SearchSpace s;
    s.d = d;
    s.m = m;
    s.use_y = deps.y;
    s.use_z = deps.z && d > 0;
    s.use_u = deps.u && m > 0;
    s.n_axes = (s.use_y ? 1 : 0) + (s.use_z ? d : 0) + (s.use_u ? m : 0);
    return s;
}

struct Candidate {
    double f = 0.0;    // driver value at the candidate
    double dist = 0.0; // penalty distance to the query point
};

/// Expands active coordinates into full (y, z, u) arguments and evaluates
/// the driver plus the distance to the query.
class CandidateEvaluator {
public:
    CandidateEvaluator(const GeneratorSpec& spec, const SearchSpace& space, const MarkSpace& marks,
                       double t, double y, std::span<const double> z, std::span<const double> u)
        : spec_(spec), space_(space), marks_(marks), t_(t), y_(y), z_(z.begin(), z.end()),
          u_(u.begin(), u.end()) {}

    Candidate eval(std::span<const double> coords) const {
        double y2 = y_;
        std::vector<double> z2 = z_;
        std::vector<double> u2 = u_;
        std::size_t c = 0;
        if (space_.use_y) y2 = coords[c++];
        if (space_.use_z)
            for (std::size_t j = 0; j < space_.d; ++j) z2[j] = coords[c++];
        if (space_.use_u)
            for (std::size_t i = 0; i < space_.m; ++i) u2[i] = coords[c++];

        double dz2 = 0.0;
        for (std::size_t j = 0; j < z_.size(); ++j) dz2 += (z2[j] - z_[j]) * (z2[j] - z_[j]);
        double du2 = 0.0;
        for (std::size_t i = 0; i < u_.size(); ++i)
            du2 += (u2[i] - u_[i]) * (u2[i] - u_[i]) * marks_.intensity(i);

        Candidate cand;
        cand.dist = std::abs(y2 - y_) + std::sqrt(dz2) + std::sqrt(du2);
        cand.f = eval_generator(spec_, t_, y2, z2, u2, marks_);
        return cand;
    }

    std::vector<double> query_coords() const {
        std::vector<double> q;
        q.reserve(space_.n_axes);
        if (space_.use_y) q.push_back(y_);
        if (space_.use_z) q.insert(q.end(), z_.begin(), z_.end());
        if (space_.use_u) q.insert(q.end(), u_.begin(), u_.end());
        return q;
    }

private:
    const GeneratorSpec& spec_;
    const SearchSpace& space_;
    const MarkSpace& marks_;
    double t_, y_;
    std::vector<double> z_, u_;
};

/// Coarse-to-fine lattice search for one n. Collects every evaluated
/// candidate into `pool` when it is non-null.
double search_one_n(const CandidateEvaluator& ev, const SearchSpace& space, int n,
                    double radius, const InfConvParams& params,
                    std::vector<Candidate>* pool) {
    const std::vector<double> query = ev.query_coords();
    const Candidate at_query = ev.eval(query);
    if (pool) pool->push_back(at_query);

    double best = at_query.f; // dist 0
    if (space.n_axes == 0) return best;

    std::vector<double> center = query;
    std::vector<double> coords(space.n_axes);
    const int p = params.coarse_points_per_axis;
    double r = radius;
    for (int round = 0; round <= params.refinement_rounds; ++round) {
        std::vector<double> best_coords = center;
        // odometer over the lattice {center - r, ..., center + r}^axes
        std::vector<int> idx(space.n_axes, 0);
        bool done = false;
        while (!done) {
            for (std::size_t a = 0; a < space.n_axes; ++a)
                coords[a] = center[a] - r + 2.0 * r * idx[a] / (p - 1);
            const Candidate cand = ev.eval(coords);
            if (pool) pool->push_back(cand);
            const double val = cand.f + n * cand.dist;
            if (val < best) {
                best = val;
                best_coords = coords;
            }
            // first candidate in lattice order wins ties (strict <)
            std::size_t a = 0;
            while (a < space.n_axes && ++idx[a] == p) idx[a++] = 0;
            done = a == space.n_axes;
        }
        center = best_coords;
        r *= 0.5;
    }
    return best;
}

double effective_radius(const GeneratorSpec& spec, const InfConvParams& params, int n, double t,
                        double y, std::span<const double> z, std::span<const double> u,
                        const MarkSpace& marks) {
    if (params.search_box_radius > 0.0) return params.search_box_radius;
    return (2.0 * spec.growth_bound(t, y, z, u, marks) + 1.0) / n;
}

} // namespace

void InfConvParams::validate() const {
    if (coarse_points_per_axis < 2)
        throw std::invalid_argument("inf convolution: coarse_points_per_axis must be >= 2");
    if (refinement_rounds < 0)
        throw std::invalid_argument("inf convolution: refinement_rounds must be >= 0");
    if (search_box_radius < 0.0)
        throw std::invalid_argument("inf convolution: search_box_radius must be positive (or 0 for automatic)");
}

InfConvParams InfConvParams::from_json(const nlohmann::json& j) {
    InfConvParams p;
    p.search_box_radius = j.value("search_box_radius", 0.0);
    p.coarse_points_per_axis = j.value("coarse_points_per_axis", 9);
    p.refinement_rounds = j.value("refinement_rounds", 4);
    p.validate();
    return p;
}

double inf_convolution(const LipschitzApprox& approx, double t, double y,
                       std::span<const double> z, std::span<const double> u,
                       const MarkSpace& marks) {
    if (approx.n < 1) throw std::invalid_argument("inf_convolution: n must be >= 1");
    approx.params.validate();
    const GeneratorSpec& spec = *approx.base;
    const SearchSpace space = make_space(spec, z.size(), u.size());
    const CandidateEvaluator ev(spec, space, marks, t, y, z, u);
    const double radius = effective_radius(spec, approx.params, approx.n, t, y, z, u, marks);
    return search_one_n(ev, space, approx.n, radius, approx.params, nullptr);
}

std::vector<double> inf_convolution_multi(const GeneratorSpec& spec, std::span<const int> n_list,
                                          const InfConvParams& params, double t, double y,
                                          std::span<const double> z, std::span<const double> u,
                                          const MarkSpace& marks) {
    params.validate();
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1])
            throw std::invalid_argument("inf_convolution_multi: n_list must be increasing");

    const SearchSpace space = make_space(spec, z.size(), u.size());
    const CandidateEvaluator ev(spec, space, marks, t, y, z, u);

    std::vector<Candidate> pool;
    for (int n : n_list) {
        if (n < 1) throw std::invalid_argument("inf_convolution_multi: n must be >= 1");
        const double radius = effective_radius(spec, params, n, t, y, z, u, marks);
        search_one_n(ev, space, n, radius, params, &pool);
    }

    // One shared candidate set: values are exactly nondecreasing in n and
    // exactly <= f (the query point is in the pool with dist 0).
    std::vector<double> values;
    values.reserve(n_list.size());
    for (int n : n_list) {
        double best = std::numeric_limits<double>::infinity();
        for (const Candidate& c : pool) best = std::min(best, c.f + n * c.dist);
        values.push_back(best);
    }
    return values;
}

double CachedInfConvolution::eval(int time_index, double t, double y, std::span<const double> z,
                                  std::span<const double> u, const MarkSpace& marks) {
    std::string key;
    key.reserve((2 + z.size() + u.size()) * sizeof(long long));
    auto push = [&key](long long v) {
        char buf[sizeof(long long)];
        std::memcpy(buf, &v, sizeof(v));
        key.append(buf, sizeof(v));
    };
    auto quantize = [this](double x) { return std::llround(x / rounding_); };
    push(time_index);
    push(quantize(y));
    for (double v : z) push(quantize(v));
    for (double v : u) push(quantize(v));

    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const double val = inf_convolution(approx_, t, y, z, u, marks);
    cache_.emplace(std::move(key), val);
    return val;
}

nlohmann::json FnPropertyReport::to_json() const {
    return {{"n_list", n_list},
            {"n_points", n_points},
            {"growth_ok", growth_ok},
            {"growth_worst", growth_worst},
            {"dominated_ok", dominated_ok},
            {"dominated_worst", dominated_worst},
            {"monotone_ok", monotone_ok},
            {"monotone_worst", monotone_worst},
            {"sup_gap", sup_gap},
            {"gap_decreasing_ok", gap_decreasing_ok},
            {"final_gap", final_gap},
            {"gap_tol_ok", gap_tol_ok},
            {"lipschitz_ok", lipschitz_ok},
            {"lipschitz_worst", lipschitz_worst},
            {"n_pairs", n_pairs},
            {"all_passed", all_passed()}};
}

FnPropertyReport check_fn_properties(const GeneratorSpec& spec, const MarkSpace& marks,
                                     int brownian_dim, std::span<const int> n_list,
                                     const SampleBox& box, int sample_budget,
                                     const InfConvParams& params, double tol,
                                     double declared_lipschitz, double grid_tol,
                                     std::uint64_t seed) {
    box.validate();
    if (sample_budget < 1)
        throw std::invalid_argument("check_fn_properties: sample_budget must be >= 1");

    const std::size_t d = static_cast<std::size_t>(brownian_dim);
    const std::size_t m = marks.size();

    FnPropertyReport rep;
    rep.n_list.assign(n_list.begin(), n_list.end());
    rep.n_points = sample_budget;
    rep.sup_gap.assign(n_list.size(), 0.0);

    double growth_worst = -std::numeric_limits<double>::infinity();
    double dominated_worst = -std::numeric_limits<double>::infinity();
    double monotone_worst = -std::numeric_limits<double>::infinity();

    auto draw_in = [](CounterRng& rng, const std::array<double, 2>& r) {
        return r[0] + (r[1] - r[0]) * rng.next_uniform();
    };

    for (int s = 0; s < sample_budget; ++s) {
        CounterRng rng(seed, static_cast<std::uint32_t>(s), 200);
        const double t = draw_in(rng, box.t);
        const double y = draw_in(rng, box.y);
        std::vector<double> z(d), u(m);
        for (auto& v : z) v = draw_in(rng, box.z);
        for (auto& v : u) v = draw_in(rng, box.u);

        const std::vector<double> vals =
            inf_convolution_multi(spec, n_list, params, t, y, z, u, marks);
        const double f = eval_generator(spec, t, y, z, u, marks);
        const double envelope = spec.growth_bound(t, y, z, u, marks);

        for (std::size_t j = 0; j < vals.size(); ++j) {
            growth_worst = std::max(growth_worst, std::abs(vals[j]) - envelope);
            dominated_worst = std::max(dominated_worst, vals[j] - f);
            rep.sup_gap[j] = std::max(rep.sup_gap[j], f - vals[j]);
            if (j > 0) monotone_worst = std::max(monotone_worst, vals[j - 1] - vals[j]);
        }
    }

    rep.growth_worst = growth_worst;
    rep.growth_ok = growth_worst <= tol;
    rep.dominated_worst = dominated_worst;
    rep.dominated_ok = dominated_worst <= 0.0;
    rep.monotone_worst = monotone_worst;
    rep.monotone_ok = n_list.size() < 2 || monotone_worst <= 0.0;

    rep.gap_decreasing_ok = true;
    for (std::size_t j = 1; j < rep.sup_gap.size(); ++j)
        if (rep.sup_gap[j] > rep.sup_gap[j - 1] + 1e-12) rep.gap_decreasing_ok = false;
    rep.final_gap = rep.sup_gap.empty() ? 0.0 : rep.sup_gap.back();
    if (declared_lipschitz > 0.0) {
        for (std::size_t j = 0; j < n_list.size(); ++j)
            if (n_list[j] >= declared_lipschitz && rep.sup_gap[j] > grid_tol)
                rep.gap_tol_ok = false;
    }

    // (iv) finite-difference Lipschitz bound on sampled pairs; pairs closer
    // than 5% of the box diagonal are skipped so lattice jitter cannot
    // masquerade as slope.
    const double diag =
        (box.y[1] - box.y[0]) + (box.z[1] - box.z[0]) + (box.u[1] - box.u[0]);
    const double min_dist = 0.05 * std::max(diag, 1e-12);
    const int n_pairs = std::max(sample_budget / 2, 1);
    double lip_worst = -std::numeric_limits<double>::infinity();
    int used = 0;
    for (int s = 0; s < n_pairs; ++s) {
        CounterRng rng(seed, static_cast<std::uint32_t>(s), 201);
        const double t = draw_in(rng, box.t);
        const double y1 = draw_in(rng, box.y);
        const double y2 = draw_in(rng, box.y);
        std::vector<double> z1(d), z2(d), u1(m), u2(m);
        for (auto& v : z1) v = draw_in(rng, box.z);
        for (auto& v : z2) v = draw_in(rng, box.z);
        for (auto& v : u1) v = draw_in(rng, box.u);
        for (auto& v : u2) v = draw_in(rng, box.u);

        double dz = 0.0;
        for (std::size_t j = 0; j < d; ++j) dz += (z1[j] - z2[j]) * (z1[j] - z2[j]);
        dz = std::sqrt(dz);
        double du = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            du += (u1[i] - u2[i]) * (u1[i] - u2[i]) * marks.intensity(i);
        du = std::sqrt(du);
        const double dy = std::abs(y1 - y2);
        if (dy + dz + du < min_dist) continue;
        ++used;

        const std::vector<double> a =
            inf_convolution_multi(spec, n_list, params, t, y1, z1, u1, marks);
        const std::vector<double> b =
            inf_convolution_multi(spec, n_list, params, t, y2, z2, u2, marks);
        const double weighted = spec.coeffs.gamma(t) * dy + spec.coeffs.rho(t) * dz +
                                spec.coeffs.sigma(t) * du;
        for (std::size_t j = 0; j < n_list.size(); ++j)
            lip_worst = std::max(lip_worst,
                                 std::abs(a[j] - b[j]) - n_list[j] * (1.0 + tol) * weighted);
    }
    rep.n_pairs = used;
    rep.lipschitz_worst = lip_worst;
    rep.lipschitz_ok = used == 0 || lip_worst <= 0.0;

    return rep;
}

} // namespace bsdep
