#include "bsdep/generator.hpp"

#include <cmath>
#include <stdexcept>

namespace bsdep {

void CoefficientFns::validate(double horizon) const {
    if (!gamma.is_nonnegative() || !rho.is_nonnegative() || !sigma.is_nonnegative())
        throw std::invalid_argument("coefficients: gamma, rho, sigma must be nonnegative");
    const double v = integrability(horizon);
    if (!std::isfinite(v))
        throw std::invalid_argument(
            "coefficients: (A4) integral of gamma + rho^2 + sigma^2 is not finite");
}

CoefficientFns CoefficientFns::from_json(const nlohmann::json& j) {
    CoefficientFns c;
    if (j.contains("gamma")) c.gamma = TimeFunction::from_json(j.at("gamma"));
    if (j.contains("rho")) c.rho = TimeFunction::from_json(j.at("rho"));
    if (j.contains("sigma")) c.sigma = TimeFunction::from_json(j.at("sigma"));
    return c;
}

nlohmann::json CoefficientFns::to_json() const {
    return {{"gamma", gamma.to_json()}, {"rho", rho.to_json()}, {"sigma", sigma.to_json()}};
}

void JumpKernel::validate(const TimeGrid& grid, const MarkSpace& marks) const {
    if (!(c > -1.0) || !(c <= 0.0))
        throw std::invalid_argument("jump kernel: c must lie in (-1, 0]");
    if (!(big_c > 0.0)) throw std::invalid_argument("jump kernel: C must be positive");
    for (int k = 0; k < grid.n_nodes(); ++k) {
        const double t = grid.node(k);
        for (std::size_t i = 0; i < marks.size(); ++i) {
            const double e = marks.mark(i);
            const double wedge = std::min(1.0, std::abs(e));
            const double b = beta(t, e, static_cast<int>(i));
            if (b < c * wedge || b > big_c * wedge)
                throw std::invalid_argument(
                    "jump kernel: beta violates the sandwich c(1^|e|) <= beta <= C(1^|e|)");
        }
    }
}

JumpKernel JumpKernel::from_json(const nlohmann::json& j) {
    JumpKernel k;
    k.c = j.value("c", 0.0);
    k.big_c = j.value("C", 1.0);
    if (j.contains("beta")) k.beta = MarkFunction::from_json(j.at("beta"));
    return k;
}

nlohmann::json JumpKernel::to_json() const {
    return {{"c", c}, {"C", big_c}, {"beta", beta.to_json()}};
}

double Modulus::operator()(double x) const {
    if (x <= 0.0) return 0.0;
    switch (kind) {
    case Kind::Linear:
        return k * x;
    case Kind::XLog:
        // x (1 - ln x) on (0, 1], continued flat; nondecreasing and concave
        // on each piece, value k at x = 1.
        return x <= 1.0 ? k * x * (1.0 - std::log(x)) : k;
    case Kind::Power:
        return k * std::pow(x, alpha);
    }
    return 0.0;
}

double Modulus::growth_constant() const {
    // Linear: kx <= k(x+1). XLog: bounded by k on (0,1], equal k after.
    // Power: x^a <= x + 1 for a in (0, 1].
    return k;
}

bool Modulus::osgood_holds() const {
    switch (kind) {
    case Kind::Linear:
        return true; // integral of 1/(k r) diverges at 0+
    case Kind::XLog:
        return true; // integral of 1/(r (1 - ln r)) diverges at 0+
    case Kind::Power:
        return alpha >= 1.0; // 1/r^a integrable at 0+ for a < 1
    }
    return false;
}

bool Modulus::is_concave() const {
    switch (kind) {
    case Kind::Linear:
        return true;
    case Kind::XLog:
        // concave on (0,1] and flat after; the junction at x=1 has matching
        // one-sided slopes (both 0), so concavity holds globally.
        return true;
    case Kind::Power:
        return alpha <= 1.0;
    }
    return false;
}

Modulus Modulus::from_json(const nlohmann::json& j) {
    Modulus m;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "linear")
        m.kind = Kind::Linear;
    else if (kind == "xlog")
        m.kind = Kind::XLog;
    else if (kind == "power")
        m.kind = Kind::Power;
    else
        throw std::invalid_argument("modulus: unknown kind '" + kind + "'");
    m.k = j.value("k", 1.0);
    m.alpha = j.value("alpha", 0.5);
    if (!(m.k > 0.0)) throw std::invalid_argument("modulus: k must be positive");
    if (m.kind == Kind::Power && !(m.alpha > 0.0 && m.alpha <= 1.0))
        throw std::invalid_argument("modulus: power exponent must lie in (0, 1]");
    return m;
}

nlohmann::json Modulus::to_json() const {
    switch (kind) {
    case Kind::Linear:
        return {{"kind", "linear"}, {"k", k}};
    case Kind::XLog:
        return {{"kind", "xlog"}, {"k", k}};
    case Kind::Power:
        return {{"kind", "power"}, {"k", k}, {"alpha", alpha}};
    }
    return {};
}

AssumptionClass assumption_class_from_string(const std::string& s) {
    if (s == "A") return AssumptionClass::A;
    if (s == "H1") return AssumptionClass::H1;
    if (s == "H2") return AssumptionClass::H2;
    if (s == "H3") return AssumptionClass::H3;
    throw std::invalid_argument("assumption class must be one of A, H1, H2, H3");
}

std::string to_string(AssumptionClass c) {
    switch (c) {
    case AssumptionClass::A:
        return "A";
    case AssumptionClass::H1:
        return "H1";
    case AssumptionClass::H2:
        return "H2";
    case AssumptionClass::H3:
        return "H3";
    }
    return "A";
}

double GeneratorSpec::growth_bound(double t, double y, std::span<const double> z,
                                   std::span<const double> u, const MarkSpace& marks) const {
    double zn = 0.0;
    for (double v : z) zn += v * v;
    return f_t_at(t) + coeffs.gamma(t) * std::abs(y) + coeffs.rho(t) * std::sqrt(zn) +
           coeffs.sigma(t) * marks.l2_norm(u);
}

void GeneratorSpec::validate(const TimeGrid& grid, const MarkSpace& marks,
                             int brownian_dim) const {
    coeffs.validate(grid.horizon());
    if (kernel) kernel->validate(grid, marks);

    const Expr::Deps d = expr.deps();
    if (d.max_z_index >= brownian_dim)
        throw std::invalid_argument("generator: z component index exceeds brownian_dim");
    if (d.max_u_index >= static_cast<int>(marks.size()))
        throw std::invalid_argument("generator: u mark arity exceeds the mark space size");

    if (f_t) {
        const Expr::Deps fd = f_t->deps();
        if (fd.y || fd.z || fd.u)
            throw std::invalid_argument("generator: f_t may depend on t only");
        for (int k = 0; k < grid.n_nodes(); ++k)
            if (f_t_at(grid.node(k)) < 0.0)
                throw std::invalid_argument("generator: f_t must be nonnegative on the grid");
    }

    if (assumption_class == AssumptionClass::H2 || assumption_class == AssumptionClass::H3) {
        if (!varrho.osgood_holds())
            throw std::invalid_argument(
                "generator: H2 requires an Osgood modulus varrho (integral of 1/varrho diverges at 0+)");
        if (!varrho.is_concave())
            throw std::invalid_argument("generator: H2 requires a concave varrho");
    }
}

GeneratorSpec GeneratorSpec::from_json(const nlohmann::json& j) {
    GeneratorSpec g;
    g.expr = Expr::from_json(j.at("expr"));
    if (j.contains("coefficients")) g.coeffs = CoefficientFns::from_json(j.at("coefficients"));
    if (j.contains("kernel")) g.kernel = JumpKernel::from_json(j.at("kernel"));
    if (j.contains("assumption_class"))
        g.assumption_class = assumption_class_from_string(j.at("assumption_class").get<std::string>());
    if (j.contains("varrho")) g.varrho = Modulus::from_json(j.at("varrho"));
    if (j.contains("phi")) {
        g.phi = Modulus::from_json(j.at("phi"));
        g.phi_a = j.at("phi").value("a", g.phi.growth_constant());
        g.phi_b = j.at("phi").value("b", g.phi.kind == Modulus::Kind::Linear ? 0.0 : g.phi.k);
    }
    if (j.contains("f_t")) g.f_t = Expr::from_json(j.at("f_t"));
    return g;
}

nlohmann::json GeneratorSpec::to_json() const {
    nlohmann::json j{{"expr", expr.to_json()},
                     {"coefficients", coeffs.to_json()},
                     {"assumption_class", to_string(assumption_class)}};
    if (kernel) j["kernel"] = kernel->to_json();
    if (f_t) j["f_t"] = f_t->to_json();
    return j;
}

double eval_generator(const GeneratorSpec& spec, double t, double y, std::span<const double> z,
                      std::span<const double> u, const MarkSpace& marks) {
    if (!std::isfinite(t) || !std::isfinite(y))
        throw std::invalid_argument("eval_generator: non-finite input");
    for (double v : z)
        if (!std::isfinite(v)) throw std::invalid_argument("eval_generator: non-finite z input");
    for (double v : u)
        if (!std::isfinite(v)) throw std::invalid_argument("eval_generator: non-finite u input");
    Expr::Args a;
    a.t = t;
    a.y = y;
    a.z = z;
    a.u = u;
    a.marks = &marks;
    return spec.expr.eval(a);
}

} // namespace bsdep
