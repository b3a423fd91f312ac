#pragma once

#include <optional>
#include <span>
#include <string>

#include "bsdep/expr.hpp"
#include "bsdep/grid.hpp"
#include "bsdep/mark_function.hpp"
#include "bsdep/time_function.hpp"

namespace bsdep {

/// The nonnegative coefficient functions gamma, rho, sigma and their
/// integrability requirement: integral over [0, T] of gamma + rho^2 + sigma^2
/// must be finite (with T possibly infinite).
struct CoefficientFns {
    TimeFunction gamma = TimeFunction::constant(0.0);
    TimeFunction rho = TimeFunction::constant(0.0);
    TimeFunction sigma = TimeFunction::constant(0.0);

    double integrability(double horizon) const {
        return gamma.integral(0.0, horizon) + rho.integral_square(0.0, horizon) +
               sigma.integral_square(0.0, horizon);
    }
    /// Tail of the same integral over [t, inf); +inf when divergent.
    double integrability_tail(double t) const {
        return gamma.tail_integral(t) + rho.tail_integral_square(t) +
               sigma.tail_integral_square(t);
    }
    void validate(double horizon) const;

    static CoefficientFns from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// Jump kernel beta_t(e) with the sandwich c (1 ^ |e|) <= beta <= C (1 ^ |e|),
/// -1 < c <= 0 < C.
struct JumpKernel {
    double c = 0.0;
    double big_c = 1.0;
    MarkFunction beta = MarkFunction::one_wedge(0.0);

    /// Checks the sandwich at every grid node and mark.
    void validate(const TimeGrid& grid, const MarkSpace& marks) const;

    static JumpKernel from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// Continuity / monotonicity modulus in the class S (continuous,
/// nondecreasing, zero at zero, positive away from zero) with declared
/// linear growth. The Osgood property (divergence of the integral of 1/mod
/// at 0+) is decided symbolically per shape, never numerically.
struct Modulus {
    enum class Kind { Linear, XLog, Power };

    Kind kind = Kind::Linear;
    double k = 1.0;     // scale
    double alpha = 0.5; // Power exponent in (0, 1]

    double operator()(double x) const;
    /// Least K with mod(x) <= K (x + 1).
    double growth_constant() const;
    bool osgood_holds() const;
    bool is_concave() const;

    static Modulus from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

enum class AssumptionClass { A, H1, H2, H3 };

AssumptionClass assumption_class_from_string(const std::string& s);
std::string to_string(AssumptionClass c);

/// Evaluable BSDEP driver together with its declared structural data:
/// coefficient functions, optional jump kernel, moduli, the nonnegative
/// process f_t (housed as a closed form in t) and the assumption class the
/// spec is claimed to satisfy. Claims are checked by the validators, not
/// assumed.
struct GeneratorSpec {
    Expr expr = Expr::constant(0.0);
    CoefficientFns coeffs;
    std::optional<JumpKernel> kernel;
    AssumptionClass assumption_class = AssumptionClass::A;
    Modulus varrho;            // weak-monotonicity modulus (H2.1)
    Modulus phi;               // z-continuity modulus (H2.2)
    double phi_a = 1.0;        // phi(x) <= phi_a x + phi_b
    double phi_b = 0.0;
    std::optional<Expr> f_t;   // growth offset process (H1.2); depends on t only

    double f_t_at(double t) const {
        if (!f_t) return 0.0;
        Expr::Args a;
        a.t = t;
        return f_t->eval(a);
    }

    /// Growth envelope f_t + gamma |y| + rho |z| + sigma |u|_lambda.
    double growth_bound(double t, double y, std::span<const double> z, std::span<const double> u,
                        const MarkSpace& marks) const;

    /// Structural validation: coefficient nonnegativity and integrability,
    /// kernel sandwich, modulus requirements per declared class, f_t >= 0 on
    /// the grid, and variable arities against (d, m).
    void validate(const TimeGrid& grid, const MarkSpace& marks, int brownian_dim) const;

    static GeneratorSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// Evaluates the driver at one point. Total on finite inputs; non-finite
/// inputs are rejected.
double eval_generator(const GeneratorSpec& spec, double t, double y, std::span<const double> z,
                      std::span<const double> u, const MarkSpace& marks);

} // namespace bsdep
