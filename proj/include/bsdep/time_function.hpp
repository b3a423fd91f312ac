#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace bsdep {

/// Closed-form deterministic function of time, used for the coefficient
/// functions gamma/rho/sigma, linear-equation coefficients and discounts.
///
/// Supported forms:
///   constant     v
///   exp_decay    a * exp(-rate * t), rate > 0
///   power_decay  a * (1 + t)^(-p), p >= 0
///   piecewise    right-continuous step function over [0, inf)
///
/// Integrals of f and f^2 over [a, b] and over tails [t, inf) are exact;
/// divergent tails report +inf.
class TimeFunction {
public:
    enum class Kind { Constant, ExpDecay, PowerDecay, Piecewise };

    TimeFunction() : kind_(Kind::Constant), a_(0.0) {}

    static TimeFunction constant(double v) {
        TimeFunction f;
        f.kind_ = Kind::Constant;
        f.a_ = v;
        return f;
    }
    static TimeFunction exp_decay(double a, double rate) {
        if (!(rate > 0.0)) throw std::invalid_argument("exp_decay: rate must be > 0");
        TimeFunction f;
        f.kind_ = Kind::ExpDecay;
        f.a_ = a;
        f.b_ = rate;
        return f;
    }
    static TimeFunction power_decay(double a, double p) {
        if (!(p >= 0.0)) throw std::invalid_argument("power_decay: p must be >= 0");
        TimeFunction f;
        f.kind_ = Kind::PowerDecay;
        f.a_ = a;
        f.b_ = p;
        return f;
    }
    /// times must start at 0 and be strictly increasing; values[i] applies on
    /// [times[i], times[i+1]) and values.back() from times.back() onward.
    static TimeFunction piecewise(std::vector<double> times, std::vector<double> values);

    static TimeFunction from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    Kind kind() const { return kind_; }

    double operator()(double t) const;

    /// Integral of f over [a, b], 0 <= a <= b.
    double integral(double a, double b) const;
    /// Integral of f^2 over [a, b].
    double integral_square(double a, double b) const;
    /// Integral of f over [t, inf); +inf when divergent.
    double tail_integral(double t) const;
    /// Integral of f^2 over [t, inf); +inf when divergent.
    double tail_integral_square(double t) const;

    bool is_nonnegative() const;
    bool is_zero() const;

private:
    Kind kind_;
    double a_ = 0.0; // constant value / amplitude
    double b_ = 0.0; // rate / exponent
    std::vector<double> times_, values_;
};

} // namespace bsdep
