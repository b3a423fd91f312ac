#include "bsdep/time_function.hpp"

#include <algorithm>

namespace bsdep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

TimeFunction TimeFunction::piecewise(std::vector<double> times, std::vector<double> values) {
    if (times.empty() || times.size() != values.size())
        throw std::invalid_argument("piecewise: times/values must be nonempty and equal length");
    if (times.front() != 0.0)
        throw std::invalid_argument("piecewise: times must start at 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("piecewise: times must be strictly increasing");
    TimeFunction f;
    f.kind_ = Kind::Piecewise;
    f.times_ = std::move(times);
    f.values_ = std::move(values);
    return f;
}

double TimeFunction::operator()(double t) const {
    switch (kind_) {
    case Kind::Constant:
        return a_;
    case Kind::ExpDecay:
        return a_ * std::exp(-b_ * t);
    case Kind::PowerDecay:
        return a_ * std::pow(1.0 + std::max(t, 0.0), -b_);
    case Kind::Piecewise: {
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        if (it == times_.begin()) return values_.front();
        return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
    }
    }
    return 0.0;
}

double TimeFunction::integral(double a, double b) const {
    if (!(b >= a)) throw std::invalid_argument("integral: requires b >= a");
    switch (kind_) {
    case Kind::Constant:
        return a_ * (b - a);
    case Kind::ExpDecay:
        return a_ / b_ * (std::exp(-b_ * a) - std::exp(-b_ * b));
    case Kind::PowerDecay: {
        if (b_ == 1.0) return a_ * (std::log1p(b) - std::log1p(a));
        const double q = 1.0 - b_;
        return a_ / q * (std::pow(1.0 + b, q) - std::pow(1.0 + a, q));
    }
    case Kind::Piecewise: {
        double acc = 0.0;
        for (std::size_t i = 0; i < times_.size(); ++i) {
            const double lo = std::max(a, times_[i]);
            const double hi = std::min(b, i + 1 < times_.size() ? times_[i + 1] : b);
            if (hi > lo) acc += values_[i] * (hi - lo);
        }
        return acc;
    }
    }
    return 0.0;
}

double TimeFunction::integral_square(double a, double b) const {
    switch (kind_) {
    case Kind::Constant:
        return a_ * a_ * (b - a);
    case Kind::ExpDecay:
        return a_ * a_ / (2.0 * b_) * (std::exp(-2.0 * b_ * a) - std::exp(-2.0 * b_ * b));
    case Kind::PowerDecay: {
        const double p2 = 2.0 * b_;
        if (p2 == 1.0) return a_ * a_ * (std::log1p(b) - std::log1p(a));
        const double q = 1.0 - p2;
        return a_ * a_ / q * (std::pow(1.0 + b, q) - std::pow(1.0 + a, q));
    }
    case Kind::Piecewise: {
        double acc = 0.0;
        for (std::size_t i = 0; i < times_.size(); ++i) {
            const double lo = std::max(a, times_[i]);
            const double hi = std::min(b, i + 1 < times_.size() ? times_[i + 1] : b);
            if (hi > lo) acc += values_[i] * values_[i] * (hi - lo);
        }
        return acc;
    }
    }
    return 0.0;
}

double TimeFunction::tail_integral(double t) const {
    switch (kind_) {
    case Kind::Constant:
        return a_ == 0.0 ? 0.0 : kInf;
    case Kind::ExpDecay:
        return a_ / b_ * std::exp(-b_ * t);
    case Kind::PowerDecay: {
        if (a_ == 0.0) return 0.0;
        if (b_ <= 1.0) return kInf;
        return a_ / (b_ - 1.0) * std::pow(1.0 + t, 1.0 - b_);
    }
    case Kind::Piecewise:
        return values_.back() == 0.0 ? integral(t, times_.back()) : kInf;
    }
    return 0.0;
}

double TimeFunction::tail_integral_square(double t) const {
    switch (kind_) {
    case Kind::Constant:
        return a_ == 0.0 ? 0.0 : kInf;
    case Kind::ExpDecay:
        return a_ * a_ / (2.0 * b_) * std::exp(-2.0 * b_ * t);
    case Kind::PowerDecay: {
        if (a_ == 0.0) return 0.0;
        if (b_ <= 0.5) return kInf;
        return a_ * a_ / (2.0 * b_ - 1.0) * std::pow(1.0 + t, 1.0 - 2.0 * b_);
    }
    case Kind::Piecewise:
        return values_.back() == 0.0 ? integral_square(t, times_.back()) : kInf;
    }
    return 0.0;
}

bool TimeFunction::is_nonnegative() const {
    switch (kind_) {
    case Kind::Constant:
    case Kind::ExpDecay:
    case Kind::PowerDecay:
        return a_ >= 0.0;
    case Kind::Piecewise:
        return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
    }
    return false;
}

bool TimeFunction::is_zero() const {
    if (kind_ == Kind::Piecewise)
        return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
    return a_ == 0.0;
}

TimeFunction TimeFunction::from_json(const nlohmann::json& j) {
    if (j.is_number()) return constant(j.get<double>());
    if (!j.is_object() || !j.contains("kind"))
        throw std::invalid_argument("time function: expected number or object with 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") return constant(j.at("value").get<double>());
    if (kind == "exp_decay") return exp_decay(j.at("a").get<double>(), j.at("rate").get<double>());
    if (kind == "power_decay") return power_decay(j.at("a").get<double>(), j.at("p").get<double>());
    if (kind == "piecewise")
        return piecewise(j.at("times").get<std::vector<double>>(),
                         j.at("values").get<std::vector<double>>());
    throw std::invalid_argument("time function: unknown kind '" + kind + "'");
}

nlohmann::json TimeFunction::to_json() const {
    switch (kind_) {
    case Kind::Constant:
        return {{"kind", "constant"}, {"value", a_}};
    case Kind::ExpDecay:
        return {{"kind", "exp_decay"}, {"a", a_}, {"rate", b_}};
    case Kind::PowerDecay:
        return {{"kind", "power_decay"}, {"a", a_}, {"p", b_}};
    case Kind::Piecewise:
        return {{"kind", "piecewise"}, {"times", times_}, {"values", values_}};
    }
    return {};
}

} // namespace bsdep
