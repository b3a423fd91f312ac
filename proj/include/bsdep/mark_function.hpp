#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "bsdep/time_function.hpp"

namespace bsdep {

/// Closed-form function of (t, e) over the mark space, used for the jump
/// kernels beta_t(e), the measure-change integrands upsilon_t(e) and the
/// linear-equation coefficients alpha_t(e). Shapes:
///   constant   v
///   one_wedge  scale * (1 ^ |e|)
///   per_mark   v_i per mark index (constant in t)
/// optionally multiplied by a closed-form factor of t.
class MarkFunction {
public:
    enum class Kind { Constant, OneWedge, PerMark };

    MarkFunction() : kind_(Kind::Constant), value_(0.0) {}

    static MarkFunction constant(double v) {
        MarkFunction f;
        f.kind_ = Kind::Constant;
        f.value_ = v;
        return f;
    }
    static MarkFunction one_wedge(double scale) {
        MarkFunction f;
        f.kind_ = Kind::OneWedge;
        f.value_ = scale;
        return f;
    }
    static MarkFunction per_mark(std::vector<double> values) {
        MarkFunction f;
        f.kind_ = Kind::PerMark;
        f.values_ = std::move(values);
        return f;
    }

    MarkFunction& with_time_scale(TimeFunction f) {
        time_scale_ = std::move(f);
        scaled_ = true;
        return *this;
    }

    double operator()(double t, double e, int mark_index) const {
        double base = 0.0;
        switch (kind_) {
        case Kind::Constant:
            base = value_;
            break;
        case Kind::OneWedge:
            base = value_ * std::min(1.0, std::abs(e));
            break;
        case Kind::PerMark:
            if (mark_index < 0 || static_cast<std::size_t>(mark_index) >= values_.size())
                throw std::invalid_argument("MarkFunction: mark index out of range");
            base = values_[static_cast<std::size_t>(mark_index)];
            break;
        }
        return scaled_ ? time_scale_(t) * base : base;
    }

    static MarkFunction from_json(const nlohmann::json& j) {
        if (j.is_number()) return constant(j.get<double>());
        const std::string kind = j.at("kind").get<std::string>();
        MarkFunction f;
        if (kind == "constant")
            f = constant(j.at("value").get<double>());
        else if (kind == "one_wedge")
            f = one_wedge(j.at("scale").get<double>());
        else if (kind == "per_mark")
            f = per_mark(j.at("values").get<std::vector<double>>());
        else
            throw std::invalid_argument("mark function: unknown kind '" + kind + "'");
        if (j.contains("time_scale")) f.with_time_scale(TimeFunction::from_json(j.at("time_scale")));
        return f;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        switch (kind_) {
        case Kind::Constant:
            j = {{"kind", "constant"}, {"value", value_}};
            break;
        case Kind::OneWedge:
            j = {{"kind", "one_wedge"}, {"scale", value_}};
            break;
        case Kind::PerMark:
            j = {{"kind", "per_mark"}, {"values", values_}};
            break;
        }
        if (scaled_) j["time_scale"] = time_scale_.to_json();
        return j;
    }

private:
    Kind kind_;
    double value_ = 0.0;
    std::vector<double> values_;
    TimeFunction time_scale_;
    bool scaled_ = false;
};

} // namespace bsdep
