#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace bsdep {

/// Uniform grid 0 = t_0 < t_1 < ... < t_N = T.
class TimeGrid {
public:
    TimeGrid(double horizon, int n_steps) : horizon_(horizon), n_steps_(n_steps) {
        if (!(horizon > 0.0) || !std::isfinite(horizon))
            throw std::invalid_argument("TimeGrid: horizon must be positive and finite");
        if (n_steps < 1) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
        dt_ = horizon / n_steps;
    }

    double horizon() const { return horizon_; }
    int n_steps() const { return n_steps_; }
    int n_nodes() const { return n_steps_ + 1; }
    double dt() const { return dt_; }
    double node(int k) const { return k == n_steps_ ? horizon_ : k * dt_; }

    bool operator==(const TimeGrid& o) const {
        return horizon_ == o.horizon_ && n_steps_ == o.n_steps_;
    }

private:
    double horizon_;
    int n_steps_;
    double dt_;
};

/// Finite discretization of the jump-mark space: marks e_i != 0 with
/// intensities lambda_i > 0. An empty mark set is the pure-diffusion case.
class MarkSpace {
public:
    MarkSpace() = default;
    MarkSpace(std::vector<double> marks, std::vector<double> intensities)
        : marks_(std::move(marks)), intensities_(std::move(intensities)) {
        if (marks_.size() != intensities_.size())
            throw std::invalid_argument("MarkSpace: marks/intensities size mismatch");
        double levy = 0.0;
        for (std::size_t i = 0; i < marks_.size(); ++i) {
            if (marks_[i] == 0.0 || !std::isfinite(marks_[i]))
                throw std::invalid_argument("MarkSpace: marks must be nonzero and finite");
            if (!(intensities_[i] > 0.0) || !std::isfinite(intensities_[i]))
                throw std::invalid_argument("MarkSpace: intensities must be positive and finite");
            total_ += intensities_[i];
            levy += intensities_[i] * std::min(1.0, marks_[i] * marks_[i]);
        }
        if (!std::isfinite(levy))
            throw std::invalid_argument("MarkSpace: integral of (1 ^ e^2) lambda(de) must be finite");
    }

    std::size_t size() const { return marks_.size(); }
    bool empty() const { return marks_.empty(); }
    double mark(std::size_t i) const { return marks_[i]; }
    double intensity(std::size_t i) const { return intensities_[i]; }
    double total_intensity() const { return total_; }
    const std::vector<double>& marks() const { return marks_; }
    const std::vector<double>& intensities() const { return intensities_; }

    /// lambda-weighted L2 norm of a mark vector u: sqrt(sum u_i^2 lambda_i).
    double l2_norm(std::span<const double> u) const {
        double s = 0.0;
        for (std::size_t i = 0; i < marks_.size(); ++i) s += u[i] * u[i] * intensities_[i];
        return std::sqrt(s);
    }

    bool operator==(const MarkSpace& o) const {
        return marks_ == o.marks_ && intensities_ == o.intensities_;
    }

private:
    std::vector<double> marks_;
    std::vector<double> intensities_;
    double total_ = 0.0;
};

} // namespace bsdep
