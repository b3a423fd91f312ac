#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

namespace bsdep {

/// Least-squares basis for conditional expectations: monomials of the state
/// variables (Brownian levels, optionally the running jump count) up to
/// `degree`, with or without cross terms, plus a ridge regularizer that is
/// never applied to the intercept.
struct RegressionBasis {
    int degree = 2;
    bool include_jump_count = true;
    bool cross_terms = false;
    double ridge = 1e-8;

    void validate() const {
        if (degree < 0) throw std::invalid_argument("basis: degree must be >= 0");
        if (ridge < 0.0) throw std::invalid_argument("basis: ridge must be >= 0");
    }

    static RegressionBasis from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

class RegressionError : public std::runtime_error {
public:
    RegressionError(int step, const std::string& label, const std::string& message)
        : std::runtime_error("regression at step " + std::to_string(step) + " (" + label +
                             "): " + message),
          step_(step), label_(label) {}

    int step() const { return step_; }
    const std::string& label() const { return label_; }

private:
    int step_;
    std::string label_;
};

int feature_count(const RegressionBasis& basis, int n_state);

/// Design matrix over the state matrix (n_paths x n_state); column 0 is the
/// intercept.
Eigen::MatrixXd build_features(const RegressionBasis& basis, const Eigen::MatrixXd& state);

struct FitResult {
    Eigen::VectorXd beta;
    double condition = 0.0;
};

/// Ridge-regularized normal-equation fit. Throws RegressionError on a
/// rank-deficient design when ridge == 0.
FitResult ridge_fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& target, double ridge,
                    int step, const std::string& label);

} // namespace bsdep
