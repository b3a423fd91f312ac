#include "bsdep/regression.hpp"

#include <cmath>
#include <vector>

namespace bsdep {

RegressionBasis RegressionBasis::from_json(const nlohmann::json& j) {
    RegressionBasis b;
    b.degree = j.value("degree", 2);
    b.include_jump_count = j.value("include_jump_count", true);
    b.cross_terms = j.value("cross_terms", false);
    b.ridge = j.value("ridge", 1e-8);
    b.validate();
    return b;
}

nlohmann::json RegressionBasis::to_json() const {
    return {{"degree", degree},
            {"include_jump_count", include_jump_count},
            {"cross_terms", cross_terms},
            {"ridge", ridge}};
}

namespace {

/// Enumerates exponent tuples with total degree in [1, degree].
void enumerate_monomials(int n_state, int degree, std::vector<std::vector<int>>& out) {
    std::vector<int> expo(n_state, 0);
    // odometer over per-variable exponents, filtered by total degree
    while (true) {
        int i = 0;
        while (i < n_state && ++expo[i] > degree) expo[i++] = 0;
        if (i == n_state) break;
        int total = 0;
        for (int e : expo) total += e;
        if (total >= 1 && total <= degree) out.push_back(expo);
    }
}

} // namespace

int feature_count(const RegressionBasis& basis, int n_state) {
    if (n_state == 0 || basis.degree == 0) return 1;
    if (!basis.cross_terms) return 1 + n_state * basis.degree;
    std::vector<std::vector<int>> mono;
    enumerate_monomials(n_state, basis.degree, mono);
    return 1 + static_cast<int>(mono.size());
}

Eigen::MatrixXd build_features(const RegressionBasis& basis, const Eigen::MatrixXd& state) {
    const Eigen::Index m = state.rows();
    const int n_state = static_cast<int>(state.cols());
    Eigen::MatrixXd x(m, feature_count(basis, n_state));
    x.col(0).setOnes();
    if (n_state == 0 || basis.degree == 0) return x;

    if (!basis.cross_terms) {
        int col = 1;
        for (int v = 0; v < n_state; ++v) {
            Eigen::VectorXd pw = state.col(v);
            for (int p = 1; p <= basis.degree; ++p) {
                x.col(col++) = pw;
                if (p < basis.degree) pw = pw.cwiseProduct(state.col(v));
            }
        }
        return x;
    }

    std::vector<std::vector<int>> mono;
    enumerate_monomials(n_state, basis.degree, mono);
    for (std::size_t c = 0; c < mono.size(); ++c) {
        Eigen::VectorXd col = Eigen::VectorXd::Ones(m);
        for (int v = 0; v < n_state; ++v)
            for (int p = 0; p < mono[c][v]; ++p) col = col.cwiseProduct(state.col(v));
        x.col(static_cast<Eigen::Index>(c) + 1) = col;
    }
    return x;
}

FitResult ridge_fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& target, double ridge,
                    int step, const std::string& label) {
    const Eigen::Index b = features.cols();
    Eigen::MatrixXd gram = features.transpose() * features;
    Eigen::VectorXd rhs = features.transpose() * target;
    // intercept stays unpenalized so fitted values preserve the sample mean
    for (Eigen::Index i = 1; i < b; ++i) gram(i, i) += ridge;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const double min_ev = eig.eigenvalues().minCoeff();
    const double max_ev = eig.eigenvalues().maxCoeff();
    if (!(min_ev > 0.0) || !std::isfinite(max_ev) ||
        (ridge == 0.0 && min_ev <= max_ev * 1e-12))
        throw RegressionError(step, label, "singular regression design (rank-deficient basis)");
    FitResult fit;
    fit.condition = max_ev / min_ev;
    fit.beta = eig.eigenvectors() *
               (eig.eigenvectors().transpose() * rhs).cwiseQuotient(eig.eigenvalues());
    return fit;
}

} // namespace bsdep
