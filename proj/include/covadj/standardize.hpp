#pragma once

#include <Eigen/Dense>
#include <span>

#include "covadj/glm.hpp"
#include "covadj/math.hpp"

namespace covadj {

// Per-subject predictions with the treatment column forced to 1 and to 0.
struct CounterfactualPredictions {
    Eigen::VectorXd pi1;
    Eigen::VectorXd pi0;
};

inline CounterfactualPredictions predict_counterfactual(const LogisticFit& fit) {
    const Eigen::MatrixXd& X = fit.design.rows;
    const Eigen::VectorXd& b = fit.coefficients;
    const Eigen::Index n = X.rows();
    CounterfactualPredictions preds;
    preds.pi1.resize(n);
    preds.pi0.resize(n);
    // eta under z=0, plus the treatment coefficient for z=1
    for (Eigen::Index i = 0; i < n; ++i) {
        double eta0 = b[0];
        for (Eigen::Index j = 2; j < X.cols(); ++j) eta0 += X(i, j) * b[j];
        preds.pi0[i] = invlogit(eta0);
        preds.pi1[i] = invlogit(eta0 + b[1]);
    }
    return preds;
}

// Point estimate of the standardized risk difference together with the
// quantities every variance method consumes: the gradient of each average
// counterfactual response with respect to the coefficients, and the sample
// variance of the per-subject contrasts.
struct RdEstimate {
    double pi_bar1 = 0.0;
    double pi_bar0 = 0.0;
    double rd = 0.0;
    Eigen::VectorXd grad1;  // (1/n) sum x_i(1) pi_i(1)(1-pi_i(1))
    Eigen::VectorXd grad0;
    double sigma2_rd = 0.0;  // sample variance (n-1) of pi_i(1)-pi_i(0)
};

inline RdEstimate estimate_rd(const CounterfactualPredictions& preds, const LogisticFit& fit) {
    const Eigen::MatrixXd& X = fit.design.rows;
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();

    RdEstimate est;
    est.pi_bar1 = preds.pi1.mean();
    est.pi_bar0 = preds.pi0.mean();
    est.rd = est.pi_bar1 - est.pi_bar0;

    est.grad1 = Eigen::VectorXd::Zero(p);
    est.grad0 = Eigen::VectorXd::Zero(p);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double w1 = preds.pi1[i] * (1.0 - preds.pi1[i]);
        const double w0 = preds.pi0[i] * (1.0 - preds.pi0[i]);
        Eigen::VectorXd xi = X.row(i).transpose();
        xi[1] = 1.0;
        est.grad1 += w1 * xi;
        xi[1] = 0.0;
        est.grad0 += w0 * xi;
    }
    est.grad1 /= static_cast<double>(n);
    est.grad0 /= static_cast<double>(n);

    std::vector<double> contrast(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        contrast[static_cast<std::size_t>(i)] = preds.pi1[i] - preds.pi0[i];
    est.sigma2_rd = sample_variance(contrast);
    return est;
}

}  // namespace covadj
