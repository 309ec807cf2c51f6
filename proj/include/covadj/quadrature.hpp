#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace covadj {

struct GaussHermiteRule {
    Eigen::VectorXd nodes;    // ascending
    Eigen::VectorXd weights;  // for integral of exp(-t^2) f(t)
};

// Golub-Welsch on the Hermite recurrence: nodes are eigenvalues of the
// symmetric tridiagonal Jacobi matrix with off-diagonal sqrt(k/2), weights
// sqrt(pi) times the squared first eigenvector components.
inline GaussHermiteRule gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: n >= 1 required");
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double off = std::sqrt(k / 2.0);
        jacobi(k, k - 1) = off;
        jacobi(k - 1, k) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    GaussHermiteRule rule;
    rule.nodes = eig.eigenvalues();
    rule.weights.resize(n);
    const double mu0 = std::sqrt(M_PI);
    for (int i = 0; i < n; ++i) {
        const double v0 = eig.eigenvectors()(0, i);
        rule.weights[i] = mu0 * v0 * v0;
    }
    return rule;
}

// E[f(X)] for X ~ N(0,1).
template <typename F>
double gauss_hermite_expectation(const GaussHermiteRule& rule, F&& f) {
    const double inv_sqrt_pi = 0.564189583547756286948;
    double s = 0.0;
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i)
        s += rule.weights[i] * f(1.41421356237309504880 * rule.nodes[i]);
    return inv_sqrt_pi * s;
}

}  // namespace covadj
