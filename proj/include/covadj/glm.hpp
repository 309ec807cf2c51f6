#pragma once

#include <Eigen/Dense>
#include <string>
#include <variant>
#include <vector>

#include "covadj/math.hpp"
#include "covadj/trial_data.hpp"

namespace covadj {

struct FitConfig {
    int max_iterations = 40;
    double coef_tolerance = 1e-8;       // max absolute coefficient change
    double divergence_bound = 1e4;      // on max |coefficient|
    double separation_eta_bound = 1e4;  // on max |x_i'b|
    // Second convergence tier: a relative deviance stall, as in the common
    // GLM implementations. Quasi-separated and boundary-cell fits stall here
    // with finite coefficients instead of burning the iteration budget,
    // matching what reference pipelines report for such samples. Tighter
    // than the usual 1e-8 so regular fits land within oracle precision of
    // the exact MLE. 0 disables the tier.
    double deviance_tolerance = 1e-10;
    // A fit whose whole deviance collapses below this is perfectly
    // separated: every observation sits at the boundary and the MLE does not
    // exist. Reference pipelines still report such stalled fits, so the
    // check is off by default; set e.g. 1e-6 to reject them instead.
    double boundary_deviance = 0.0;
};

struct NonConvergence {
    enum class Reason { MaxIterations, Divergence, Separation };
    Reason reason = Reason::MaxIterations;
    int iterations = 0;
};

inline const char* to_string(NonConvergence::Reason r) {
    switch (r) {
        case NonConvergence::Reason::MaxIterations: return "max_iterations";
        case NonConvergence::Reason::Divergence: return "divergence";
        case NonConvergence::Reason::Separation: return "separation";
    }
    return "?";
}

struct LogisticFit {
    Eigen::VectorXd coefficients;      // b
    Eigen::VectorXd fitted;            // pi_hat, in (0,1)
    Eigen::VectorXd residuals;         // y - pi_hat
    Eigen::VectorXd hat;               // leverage diagonal
    Eigen::MatrixXd model_covariance;  // (X'WX)^-1
    DesignMatrix design;               // the retained design used for the fit
    std::vector<std::string> retained_covariates;
    int fallback_steps = 0;
    int iterations = 0;

    double outcome(Eigen::Index i) const { return fitted[i] + residuals[i]; }
};

using FitResult = std::variant<LogisticFit, NonConvergence>;

inline bool converged(const FitResult& r) { return std::holds_alternative<LogisticFit>(r); }
inline const LogisticFit& fit_of(const FitResult& r) { return std::get<LogisticFit>(r); }
inline const NonConvergence& failure_of(const FitResult& r) {
    return std::get<NonConvergence>(r);
}

namespace detail {

inline double binomial_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) ll += y[i] * eta[i] - log1pexp(eta[i]);
    return ll;
}

}  // namespace detail

// Newton-Raphson / IRLS on the binomial log-likelihood with the canonical
// link. Converges on a tiny coefficient change or a stalled deviance;
// declares non-convergence on iteration exhaustion, a runaway coefficient
// norm, a linear predictor beyond the separation bound, or (when
// boundary_deviance is set) a perfectly separated fit.
inline FitResult fit_irls(const DesignMatrix& design, const Eigen::VectorXd& y,
                          const FitConfig& config = {}) {
    const Eigen::Index n = design.n();
    const Eigen::Index p = design.p();
    const Eigen::MatrixXd& X = design.rows;

    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
    double ll = detail::binomial_loglik(y, eta);
    bool prev_stalled = false;

    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        Eigen::VectorXd pi(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            pi[i] = invlogit(eta[i]);
            w[i] = pi[i] * (1.0 - pi[i]);
        }
        const Eigen::MatrixXd xtwx = X.transpose() * w.asDiagonal() * X;
        const Eigen::VectorXd score = X.transpose() * (y - pi);

        Eigen::LLT<Eigen::MatrixXd> llt(xtwx);
        if (llt.info() != Eigen::Success)
            return NonConvergence{NonConvergence::Reason::Divergence, iter};
        const Eigen::VectorXd delta = llt.solve(score);

        auto deviance_stalled = [&](double ll_a, double ll_b) {
            return config.deviance_tolerance > 0.0 &&
                   2.0 * std::abs(ll_a - ll_b) <
                       config.deviance_tolerance * (2.0 * std::abs(ll_b) + 0.1);
        };

        double t = 1.0;
        Eigen::VectorXd b_new = b + delta;
        Eigen::VectorXd eta_new = X * b_new;
        double ll_new = detail::binomial_loglik(y, eta_new);
        // Step-halving if a non-trivial step reduces the log-likelihood.
        // Decreases at summation-roundoff level are accepted so the Newton
        // polish can finish; sub-tolerance steps are accepted as-is.
        const double noise = 1e-11 * (1.0 + std::abs(ll));
        bool stalled_in_place = false;
        if (delta.cwiseAbs().maxCoeff() >= config.coef_tolerance) {
            int halvings = 0;
            while (ll_new < ll - noise && halvings < 10) {
                t *= 0.5;
                ++halvings;
                b_new = b + t * delta;
                eta_new = X * b_new;
                ll_new = detail::binomial_loglik(y, eta_new);
            }
            if (ll_new < ll - noise) {
                // No ascent found. If the likelihood is flat at stall level,
                // the current iterate is the stopping point; otherwise the
                // step is genuinely bad.
                if (!deviance_stalled(ll_new, ll))
                    return NonConvergence{NonConvergence::Reason::Divergence, iter};
                stalled_in_place = true;
                t = 0.0;
                b_new = b;
                eta_new = eta;
                ll_new = ll;
            }
        }

        const double change = (t * delta).cwiseAbs().maxCoeff();
        // Two consecutive stalls are required: a well-posed fit then takes
        // one more Newton step, which puts it at the exact optimum, while a
        // boundary fit keeps stalling and converges on the next pass.
        const bool now_stalled = deviance_stalled(ll_new, ll);
        const bool stalled = stalled_in_place || (now_stalled && prev_stalled);
        prev_stalled = now_stalled;
        b = b_new;
        eta = eta_new;
        ll = ll_new;

        if (b.cwiseAbs().maxCoeff() > config.divergence_bound)
            return NonConvergence{NonConvergence::Reason::Divergence, iter};
        if (eta.cwiseAbs().maxCoeff() > config.separation_eta_bound)
            return NonConvergence{NonConvergence::Reason::Separation, iter};

        if (change < config.coef_tolerance || stalled) {
            if (config.boundary_deviance > 0.0 && -2.0 * ll < config.boundary_deviance)
                return NonConvergence{NonConvergence::Reason::Separation, iter};
            LogisticFit fit;
            fit.coefficients = b;
            fit.fitted.resize(n);
            Eigen::VectorXd wfin(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                fit.fitted[i] = invlogit(eta[i]);
                wfin[i] = fit.fitted[i] * (1.0 - fit.fitted[i]);
            }
            fit.residuals = y - fit.fitted;
            const Eigen::MatrixXd xtwx_fin = X.transpose() * wfin.asDiagonal() * X;
            Eigen::LLT<Eigen::MatrixXd> llt_fin(xtwx_fin);
            if (llt_fin.info() != Eigen::Success)
                return NonConvergence{NonConvergence::Reason::Divergence, iter};
            Eigen::MatrixXd v = llt_fin.solve(Eigen::MatrixXd::Identity(p, p));
            fit.model_covariance = 0.5 * (v + v.transpose());
            fit.hat.resize(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto xi = X.row(i).transpose();
                fit.hat[i] = wfin[i] * xi.dot(fit.model_covariance * xi);
            }
            fit.design = design;
            fit.iterations = iter;
            for (const auto& role : design.column_roles)
                if (role.kind == ColumnKind::Covariate)
                    fit.retained_covariates.push_back(role.name);
            return fit;
        }
    }
    return NonConvergence{NonConvergence::Reason::MaxIterations, config.max_iterations};
}

// Fits with every covariate, dropping one covariate at a time (last declared
// first) until a full-rank, converged fit is found; the final candidate is
// the treatment-only model. Rank-deficient columns are removed before
// fitting and count as fallback steps.
inline FitResult fit_with_fallback(const TrialDataset& data, const FitConfig& config = {}) {
    const Eigen::VectorXd y = data.outcomes();
    std::vector<std::string> retained = data.covariate_names;
    int steps = 0;

    for (;;) {
        DesignMatrix design = build_design(data, retained);
        const RankStatus rank = check_rank(design);
        if (!rank.full_rank) {
            std::vector<std::string> dependents;
            for (std::size_t col : rank.dependent_columns) {
                const auto& role = design.column_roles[col];
                if (role.kind == ColumnKind::Covariate) dependents.push_back(role.name);
            }
            if (dependents.empty())
                return NonConvergence{NonConvergence::Reason::Divergence, 0};
            for (const auto& name : dependents) {
                std::erase(retained, name);
                ++steps;
            }
            continue;
        }

        FitResult result = fit_irls(design, y, config);
        if (converged(result)) {
            LogisticFit fit = std::move(std::get<LogisticFit>(result));
            fit.fallback_steps = steps;
            return fit;
        }
        if (retained.empty()) return failure_of(result);
        retained.pop_back();
        ++steps;
    }
}

}  // namespace covadj
