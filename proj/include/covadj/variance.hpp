#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "covadj/errors.hpp"
#include "covadj/glm.hpp"
#include "covadj/standardize.hpp"
#include "covadj/trial_data.hpp"

namespace covadj {

enum class HcType { Const, HC0, HC1, HC2, HC3, HC4, HC4m, HC5 };

// The nine benchmark methods plus the extended proposed family over the
// remaining residual-weight types.
enum class VarianceMethod {
    M1_DeltaModel,
    M2_DeltaHC2,
    M3_DeltaHC3,
    M4_Eif,
    M5_SemiParametric,
    M6_ProposedHC2,
    M7_ProposedHC3,
    M8_UnadjustedHC2,
    M9_UnadjustedHC3,
    ProposedModel,
    ProposedConst,
    ProposedHC0,
    ProposedHC1,
    ProposedHC4,
    ProposedHC4m,
    ProposedHC5,
};

inline const std::vector<VarianceMethod>& all_core_methods() {
    static const std::vector<VarianceMethod> methods = {
        VarianceMethod::M1_DeltaModel,    VarianceMethod::M2_DeltaHC2,
        VarianceMethod::M3_DeltaHC3,      VarianceMethod::M4_Eif,
        VarianceMethod::M5_SemiParametric, VarianceMethod::M6_ProposedHC2,
        VarianceMethod::M7_ProposedHC3,   VarianceMethod::M8_UnadjustedHC2,
        VarianceMethod::M9_UnadjustedHC3,
    };
    return methods;
}

inline bool is_adjusted(VarianceMethod m) {
    return m != VarianceMethod::M8_UnadjustedHC2 && m != VarianceMethod::M9_UnadjustedHC3;
}

inline std::string method_id(VarianceMethod m) {
    switch (m) {
        case VarianceMethod::M1_DeltaModel: return "M1";
        case VarianceMethod::M2_DeltaHC2: return "M2";
        case VarianceMethod::M3_DeltaHC3: return "M3";
        case VarianceMethod::M4_Eif: return "M4";
        case VarianceMethod::M5_SemiParametric: return "M5";
        case VarianceMethod::M6_ProposedHC2: return "M6";
        case VarianceMethod::M7_ProposedHC3: return "M7";
        case VarianceMethod::M8_UnadjustedHC2: return "M8";
        case VarianceMethod::M9_UnadjustedHC3: return "M9";
        case VarianceMethod::ProposedModel: return "proposed-model";
        case VarianceMethod::ProposedConst: return "proposed-const";
        case VarianceMethod::ProposedHC0: return "proposed-hc0";
        case VarianceMethod::ProposedHC1: return "proposed-hc1";
        case VarianceMethod::ProposedHC4: return "proposed-hc4";
        case VarianceMethod::ProposedHC4m: return "proposed-hc4m";
        case VarianceMethod::ProposedHC5: return "proposed-hc5";
    }
    return "?";
}

inline std::string method_label(VarianceMethod m) {
    switch (m) {
        case VarianceMethod::M1_DeltaModel: return "M1: Delta (model)";
        case VarianceMethod::M2_DeltaHC2: return "M2: Delta (HC2)";
        case VarianceMethod::M3_DeltaHC3: return "M3: Delta (HC3)";
        case VarianceMethod::M4_Eif: return "M4: EIF";
        case VarianceMethod::M5_SemiParametric: return "M5: Semi-parametric";
        case VarianceMethod::M6_ProposedHC2: return "M6: Proposed (HC2)";
        case VarianceMethod::M7_ProposedHC3: return "M7: Proposed (HC3)";
        case VarianceMethod::M8_UnadjustedHC2: return "M8: Unadjusted (HC2)";
        case VarianceMethod::M9_UnadjustedHC3: return "M9: Unadjusted (HC3)";
        case VarianceMethod::ProposedModel: return "Proposed (model)";
        case VarianceMethod::ProposedConst: return "Proposed (const)";
        case VarianceMethod::ProposedHC0: return "Proposed (HC0)";
        case VarianceMethod::ProposedHC1: return "Proposed (HC1)";
        case VarianceMethod::ProposedHC4: return "Proposed (HC4)";
        case VarianceMethod::ProposedHC4m: return "Proposed (HC4m)";
        case VarianceMethod::ProposedHC5: return "Proposed (HC5)";
    }
    return "?";
}

inline std::optional<VarianceMethod> parse_method(const std::string& name) {
    for (VarianceMethod m :
         {VarianceMethod::M1_DeltaModel, VarianceMethod::M2_DeltaHC2, VarianceMethod::M3_DeltaHC3,
          VarianceMethod::M4_Eif, VarianceMethod::M5_SemiParametric, VarianceMethod::M6_ProposedHC2,
          VarianceMethod::M7_ProposedHC3, VarianceMethod::M8_UnadjustedHC2,
          VarianceMethod::M9_UnadjustedHC3, VarianceMethod::ProposedModel,
          VarianceMethod::ProposedConst, VarianceMethod::ProposedHC0, VarianceMethod::ProposedHC1,
          VarianceMethod::ProposedHC4, VarianceMethod::ProposedHC4m, VarianceMethod::ProposedHC5})
        if (name == method_id(m)) return m;
    return std::nullopt;
}

inline std::string hc_name(HcType hc) {
    switch (hc) {
        case HcType::Const: return "const";
        case HcType::HC0: return "HC0";
        case HcType::HC1: return "HC1";
        case HcType::HC2: return "HC2";
        case HcType::HC3: return "HC3";
        case HcType::HC4: return "HC4";
        case HcType::HC4m: return "HC4m";
        case HcType::HC5: return "HC5";
    }
    return "?";
}

struct VarianceEstimate {
    VarianceMethod method;
    double value = 0.0;  // variance of the risk difference, >= 0
};

// Residual weights omega_i for the meat of the sandwich covariance.
inline Eigen::VectorXd meat_weights(const LogisticFit& fit, HcType hc) {
    const Eigen::Index n = fit.residuals.size();
    const double nn = static_cast<double>(n);
    const double pp = static_cast<double>(fit.design.p());
    Eigen::VectorXd omega(n);

    const bool uses_leverage = hc == HcType::HC2 || hc == HcType::HC3 || hc == HcType::HC4 ||
                               hc == HcType::HC4m || hc == HcType::HC5;
    if (uses_leverage) {
        for (Eigen::Index i = 0; i < n; ++i)
            if (1.0 - fit.hat[i] < 1e-12)
                throw DegenerateLeverage("leverage " + std::to_string(fit.hat[i]) +
                                         " at subject " + std::to_string(i) + " for " +
                                         hc_name(hc));
    }
    if (hc == HcType::Const && nn <= pp)
        throw DegenerateArm("const weights need n > p");

    const double hbar = pp / nn;  // mean leverage, trace(H)/n
    switch (hc) {
        case HcType::Const: {
            const double s2 = fit.residuals.squaredNorm() / (nn - pp);
            omega.setConstant(s2);
            break;
        }
        case HcType::HC0:
            omega = fit.residuals.array().square();
            break;
        case HcType::HC1:
            omega = fit.residuals.array().square() * (nn / (nn - pp));
            break;
        case HcType::HC2:
            for (Eigen::Index i = 0; i < n; ++i)
                omega[i] = fit.residuals[i] * fit.residuals[i] / (1.0 - fit.hat[i]);
            break;
        case HcType::HC3:
            for (Eigen::Index i = 0; i < n; ++i) {
                const double d = 1.0 - fit.hat[i];
                omega[i] = fit.residuals[i] * fit.residuals[i] / (d * d);
            }
            break;
        case HcType::HC4:
            for (Eigen::Index i = 0; i < n; ++i) {
                const double delta = std::min(4.0, fit.hat[i] / hbar);
                omega[i] =
                    fit.residuals[i] * fit.residuals[i] / std::pow(1.0 - fit.hat[i], delta);
            }
            break;
        case HcType::HC4m:
            for (Eigen::Index i = 0; i < n; ++i) {
                const double r = fit.hat[i] / hbar;
                const double delta = std::min(1.0, r) + std::min(1.5, r);
                omega[i] =
                    fit.residuals[i] * fit.residuals[i] / std::pow(1.0 - fit.hat[i], delta);
            }
            break;
        case HcType::HC5: {
            const double hmax = fit.hat.maxCoeff();
            const double cap = std::max(4.0, 0.7 * hmax / hbar);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double delta = 0.5 * std::min(fit.hat[i] / hbar, cap);
                omega[i] =
                    fit.residuals[i] * fit.residuals[i] / std::pow(1.0 - fit.hat[i], delta);
            }
            break;
        }
    }
    return omega;
}

// bread * (X' diag(omega) X) * bread with bread = (X'WX)^-1.
inline Eigen::MatrixXd sandwich_covariance(const LogisticFit& fit, HcType hc) {
    const Eigen::VectorXd omega = meat_weights(fit, hc);
    const Eigen::MatrixXd& X = fit.design.rows;
    const Eigen::MatrixXd meat = X.transpose() * omega.asDiagonal() * X;
    Eigen::MatrixXd v = fit.model_covariance * meat * fit.model_covariance;
    return 0.5 * (v + v.transpose());
}

// Gradient-contrast quadratic form (the conditional delta-method variance).
inline double delta_conditional_variance(const RdEstimate& rd, const Eigen::MatrixXd& v) {
    const Eigen::VectorXd g = rd.grad1 - rd.grad0;
    return g.dot(v * g);
}

// Conditional delta-method variance plus the covariate-variability term
// sigma2_rd / n.
inline double proposed_unconditional_variance(const RdEstimate& rd, const Eigen::MatrixXd& v,
                                              std::size_t n) {
    return delta_conditional_variance(rd, v) + rd.sigma2_rd / static_cast<double>(n);
}

// Influence-function variance: per-subject scores propagated through the
// averaged counterfactual responses; returns 1/n times their sample variance.
inline double eif_variance(const LogisticFit& fit, const RdEstimate& rd,
                           const CounterfactualPredictions& preds) {
    const Eigen::MatrixXd& X = fit.design.rows;
    const Eigen::Index n = X.rows();
    const double nn = static_cast<double>(n);

    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w[i] = fit.fitted[i] * (1.0 - fit.fitted[i]);
    const Eigen::MatrixXd info = (X.transpose() * w.asDiagonal() * X) / nn;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
    const double lmax = eig.eigenvalues().maxCoeff();
    const double lmin = eig.eigenvalues().minCoeff();
    if (!(lmin > 0.0) || lmax / lmin > 1e12)
        throw SingularInformation("averaged information matrix is numerically singular");

    const Eigen::VectorXd contrast_grad = rd.grad1 - rd.grad0;
    // lambda_i = (contrast_i - rd) + (d1-d0)' M^-1 x_i eps_i
    const Eigen::VectorXd m_inv_g = eig.eigenvectors() *
                                    (eig.eigenvectors().transpose() * contrast_grad).cwiseQuotient(
                                        eig.eigenvalues());
    std::vector<double> lambda(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double centered = (preds.pi1[i] - preds.pi0[i]) - rd.rd;
        const double score_term = m_inv_g.dot(X.row(i).transpose()) * fit.residuals[i];
        lambda[static_cast<std::size_t>(i)] = centered + score_term;
    }
    return sample_variance(lambda) / nn;
}

// Arm-stratified variance built from the asymptotic expansion of the average
// counterfactual responses, with arm-specific allocation fractions. Only the
// counterfactual predictions of the fit enter the formula.
inline double semiparametric_variance(const LogisticFit& /*fit*/,
                                      const CounterfactualPredictions& preds,
                                      const TrialDataset& data) {
    const std::size_t n = data.n();
    const std::size_t n1 = data.arm_size(1);
    const std::size_t n0 = data.arm_size(0);
    if (n1 < 2 || n0 < 2) throw DegenerateArm("each arm needs at least 2 subjects");
    const double nn = static_cast<double>(n);

    std::vector<double> y1, y0, p1_arm1, p0_arm0, p1_arm0, p0_arm1;
    std::vector<double> p1_all(n), p0_all(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double yi = data.records[i].outcome;
        const double pi1 = preds.pi1[static_cast<Eigen::Index>(i)];
        const double pi0 = preds.pi0[static_cast<Eigen::Index>(i)];
        p1_all[i] = pi1;
        p0_all[i] = pi0;
        if (data.records[i].treatment == 1) {
            y1.push_back(yi);
            p1_arm1.push_back(pi1);
            p0_arm1.push_back(pi0);
        } else {
            y0.push_back(yi);
            p0_arm0.push_back(pi0);
            p1_arm0.push_back(pi1);
        }
    }

    auto arm_var = [&](const std::vector<double>& y_arm, const std::vector<double>& pred_arm,
                       const std::vector<double>& pred_all, double theta) {
        std::vector<double> diff(y_arm.size());
        for (std::size_t i = 0; i < y_arm.size(); ++i) diff[i] = y_arm[i] - pred_arm[i];
        const double sv = sample_variance(diff);
        const double sc = sample_covariance(y_arm, pred_arm);
        const double sv_all = sample_variance(pred_all);
        return (sv / theta + 2.0 * sc - sv_all) / nn;
    };

    const double theta1 = static_cast<double>(n1) / nn;
    const double theta0 = static_cast<double>(n0) / nn;
    const double var1 = arm_var(y1, p1_arm1, p1_all, theta1);
    const double var0 = arm_var(y0, p0_arm0, p0_all, theta0);

    const double cov01 = (sample_covariance(y0, p1_arm0) + sample_covariance(y1, p0_arm1) -
                          sample_covariance(p0_all, p1_all)) /
                         nn;
    return var1 - 2.0 * cov01 + var0;
}

// Treatment-only pipeline: fit, standardize, and apply the unconditional
// variance with the requested residual weights.
inline std::pair<RdEstimate, VarianceEstimate> unadjusted_pipeline(const TrialDataset& data,
                                                                   HcType hc,
                                                                   const FitConfig& config = {}) {
    if (hc != HcType::HC2 && hc != HcType::HC3)
        throw std::invalid_argument("unadjusted pipeline supports HC2 and HC3 only");
    const DesignMatrix design = build_design(data, {});
    FitResult result = fit_irls(design, data.outcomes(), config);
    if (!converged(result))
        throw EstimationError(std::string("treatment-only fit failed: ") +
                              to_string(failure_of(result).reason));
    const LogisticFit& fit = fit_of(result);
    const CounterfactualPredictions preds = predict_counterfactual(fit);
    const RdEstimate rd = estimate_rd(preds, fit);
    const Eigen::MatrixXd v = sandwich_covariance(fit, hc);
    VarianceEstimate est{hc == HcType::HC2 ? VarianceMethod::M8_UnadjustedHC2
                                           : VarianceMethod::M9_UnadjustedHC3,
                         proposed_unconditional_variance(rd, v, data.n())};
    return {rd, est};
}

}  // namespace covadj
