#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "covadj/errors.hpp"
#include "covadj/math.hpp"
#include "covadj/variance.hpp"

namespace covadj {

struct WaldInterval {
    double ci_low = 0.0;
    double ci_high = 0.0;
    double p_value = 1.0;
};

// Normal-quantile interval rd +- z_{1-alpha/2} * sqrt(variance) and the
// matching two-sided p-value.
inline WaldInterval wald_interval(double rd, double variance, double alpha) {
    if (variance < 0.0) throw NegativeVariance("variance " + std::to_string(variance));
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha outside (0,1)");
    WaldInterval w;
    const double se = std::sqrt(variance);
    if (se == 0.0) {
        w.ci_low = w.ci_high = rd;
        w.p_value = rd == 0.0 ? 1.0 : 0.0;
        return w;
    }
    const double z = norm_quantile(1.0 - alpha / 2.0);
    w.ci_low = rd - z * se;
    w.ci_high = rd + z * se;
    w.p_value = std::erfc(std::abs(rd) / (se * 1.41421356237309504880));
    return w;
}

struct InferenceSummary {
    VarianceMethod method{};
    double rd = 0.0;
    double se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double p_value = 1.0;
    double alpha = 0.05;
    int fallback_steps = 0;
};

// One row per requested method; estimation failures become error entries
// instead of aborting the whole analysis.
struct AnalysisRow {
    VarianceMethod method{};
    std::optional<InferenceSummary> summary;
    std::string error;
};

inline std::vector<AnalysisRow> analyze_all(const TrialDataset& data,
                                            const std::vector<VarianceMethod>& methods,
                                            double alpha, const FitConfig& config = {}) {
    if (methods.empty()) throw std::invalid_argument("no methods requested");
    validate(data);

    bool want_adjusted = false, want_unadjusted = false;
    for (VarianceMethod m : methods) (is_adjusted(m) ? want_adjusted : want_unadjusted) = true;

    // shared adjusted fit
    std::optional<LogisticFit> fit;
    std::optional<CounterfactualPredictions> preds;
    std::optional<RdEstimate> rd;
    std::string fit_error;
    if (want_adjusted) {
        FitResult result = fit_with_fallback(data, config);
        if (converged(result)) {
            fit = fit_of(result);
            preds = predict_counterfactual(*fit);
            rd = estimate_rd(*preds, *fit);
        } else {
            fit_error = std::string("non-convergence (") + to_string(failure_of(result).reason) +
                        ") even for the treatment-only model";
        }
    }

    // shared treatment-only fit for the unadjusted methods
    std::optional<LogisticFit> ufit;
    std::optional<RdEstimate> urd;
    std::string ufit_error;
    if (want_unadjusted) {
        FitResult result = fit_irls(build_design(data, {}), data.outcomes(), config);
        if (converged(result)) {
            ufit = fit_of(result);
            urd = estimate_rd(predict_counterfactual(*ufit), *ufit);
        } else {
            ufit_error = std::string("non-convergence (") + to_string(failure_of(result).reason) +
                         ") for the treatment-only model";
        }
    }

    auto adjusted_variance = [&](VarianceMethod m) -> double {
        switch (m) {
            case VarianceMethod::M1_DeltaModel:
                return delta_conditional_variance(*rd, fit->model_covariance);
            case VarianceMethod::M2_DeltaHC2:
                return delta_conditional_variance(*rd, sandwich_covariance(*fit, HcType::HC2));
            case VarianceMethod::M3_DeltaHC3:
                return delta_conditional_variance(*rd, sandwich_covariance(*fit, HcType::HC3));
            case VarianceMethod::M4_Eif:
                return eif_variance(*fit, *rd, *preds);
            case VarianceMethod::M5_SemiParametric:
                return semiparametric_variance(*fit, *preds, data);
            case VarianceMethod::M6_ProposedHC2:
                return proposed_unconditional_variance(
                    *rd, sandwich_covariance(*fit, HcType::HC2), data.n());
            case VarianceMethod::M7_ProposedHC3:
                return proposed_unconditional_variance(
                    *rd, sandwich_covariance(*fit, HcType::HC3), data.n());
            case VarianceMethod::ProposedModel:
                return proposed_unconditional_variance(*rd, fit->model_covariance, data.n());
            case VarianceMethod::ProposedConst:
                return proposed_unconditional_variance(
                    *rd, sandwich_covariance(*fit, HcType::Const), data.n());
            case VarianceMethod::ProposedHC0:
                return proposed_unconditional_variance(
                    *rd, sandwich_covariance(*fit, HcType::HC0), data.n());
            case VarianceMethod::ProposedHC1:
                return proposed_unconditional_variance(
                    *rd, sandwich_covariance(*fit, HcType::HC1), data.n());
            case VarianceMethod::ProposedHC4:
                return proposed_unconditional_variance(
                    *rd, sandwich_covariance(*fit, HcType::HC4), data.n());
            case VarianceMethod::ProposedHC4m:
                return proposed_unconditional_variance(
                    *rd, sandwich_covariance(*fit, HcType::HC4m), data.n());
            case VarianceMethod::ProposedHC5:
                return proposed_unconditional_variance(
                    *rd, sandwich_covariance(*fit, HcType::HC5), data.n());
            default:
                throw std::logic_error("not an adjusted method");
        }
    };

    std::vector<AnalysisRow> rows;
    rows.reserve(methods.size());
    for (VarianceMethod m : methods) {
        AnalysisRow row;
        row.method = m;
        try {
            if (is_adjusted(m)) {
                if (!fit) throw EstimationError(fit_error);
                const double variance = adjusted_variance(m);
                const WaldInterval w = wald_interval(rd->rd, variance, alpha);
                row.summary = InferenceSummary{m,        rd->rd,   std::sqrt(variance),
                                               w.ci_low, w.ci_high, w.p_value,
                                               alpha,    fit->fallback_steps};
            } else {
                if (!ufit) throw EstimationError(ufit_error);
                const HcType hc =
                    m == VarianceMethod::M8_UnadjustedHC2 ? HcType::HC2 : HcType::HC3;
                const double variance = proposed_unconditional_variance(
                    *urd, sandwich_covariance(*ufit, hc), data.n());
                const WaldInterval w = wald_interval(urd->rd, variance, alpha);
                row.summary = InferenceSummary{m,        urd->rd,  std::sqrt(variance),
                                               w.ci_low, w.ci_high, w.p_value,
                                               alpha,    0};
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace covadj
