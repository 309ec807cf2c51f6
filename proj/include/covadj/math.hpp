#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>

namespace covadj {

// Largest double strictly below 1. Probabilities are clamped into
// [kMinProb, kMaxProb] so downstream code can rely on open-interval values.
inline constexpr double kMaxProb = 0x1.fffffffffffffp-1;
inline constexpr double kMinProb = 1e-300;

inline double invlogit(double eta) {
    double p;
    if (eta >= 0.0) {
        p = 1.0 / (1.0 + std::exp(-eta));
    } else {
        const double e = std::exp(eta);
        p = e / (1.0 + e);
    }
    if (p < kMinProb) p = kMinProb;
    if (p > kMaxProb) p = kMaxProb;
    return p;
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

// log(1 + exp(x)) without overflow.
inline double log1pexp(double x) {
    if (x > 33.3) return x;
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

// Inverse standard-normal CDF: Acklam's rational approximation polished by a
// Halley step against erfc, giving ~1e-15 relative accuracy.
inline double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw std::domain_error("norm_quantile: p outside [0,1]");
    }
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    for (int i = 0; i < 2; ++i) {
        const double e = norm_cdf(x) - p;
        const double u = e * 2.50662827463100050242 * std::exp(0.5 * x * x);
        x = x - u / (1.0 + 0.5 * x * u);
    }
    return x;
}

inline double mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Two-pass sample variance, divisor n-1.
inline double sample_variance(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n < 2) throw std::invalid_argument("sample_variance: need at least 2 values");
    const double m = mean(v);
    double s = 0.0, comp = 0.0;
    for (double x : v) {
        const double d = x - m;
        s += d * d;
        comp += d;
    }
    return (s - comp * comp / static_cast<double>(n)) / static_cast<double>(n - 1);
}

inline double sample_covariance(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    if (n != b.size()) throw std::invalid_argument("sample_covariance: length mismatch");
    if (n < 2) throw std::invalid_argument("sample_covariance: need at least 2 values");
    const double ma = mean(a), mb = mean(b);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / static_cast<double>(n - 1);
}

}  // namespace covadj
