#pragma once

#include <cstdio>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "covadj/inference.hpp"
#include "covadj/sim_config.hpp"
#include "covadj/simulate.hpp"

namespace covadj {

enum class OutputFormat { Text, Csv, Json };

namespace detail {

inline std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// Shortest-exact for CSV, so parsing the output reproduces the doubles.
inline std::string full_precision(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace detail

inline std::string render_analysis_text(const std::vector<AnalysisRow>& rows, double alpha) {
    std::ostringstream out;
    out << "method                  rd        se        ci_low    ci_high   p_value   fallback\n";
    out << "(two-sided alpha = " << detail::fixed6(alpha) << ")\n";
    for (const auto& row : rows) {
        out << detail::pad(method_label(row.method), 22);
        if (row.summary) {
            const auto& s = *row.summary;
            out << ' ' << detail::fixed6(s.rd) << ' ' << detail::fixed6(s.se) << ' '
                << detail::fixed6(s.ci_low) << ' ' << detail::fixed6(s.ci_high) << ' '
                << detail::fixed6(s.p_value) << ' ' << s.fallback_steps;
        } else {
            out << " error: " << row.error;
        }
        out << '\n';
    }
    return out.str();
}

inline std::string render_analysis_csv(const std::vector<AnalysisRow>& rows, double alpha) {
    std::ostringstream out;
    out << "method,rd,se,ci_low,ci_high,p_value,alpha,fallback_steps,error\n";
    for (const auto& row : rows) {
        out << method_id(row.method) << ',';
        if (row.summary) {
            const auto& s = *row.summary;
            out << detail::full_precision(s.rd) << ',' << detail::full_precision(s.se) << ','
                << detail::full_precision(s.ci_low) << ',' << detail::full_precision(s.ci_high)
                << ',' << detail::full_precision(s.p_value) << ','
                << detail::full_precision(alpha) << ',' << s.fallback_steps << ',';
        } else {
            out << ",,,,," << detail::full_precision(alpha) << ",," << row.error;
        }
        out << '\n';
    }
    return out.str();
}

inline std::string render_analysis_json(const std::vector<AnalysisRow>& rows, double alpha) {
    nlohmann::ordered_json doc;
    doc["alpha"] = alpha;
    doc["results"] = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json r;
        r["method"] = method_id(row.method);
        r["label"] = method_label(row.method);
        if (row.summary) {
            const auto& s = *row.summary;
            r["rd"] = s.rd;
            r["se"] = s.se;
            r["ci_low"] = s.ci_low;
            r["ci_high"] = s.ci_high;
            r["p_value"] = s.p_value;
            r["fallback_steps"] = s.fallback_steps;
        } else {
            r["error"] = row.error;
        }
        doc["results"].push_back(std::move(r));
    }
    return doc.dump(1) + "\n";
}

inline nlohmann::ordered_json config_json(const SimConfig& config) {
    nlohmann::ordered_json c;
    c["scenario"]["label"] = config.scenario.label;
    c["scenario"]["beta"] = config.scenario.beta;
    if (config.scenario.true_rd) c["scenario"]["true_rd"] = *config.scenario.true_rd;
    c["scheme"]["variant"] =
        config.scheme.variant == RandomizationScheme::Variant::StratifiedFixed ? "stratified"
                                                                               : "simple";
    if (config.scheme.variant == RandomizationScheme::Variant::StratifiedFixed)
        c["scheme"]["ratio"] = std::to_string(config.scheme.ratio_treat) + ":" +
                               std::to_string(config.scheme.ratio_control);
    else
        c["scheme"]["p_treat"] = config.scheme.p_treat;
    c["n_total"] = config.n_total;
    c["replications"] = config.replications;
    c["alpha"] = config.alpha;
    c["master_seed"] = config.master_seed;
    auto methods = nlohmann::ordered_json::array();
    for (VarianceMethod m : config.methods) methods.push_back(method_id(m));
    c["methods"] = std::move(methods);
    return c;
}

inline std::string render_sim_text(const SimMetrics& metrics, const SimConfig& config) {
    std::ostringstream out;
    out << "scenario: " << (config.scenario.label.empty() ? "(unnamed)" : config.scenario.label)
        << "  n_total: " << config.n_total << "  replications: " << metrics.replications
        << "  true_rd: " << detail::fixed6(metrics.true_rd) << '\n';
    out << "method                  mean_se   coverage  rejection mean_rd    sd_rd     "
           "nonconv   fallback\n";
    for (const auto& m : metrics.per_method) {
        out << detail::pad(method_label(m.method), 22) << ' ' << detail::fixed6(m.mean_se) << ' '
            << detail::fixed6(m.coverage) << ' ' << detail::fixed6(m.rejection_rate) << ' '
            << detail::fixed6(m.mean_rd) << ' ' << detail::fixed6(m.empirical_sd_rd) << ' '
            << detail::fixed6(m.nonconvergence_rate) << ' ' << detail::fixed6(m.fallback_rate)
            << '\n';
    }
    return out.str();
}

inline std::string render_sim_csv(const SimMetrics& metrics, const SimConfig&) {
    std::ostringstream out;
    out << "method,n_estimates,mean_se,coverage,rejection_rate,mean_rd,empirical_sd_rd,"
           "nonconvergence_rate,fallback_rate,true_rd\n";
    for (const auto& m : metrics.per_method) {
        out << method_id(m.method) << ',' << m.n_estimates << ','
            << detail::full_precision(m.mean_se) << ',' << detail::full_precision(m.coverage)
            << ',' << detail::full_precision(m.rejection_rate) << ','
            << detail::full_precision(m.mean_rd) << ','
            << detail::full_precision(m.empirical_sd_rd) << ','
            << detail::full_precision(m.nonconvergence_rate) << ','
            << detail::full_precision(m.fallback_rate) << ','
            << detail::full_precision(metrics.true_rd) << '\n';
    }
    return out.str();
}

inline std::string render_sim_json(const SimMetrics& metrics, const SimConfig& config) {
    nlohmann::ordered_json doc;
    doc["config"] = config_json(config);
    doc["true_rd"] = metrics.true_rd;
    doc["replications"] = metrics.replications;
    doc["methods"] = nlohmann::ordered_json::array();
    for (const auto& m : metrics.per_method) {
        nlohmann::ordered_json r;
        r["method"] = method_id(m.method);
        r["label"] = method_label(m.method);
        r["n_estimates"] = m.n_estimates;
        r["mean_se"] = m.mean_se;
        r["coverage"] = m.coverage;
        r["rejection_rate"] = m.rejection_rate;
        r["mean_rd"] = m.mean_rd;
        r["empirical_sd_rd"] = m.empirical_sd_rd;
        r["nonconvergence_rate"] = m.nonconvergence_rate;
        r["fallback_rate"] = m.fallback_rate;
        doc["methods"].push_back(std::move(r));
    }
    return doc.dump(1) + "\n";
}

inline std::string render_true_effect_text(const TrueEffect& eff) {
    std::ostringstream out;
    out << "pi0: " << detail::fixed6(eff.pi0) << '\n'
        << "pi1: " << detail::fixed6(eff.pi1) << '\n'
        << "rd:  " << detail::fixed6(eff.rd) << '\n';
    return out.str();
}

inline std::string render_true_effect_csv(const TrueEffect& eff) {
    std::ostringstream out;
    out << "pi0,pi1,rd\n"
        << detail::full_precision(eff.pi0) << ',' << detail::full_precision(eff.pi1) << ','
        << detail::full_precision(eff.rd) << '\n';
    return out.str();
}

inline std::string render_true_effect_json(const TrueEffect& eff) {
    nlohmann::ordered_json doc;
    doc["pi0"] = eff.pi0;
    doc["pi1"] = eff.pi1;
    doc["rd"] = eff.rd;
    return doc.dump(1) + "\n";
}

}  // namespace covadj
