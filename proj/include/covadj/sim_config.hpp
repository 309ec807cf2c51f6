#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "covadj/simulate.hpp"
#include "covadj/trial_data.hpp"

namespace covadj {

struct ConfigError : DataError {
    using DataError::DataError;
};

namespace detail {

inline double config_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse number '" + value + "'");
    }
}

inline std::uint64_t config_u64(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError("key '" + key + "': cannot parse integer '" + value + "'");
    return v;
}

}  // namespace detail

// Line-oriented `key = value` format, '#' starts a comment. Keys:
//   scenario.label          optional name
//   scenario.beta[k]        k in 0..6, unset coefficients default to 0
//   scenario.true_rd        optional; computed by quadrature when absent
//   scheme.variant          stratified | simple
//   scheme.ratio            T:C, stratified only
//   scheme.p_treat          simple only
//   n_total, replications, alpha, master_seed
//   methods[] = M6          repeatable; "methods = M1,M2" also accepted
inline SimConfig parse_sim_config(std::istream& in) {
    SimConfig config;
    config.methods.clear();
    bool any_method = false;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(trimmed.substr(0, eq));
        const std::string value = detail::trim(trimmed.substr(eq + 1));

        if (key == "scenario.label") {
            config.scenario.label = value;
        } else if (key.rfind("scenario.beta[", 0) == 0 && key.back() == ']') {
            const std::string idx = key.substr(14, key.size() - 15);
            if (idx.size() != 1 || idx[0] < '0' || idx[0] > '6')
                throw ConfigError("key '" + key + "': index must be 0..6");
            config.scenario.beta[static_cast<std::size_t>(idx[0] - '0')] =
                detail::config_double(key, value);
        } else if (key == "scenario.true_rd") {
            config.scenario.true_rd = detail::config_double(key, value);
        } else if (key == "scheme.variant") {
            if (value == "stratified")
                config.scheme.variant = RandomizationScheme::Variant::StratifiedFixed;
            else if (value == "simple")
                config.scheme.variant = RandomizationScheme::Variant::Simple;
            else
                throw ConfigError("scheme.variant must be 'stratified' or 'simple', got '" +
                                  value + "'");
        } else if (key == "scheme.ratio") {
            const auto colon = value.find(':');
            if (colon == std::string::npos)
                throw ConfigError("scheme.ratio must look like 2:1, got '" + value + "'");
            config.scheme.ratio_treat = static_cast<int>(
                detail::config_u64(key, detail::trim(value.substr(0, colon))));
            config.scheme.ratio_control = static_cast<int>(
                detail::config_u64(key, detail::trim(value.substr(colon + 1))));
            if (config.scheme.ratio_treat < 1 || config.scheme.ratio_control < 1)
                throw ConfigError("scheme.ratio components must be positive");
        } else if (key == "scheme.p_treat") {
            config.scheme.p_treat = detail::config_double(key, value);
            if (!(config.scheme.p_treat > 0.0 && config.scheme.p_treat < 1.0))
                throw ConfigError("scheme.p_treat must lie in (0,1)");
        } else if (key == "n_total") {
            config.n_total = detail::config_u64(key, value);
        } else if (key == "replications") {
            config.replications = detail::config_u64(key, value);
        } else if (key == "alpha") {
            config.alpha = detail::config_double(key, value);
            if (!(config.alpha > 0.0 && config.alpha < 1.0))
                throw ConfigError("alpha must lie in (0,1)");
        } else if (key == "master_seed") {
            config.master_seed = detail::config_u64(key, value);
        } else if (key == "methods[]" || key == "methods") {
            std::stringstream ss(value);
            std::string token;
            while (std::getline(ss, token, ',')) {
                token = detail::trim(token);
                if (token.empty()) continue;
                const auto m = parse_method(token);
                if (!m) throw ConfigError("unknown method '" + token + "'");
                config.methods.push_back(*m);
                any_method = true;
            }
        } else {
            throw ConfigError("unknown key '" + key + "' at line " + std::to_string(lineno));
        }
    }
    if (!any_method) config.methods = all_core_methods();
    if (config.n_total < 4) throw ConfigError("n_total >= 4 required");
    if (config.replications < 1) throw ConfigError("replications >= 1 required");
    return config;
}

inline SimConfig load_sim_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_sim_config(in);
}

}  // namespace covadj
