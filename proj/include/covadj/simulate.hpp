#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "covadj/inference.hpp"
#include "covadj/quadrature.hpp"
#include "covadj/rng.hpp"
#include "covadj/trial_data.hpp"

namespace covadj {

// Outcome generator
//   logit P(Y=1) = b0 + b1 Z + b2 Xc + b3 Xb + b4 Xc^2 + b5 Xc Z + b6 Xc^2 Z
// with Xc standard normal and Xb Bernoulli(1/2).
struct Scenario {
    std::array<double, 7> beta{};
    std::string label;
    std::optional<double> true_rd;  // computed by quadrature when absent

    double eta(double z, double xc, double xb) const {
        const double xc2 = xc * xc;
        return beta[0] + beta[1] * z + beta[2] * xc + beta[3] * xb + beta[4] * xc2 +
               beta[5] * xc * z + beta[6] * xc2 * z;
    }
};

// Built-in presets 1..5. Preset 4's linear interaction coefficient is +0.2:
// that is the value consistent with the preset's documented response rates
// (0.17, 0.28) and risk difference (0.11).
inline Scenario scenario_preset(int k) {
    switch (k) {
        case 1: return {{-1.7, 1.1, 3.0, -3.0, 0, 0, 0}, "scenario1", std::nullopt};
        case 2: return {{-4.0, 2.0, 4.2, -3.0, 0, 0, 0}, "scenario2", std::nullopt};
        case 3: return {{-1.2, 0.0, 1.0, -1.0, 0, 0, 0}, "scenario3", std::nullopt};
        case 4: return {{-4.0, 2.0, 4.2, -3.0, 1.0, 0.2, 0.2}, "scenario4", std::nullopt};
        case 5: return {{-2.2, 0.7, 0, 0, 0, 0, 0}, "scenario5", std::nullopt};
    }
    throw std::invalid_argument("scenario preset must be 1..5");
}

struct RandomizationScheme {
    enum class Variant { StratifiedFixed, Simple };
    Variant variant = Variant::StratifiedFixed;
    int ratio_treat = 1;    // StratifiedFixed
    int ratio_control = 1;  // StratifiedFixed
    double p_treat = 0.5;   // Simple
};

struct SimConfig {
    Scenario scenario;
    RandomizationScheme scheme;
    std::size_t n_total = 0;
    std::size_t replications = 0;
    double alpha = 0.05;
    std::uint64_t master_seed = 0;
    std::vector<VarianceMethod> methods = all_core_methods();
    FitConfig fit;
};

inline void gen_covariates(std::size_t n, Rng& rng, std::vector<double>& x_cont,
                           std::vector<double>& x_cat) {
    x_cont.resize(n);
    x_cat.resize(n);
    for (std::size_t i = 0; i < n; ++i) x_cont[i] = rng.normal();
    for (std::size_t i = 0; i < n; ++i) x_cat[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
}

// StratifiedFixed: within each x_cat stratum, a randomly permuted fixed
// allocation. Treated counts follow cumulative largest-remainder rounding
// across strata (ties toward treatment) so the overall split matches the
// ratio up to rounding. Simple: iid Bernoulli(p_treat).
inline std::vector<int> randomize(const std::vector<double>& x_cat,
                                  const RandomizationScheme& scheme, Rng& rng) {
    const std::size_t n = x_cat.size();
    std::vector<int> z(n, 0);
    if (scheme.variant == RandomizationScheme::Variant::Simple) {
        for (std::size_t i = 0; i < n; ++i) z[i] = rng.bernoulli(scheme.p_treat) ? 1 : 0;
        return z;
    }
    const double frac = static_cast<double>(scheme.ratio_treat) /
                        (scheme.ratio_treat + scheme.ratio_control);
    double cum_size = 0.0;
    std::size_t cum_treated = 0;
    for (double level : {0.0, 1.0}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i)
            if (x_cat[i] == level) members.push_back(i);
        if (members.empty()) continue;
        cum_size += static_cast<double>(members.size());
        const auto target = static_cast<std::size_t>(std::floor(cum_size * frac + 0.5));
        const std::size_t treated_here = target - cum_treated;
        cum_treated = target;
        std::vector<int> assignment(members.size(), 0);
        for (std::size_t k = 0; k < treated_here; ++k) assignment[k] = 1;
        rng.shuffle(assignment);
        for (std::size_t k = 0; k < members.size(); ++k) z[members[k]] = assignment[k];
    }
    return z;
}

inline std::vector<int> gen_outcome(const std::vector<int>& z, const std::vector<double>& x_cont,
                                    const std::vector<double>& x_cat, const Scenario& scenario,
                                    Rng& rng) {
    const std::size_t n = z.size();
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double p = invlogit(scenario.eta(z[i], x_cont[i], x_cat[i]));
        y[i] = rng.bernoulli(p) ? 1 : 0;
    }
    return y;
}

struct TrueEffect {
    double pi0 = 0.0;
    double pi1 = 0.0;
    double rd = 0.0;
};

// Population response rates under both assignments: 64-node Gauss-Hermite
// over the continuous covariate crossed with the two binary levels at weight
// 1/2 each. Accuracy target 1e-6.
inline TrueEffect true_effect(const Scenario& scenario) {
    static const GaussHermiteRule rule = gauss_hermite(64);
    TrueEffect eff;
    for (double xb : {0.0, 1.0}) {
        eff.pi1 += 0.5 * gauss_hermite_expectation(
                             rule, [&](double xc) { return invlogit(scenario.eta(1, xc, xb)); });
        eff.pi0 += 0.5 * gauss_hermite_expectation(
                             rule, [&](double xc) { return invlogit(scenario.eta(0, xc, xb)); });
    }
    eff.rd = eff.pi1 - eff.pi0;
    return eff;
}

inline double true_rd(const Scenario& scenario) {
    if (scenario.true_rd) return *scenario.true_rd;
    return true_effect(scenario).rd;
}

struct MethodOutcome {
    bool ok = false;
    double rd = 0.0;
    double se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct ReplicationRecord {
    std::vector<MethodOutcome> methods;  // parallel to config.methods
    bool adjusted_converged = false;
    int fallback_steps = 0;
};

// One complete replication; everything derives from (master_seed, index), so
// records are identical no matter which thread runs them. Draw order within
// the stream: X_cont, X_cat, randomization permutations, outcomes.
inline ReplicationRecord run_replication(const SimConfig& config, std::size_t replication_index) {
    Rng rng = Rng::for_replication(config.master_seed, replication_index);
    std::vector<double> x_cont, x_cat;
    gen_covariates(config.n_total, rng, x_cont, x_cat);
    const std::vector<int> z = randomize(x_cat, config.scheme, rng);
    const std::vector<int> y = gen_outcome(z, x_cont, x_cat, config.scenario, rng);

    TrialDataset data;
    data.covariate_names = {"x_cont", "x_cat"};
    data.records.resize(config.n_total);
    for (std::size_t i = 0; i < config.n_total; ++i)
        data.records[i] = {y[i], z[i], {x_cont[i], x_cat[i]}};

    ReplicationRecord rec;
    rec.methods.resize(config.methods.size());

    bool degenerate = data.arm_size(0) == 0 || data.arm_size(1) == 0;
    if (degenerate) return rec;  // no estimates possible

    const std::vector<AnalysisRow> rows = analyze_all(data, config.methods, config.alpha,
                                                      config.fit);
    for (std::size_t j = 0; j < rows.size(); ++j) {
        const auto& row = rows[j];
        if (!row.summary) continue;
        rec.methods[j] = {true, row.summary->rd, row.summary->se, row.summary->ci_low,
                          row.summary->ci_high};
        if (is_adjusted(row.method)) {
            rec.adjusted_converged = true;
            rec.fallback_steps = row.summary->fallback_steps;
        }
    }
    return rec;
}

struct MethodMetrics {
    VarianceMethod method{};
    std::size_t n_estimates = 0;
    double mean_se = 0.0;
    double coverage = 0.0;
    double rejection_rate = 0.0;
    double mean_rd = 0.0;
    double empirical_sd_rd = 0.0;
    double nonconvergence_rate = 0.0;
    double fallback_rate = 0.0;
};

struct SimMetrics {
    double true_rd = 0.0;
    std::size_t replications = 0;
    std::vector<MethodMetrics> per_method;
};

// Runs all replications (work-shared across threads, atomically indexed) and
// aggregates in replication order, so the result is invariant to thread
// count and scheduling.
inline SimMetrics run_study(const SimConfig& config, unsigned threads = 0) {
    if (config.replications < 1) throw std::invalid_argument("replications >= 1 required");
    if (config.n_total < 4) throw std::invalid_argument("n_total >= 4 required");
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(config.replications));

    std::vector<ReplicationRecord> records(config.replications);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= config.replications) return;
            records[i] = run_replication(config, i);
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    SimMetrics metrics;
    metrics.true_rd = true_rd(config.scenario);
    metrics.replications = config.replications;
    const double target = metrics.true_rd;

    for (std::size_t j = 0; j < config.methods.size(); ++j) {
        MethodMetrics m;
        m.method = config.methods[j];
        std::size_t covered = 0, rejected = 0, fallbacks = 0;
        double se_sum = 0.0, se_comp = 0.0;
        double rd_sum = 0.0, rd_sq = 0.0;
        for (const auto& rec : records) {
            const MethodOutcome& out = rec.methods[j];
            if (!out.ok) continue;
            ++m.n_estimates;
            // Kahan-compensated running sums keep the means order-stable.
            double t = out.se - se_comp;
            double s = se_sum + t;
            se_comp = (s - se_sum) - t;
            se_sum = s;
            rd_sum += out.rd;
            rd_sq += out.rd * out.rd;
            covered += (out.ci_low <= target && target <= out.ci_high);
            rejected += (out.ci_low > 0.0 || out.ci_high < 0.0);
            fallbacks += (is_adjusted(m.method) && rec.fallback_steps > 0);
        }
        const double ne = static_cast<double>(m.n_estimates);
        if (m.n_estimates > 0) {
            m.mean_se = se_sum / ne;
            m.coverage = static_cast<double>(covered) / ne;
            m.rejection_rate = static_cast<double>(rejected) / ne;
            m.mean_rd = rd_sum / ne;
            if (m.n_estimates > 1)
                m.empirical_sd_rd =
                    std::sqrt(std::max(0.0, (rd_sq - rd_sum * rd_sum / ne) / (ne - 1.0)));
            m.fallback_rate = static_cast<double>(fallbacks) / ne;
        }
        m.nonconvergence_rate = 1.0 - ne / static_cast<double>(config.replications);
        metrics.per_method.push_back(m);
    }
    return metrics;
}

}  // namespace covadj
