// covadj: standardized risk-difference estimation for randomized trials with
// a family of variance estimators, plus a simulation harness for their
// operating characteristics.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "covadj/covadj.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDataError = 2;
constexpr int kExitEstimationError = 3;

void emit(const std::string& text, const std::string& output_path) {
    if (output_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(output_path);
    if (!out) throw covadj::DataError("cannot write output file '" + output_path + "'");
    out << text;
}

covadj::OutputFormat parse_format(const std::string& name) {
    if (name == "text") return covadj::OutputFormat::Text;
    if (name == "csv") return covadj::OutputFormat::Csv;
    if (name == "json") return covadj::OutputFormat::Json;
    throw covadj::DataError("unknown format '" + name + "' (use text, csv, or json)");
}

std::vector<covadj::VarianceMethod> parse_methods(const std::vector<std::string>& names) {
    std::vector<covadj::VarianceMethod> methods;
    for (const auto& entry : names) {
        std::stringstream ss(entry);
        std::string token;
        while (std::getline(ss, token, ',')) {
            token = covadj::detail::trim(token);
            if (token.empty()) continue;
            const auto m = covadj::parse_method(token);
            if (!m) throw covadj::DataError("unknown method '" + token + "'");
            methods.push_back(*m);
        }
    }
    if (methods.empty()) methods = covadj::all_core_methods();
    return methods;
}

unsigned resolve_threads(unsigned flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("COVADJ_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return 0;  // auto
}

int cmd_analyze(const std::string& input, const std::string& outcome_col,
                const std::string& treatment_col, const std::vector<std::string>& covariate_args,
                const std::vector<std::string>& method_args, double alpha,
                const std::string& format_name, const std::string& output_path,
                const std::string& arm_a, const std::string& arm_b) {
    const covadj::OutputFormat format = parse_format(format_name);
    std::vector<std::string> covariates;
    for (const auto& entry : covariate_args) {
        std::stringstream ss(entry);
        std::string token;
        while (std::getline(ss, token, ','))
            if (!covadj::detail::trim(token).empty())
                covariates.push_back(covadj::detail::trim(token));
    }
    const auto methods = parse_methods(method_args);
    if (arm_a.empty() != arm_b.empty())
        throw covadj::DataError("--arm-a and --arm-b must be given together");

    std::optional<std::string> a, b;
    if (!arm_a.empty()) {
        a = arm_a;
        b = arm_b;
    }
    const covadj::TrialDataset data =
        covadj::load_csv(input, outcome_col, treatment_col, covariates, a, b);
    const auto rows = covadj::analyze_all(data, methods, alpha);

    bool any_ok = false;
    for (const auto& row : rows) any_ok = any_ok || row.summary.has_value();

    std::string text;
    switch (format) {
        case covadj::OutputFormat::Text: text = covadj::render_analysis_text(rows, alpha); break;
        case covadj::OutputFormat::Csv: text = covadj::render_analysis_csv(rows, alpha); break;
        case covadj::OutputFormat::Json: text = covadj::render_analysis_json(rows, alpha); break;
    }
    emit(text, output_path);
    return any_ok ? kExitOk : kExitEstimationError;
}

int cmd_simulate(const std::string& config_path, const std::string& format_name,
                 const std::string& output_path, unsigned threads) {
    const covadj::OutputFormat format = parse_format(format_name);
    const covadj::SimConfig config = covadj::load_sim_config(config_path);
    const covadj::SimMetrics metrics = covadj::run_study(config, resolve_threads(threads));
    std::string text;
    switch (format) {
        case covadj::OutputFormat::Text: text = covadj::render_sim_text(metrics, config); break;
        case covadj::OutputFormat::Csv: text = covadj::render_sim_csv(metrics, config); break;
        case covadj::OutputFormat::Json: text = covadj::render_sim_json(metrics, config); break;
    }
    emit(text, output_path);
    return kExitOk;
}

int cmd_true_rd(const std::vector<double>& beta, const std::string& format_name,
                const std::string& output_path) {
    const covadj::OutputFormat format = parse_format(format_name);
    if (beta.size() != 7)
        throw covadj::DataError("--beta needs exactly 7 comma-separated coefficients");
    covadj::Scenario scenario;
    std::copy(beta.begin(), beta.end(), scenario.beta.begin());
    const covadj::TrueEffect eff = covadj::true_effect(scenario);
    std::string text;
    switch (format) {
        case covadj::OutputFormat::Text: text = covadj::render_true_effect_text(eff); break;
        case covadj::OutputFormat::Csv: text = covadj::render_true_effect_csv(eff); break;
        case covadj::OutputFormat::Json: text = covadj::render_true_effect_json(eff); break;
    }
    emit(text, output_path);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Standardized risk-difference estimation and simulation"};
    app.require_subcommand(1);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Analyze a CSV trial dataset");
    std::string input, outcome_col, treatment_col, arm_a, arm_b;
    std::vector<std::string> covariate_args, method_args;
    double alpha = 0.05;
    std::string a_format = "text", a_output;
    analyze->add_option("--input", input, "CSV file")->required();
    analyze->add_option("--outcome", outcome_col, "outcome column (0/1)")->required();
    analyze->add_option("--treatment", treatment_col, "treatment column")->required();
    analyze->add_option("--covariates", covariate_args,
                        "covariate columns, comma-separated or repeated");
    analyze->add_option("--methods", method_args,
                        "methods (M1..M9, proposed-model, proposed-const, proposed-hc0, "
                        "proposed-hc1, proposed-hc4, proposed-hc4m, proposed-hc5); default all "
                        "M1..M9");
    analyze->add_option("--alpha", alpha, "two-sided level (default 0.05)");
    analyze->add_option("--format", a_format, "text|csv|json");
    analyze->add_option("--output", a_output, "write to file instead of stdout");
    analyze->add_option("--arm-a", arm_a, "treatment-column label mapped to arm 1");
    analyze->add_option("--arm-b", arm_b, "treatment-column label mapped to arm 0");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Run a simulation study from a config file");
    std::string config_path, s_format = "text", s_output;
    unsigned threads = 0;
    simulate->add_option("--config", config_path, "config file")->required();
    simulate->add_option("--format", s_format, "text|csv|json");
    simulate->add_option("--output", s_output, "write to file instead of stdout");
    simulate->add_option("--threads", threads,
                         "worker threads (default: COVADJ_THREADS or hardware)");

    // true-rd
    auto* truerd = app.add_subcommand("true-rd", "Population risk difference for a generator");
    std::vector<double> beta;
    std::string t_format = "text", t_output;
    truerd->add_option("--beta", beta, "7 coefficients b0..b6")->required()->delimiter(',');
    truerd->add_option("--format", t_format, "text|csv|json");
    truerd->add_option("--output", t_output, "write to file instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(analyze))
            return cmd_analyze(input, outcome_col, treatment_col, covariate_args, method_args,
                               alpha, a_format, a_output, arm_a, arm_b);
        if (app.got_subcommand(simulate))
            return cmd_simulate(config_path, s_format, s_output, threads);
        if (app.got_subcommand(truerd)) return cmd_true_rd(beta, t_format, t_output);
    } catch (const covadj::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDataError;
    } catch (const covadj::EstimationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitEstimationError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDataError;
    }
    return kExitOk;
}
