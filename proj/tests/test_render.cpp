#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "covadj/render.hpp"
#include "test_support.hpp"

using namespace covadj;

TEST_CASE("csv output round-trips analysis numbers at full precision", "[render]") {
    const TrialDataset data = test_support::load_fixture_csv("glm200.csv", {"x1", "x2"});
    const auto rows = analyze_all(data, all_core_methods(), 0.05);
    const std::string csv = render_analysis_csv(rows, 0.05);

    std::stringstream ss(csv);
    std::string line;
    std::getline(ss, line);  // header
    std::size_t idx = 0;
    while (std::getline(ss, line)) {
        const auto fields = detail::split_csv_line(line);
        REQUIRE(fields.size() >= 8);
        REQUIRE(rows[idx].summary.has_value());
        CHECK(std::stod(fields[1]) == rows[idx].summary->rd);
        CHECK(std::stod(fields[2]) == rows[idx].summary->se);
        CHECK(std::stod(fields[5]) == rows[idx].summary->p_value);
        ++idx;
    }
    CHECK(idx == rows.size());
}

TEST_CASE("json output parses and carries every method", "[render]") {
    const TrialDataset data = test_support::load_fixture_csv("glm200.csv", {"x1", "x2"});
    const auto rows = analyze_all(
        data, {VarianceMethod::M6_ProposedHC2, VarianceMethod::ProposedHC4m}, 0.05);
    const std::string text = render_analysis_json(rows, 0.05);
    const auto doc = nlohmann::json::parse(text);
    REQUIRE(doc["results"].size() == 2);
    CHECK(doc["results"][0]["method"] == "M6");
    CHECK(doc["results"][1]["method"] == "proposed-hc4m");
    CHECK(doc["results"][0]["rd"].get<double>() == rows[0].summary->rd);
}

TEST_CASE("text table includes labels and six-decimal numbers", "[render]") {
    const TrialDataset data = test_support::load_fixture_csv("glm200.csv", {"x1", "x2"});
    const auto rows = analyze_all(data, {VarianceMethod::M7_ProposedHC3}, 0.05);
    const std::string text = render_analysis_text(rows, 0.05);
    CHECK(text.find("M7: Proposed (HC3)") != std::string::npos);
    CHECK(text.find('.') != std::string::npos);
}

TEST_CASE("sim json echoes the config without thread or timing fields", "[render]") {
    SimConfig config;
    config.scenario = scenario_preset(5);
    config.n_total = 30;
    config.replications = 5;
    config.master_seed = 31;
    config.methods = {VarianceMethod::M8_UnadjustedHC2, VarianceMethod::M9_UnadjustedHC3};
    const SimMetrics metrics = run_study(config, 2);
    const std::string text = render_sim_json(metrics, config);
    const auto doc = nlohmann::json::parse(text);
    CHECK(doc["config"]["master_seed"] == 31);
    CHECK(doc["config"]["methods"].size() == 2);
    CHECK(doc["config"].find("threads") == doc["config"].end());
    CHECK(doc["methods"].size() == 2);
    CHECK(doc["replications"] == 5);
}

TEST_CASE("sim csv round-trips metrics at full precision", "[render]") {
    SimConfig config;
    config.scenario = scenario_preset(1);
    config.n_total = 40;
    config.replications = 25;
    config.master_seed = 99;
    config.methods = {VarianceMethod::M6_ProposedHC2, VarianceMethod::M8_UnadjustedHC2};
    const SimMetrics metrics = run_study(config, 2);
    const std::string csv = render_sim_csv(metrics, config);
    std::stringstream ss(csv);
    std::string line;
    std::getline(ss, line);  // header
    std::size_t idx = 0;
    while (std::getline(ss, line)) {
        const auto fields = detail::split_csv_line(line);
        REQUIRE(fields.size() == 10);
        CHECK(std::stod(fields[2]) == metrics.per_method[idx].mean_se);
        CHECK(std::stod(fields[3]) == metrics.per_method[idx].coverage);
        CHECK(std::stod(fields[9]) == metrics.true_rd);
        ++idx;
    }
    CHECK(idx == 2);
}

TEST_CASE("method names parse back from their ids", "[render]") {
    for (VarianceMethod m : all_core_methods()) CHECK(parse_method(method_id(m)) == m);
    CHECK(parse_method("proposed-hc4m") == VarianceMethod::ProposedHC4m);
    CHECK_FALSE(parse_method("M99").has_value());
}
