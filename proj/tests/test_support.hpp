#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "covadj/trial_data.hpp"

namespace test_support {

inline std::string fixture_path(const std::string& name) {
    return std::string(COVADJ_FIXTURE_DIR) + "/" + name;
}

inline nlohmann::json load_json(const std::string& name) {
    std::ifstream in(fixture_path(name));
    if (!in) throw std::runtime_error("missing fixture " + name);
    return nlohmann::json::parse(in);
}

inline Eigen::VectorXd to_vector(const nlohmann::json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
}

inline Eigen::MatrixXd to_matrix(const nlohmann::json& j) {
    const auto rows = j.size();
    const auto cols = j.at(0).size();
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t k = 0; k < cols; ++k)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                j[i][k].get<double>();
    return m;
}

inline covadj::TrialDataset load_fixture_csv(const std::string& name,
                                             const std::vector<std::string>& covariates) {
    return covadj::load_csv(fixture_path(name), "y", "z", covariates);
}

}  // namespace test_support
