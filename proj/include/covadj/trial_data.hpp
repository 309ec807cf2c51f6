#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "covadj/errors.hpp"

namespace covadj {

struct TrialRecord {
    int outcome = 0;    // 0/1
    int treatment = 0;  // 0/1
    std::vector<double> covariates;
};

// Subject-level data. covariate_names also fixes the non-convergence drop
// order: the last declared covariate is dropped first.
struct TrialDataset {
    std::vector<TrialRecord> records;
    std::vector<std::string> covariate_names;

    std::size_t n() const { return records.size(); }

    Eigen::VectorXd outcomes() const {
        Eigen::VectorXd y(records.size());
        for (std::size_t i = 0; i < records.size(); ++i) y[i] = records[i].outcome;
        return y;
    }

    Eigen::VectorXd treatments() const {
        Eigen::VectorXd z(records.size());
        for (std::size_t i = 0; i < records.size(); ++i) z[i] = records[i].treatment;
        return z;
    }

    std::size_t arm_size(int arm) const {
        std::size_t c = 0;
        for (const auto& r : records) c += (r.treatment == arm);
        return c;
    }
};

inline void validate(const TrialDataset& data) {
    if (data.n() < 2) throw InvalidDataset("dataset needs at least 2 subjects");
    if (data.arm_size(0) == 0 || data.arm_size(1) == 0)
        throw InvalidDataset("both treatment arms must be nonempty");
    std::set<std::string> seen;
    for (const auto& name : data.covariate_names)
        if (!seen.insert(name).second)
            throw InvalidDataset("duplicate covariate name '" + name + "'");
    for (const auto& r : data.records)
        if (r.covariates.size() != data.covariate_names.size())
            throw InvalidDataset("covariate vector length mismatch");
}

enum class ColumnKind { Intercept, Treatment, Covariate };

struct ColumnRole {
    ColumnKind kind;
    std::string name;
};

struct DesignMatrix {
    Eigen::MatrixXd rows;  // n x p, row i = (1, z_i, w_i')
    std::vector<ColumnRole> column_roles;

    Eigen::Index n() const { return rows.rows(); }
    Eigen::Index p() const { return rows.cols(); }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline double parse_double(const std::string& text, std::size_t row, const std::string& column) {
    const std::string t = trim(text);
    if (t.empty()) throw UnparsableNumeric(row, column, text);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || !std::isfinite(v))
        throw UnparsableNumeric(row, column, text);
    return v;
}

inline int parse_binary(const std::string& text, std::size_t row, const std::string& column,
                        bool is_outcome) {
    double v;
    try {
        v = parse_double(text, row, column);
    } catch (const UnparsableNumeric&) {
        throw;
    }
    if (v == 0.0) return 0;
    if (v == 1.0) return 1;
    if (is_outcome) throw NonBinaryOutcome(row, column, trim(text));
    throw NonBinaryTreatment(row, column, trim(text));
}

}  // namespace detail

// Reads a plain comma-separated file (header row, no quoting). When arm_a and
// arm_b are given, the treatment column is matched against those labels
// (arm_a -> 1, arm_b -> 0) and rows belonging to other arms are skipped.
inline TrialDataset load_csv(const std::string& path, const std::string& outcome_col,
                             const std::string& treatment_col,
                             const std::vector<std::string>& covariate_cols,
                             const std::optional<std::string>& arm_a = std::nullopt,
                             const std::optional<std::string>& arm_b = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file '" + path + "'");
    const auto header = detail::split_csv_line(line);

    auto column_index = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw MissingColumn(name);
        return static_cast<std::size_t>(it - header.begin());
    };

    const std::size_t yi = column_index(outcome_col);
    const std::size_t zi = column_index(treatment_col);
    std::vector<std::size_t> ci;
    ci.reserve(covariate_cols.size());
    for (const auto& c : covariate_cols) ci.push_back(column_index(c));

    TrialDataset data;
    data.covariate_names = covariate_cols;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != header.size())
            throw DataError("row " + std::to_string(row) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
        TrialRecord rec;
        if (arm_a && arm_b) {
            const std::string label = detail::trim(fields[zi]);
            if (label == *arm_a)
                rec.treatment = 1;
            else if (label == *arm_b)
                rec.treatment = 0;
            else
                continue;  // row from another arm
        } else {
            rec.treatment = detail::parse_binary(fields[zi], row, treatment_col, false);
        }
        rec.outcome = detail::parse_binary(fields[yi], row, outcome_col, true);
        rec.covariates.reserve(ci.size());
        for (std::size_t k = 0; k < ci.size(); ++k)
            rec.covariates.push_back(detail::parse_double(fields[ci[k]], row, covariate_cols[k]));
        data.records.push_back(std::move(rec));
    }
    validate(data);
    return data;
}

// Full-precision writer; load_csv(write_csv(data)) reproduces every value bit
// for bit.
inline void write_csv(const TrialDataset& data, const std::string& path,
                      const std::string& outcome_col = "y",
                      const std::string& treatment_col = "z") {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file '" + path + "'");
    out << outcome_col << ',' << treatment_col;
    for (const auto& name : data.covariate_names) out << ',' << name;
    out << '\n';
    char buf[64];
    for (const auto& r : data.records) {
        out << r.outcome << ',' << r.treatment;
        for (double v : r.covariates) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
}

// Design matrix (1, z, retained covariates in declared order).
inline DesignMatrix build_design(const TrialDataset& data,
                                 const std::vector<std::string>& retained_covariates) {
    std::vector<std::size_t> idx;
    std::vector<std::string> names;
    for (std::size_t k = 0; k < data.covariate_names.size(); ++k) {
        const auto& name = data.covariate_names[k];
        if (std::find(retained_covariates.begin(), retained_covariates.end(), name) !=
            retained_covariates.end()) {
            idx.push_back(k);
            names.push_back(name);
        }
    }
    if (names.size() != retained_covariates.size())
        throw std::invalid_argument("retained covariate not present in dataset");

    const auto n = static_cast<Eigen::Index>(data.n());
    const auto p = static_cast<Eigen::Index>(2 + idx.size());
    DesignMatrix design;
    design.rows.resize(n, p);
    design.column_roles.push_back({ColumnKind::Intercept, "(intercept)"});
    design.column_roles.push_back({ColumnKind::Treatment, "treatment"});
    for (const auto& name : names) design.column_roles.push_back({ColumnKind::Covariate, name});
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = data.records[static_cast<std::size_t>(i)];
        design.rows(i, 0) = 1.0;
        design.rows(i, 1) = r.treatment;
        for (std::size_t k = 0; k < idx.size(); ++k)
            design.rows(i, static_cast<Eigen::Index>(2 + k)) = r.covariates[idx[k]];
    }
    return design;
}

struct RankStatus {
    bool full_rank = true;
    std::vector<std::size_t> dependent_columns;  // indices into column_roles
};

// Column-by-column Gram-Schmidt with re-orthogonalization; a column whose
// residual drops below 1e-10 of its original norm is linearly dependent on
// the columns declared before it.
inline RankStatus check_rank(const DesignMatrix& design) {
    constexpr double kRelTol = 1e-10;
    RankStatus status;
    std::vector<Eigen::VectorXd> basis;
    for (Eigen::Index j = 0; j < design.p(); ++j) {
        Eigen::VectorXd v = design.rows.col(j);
        const double norm0 = v.norm();
        if (norm0 == 0.0) {
            status.dependent_columns.push_back(static_cast<std::size_t>(j));
            continue;
        }
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : basis) v -= q.dot(v) * q;
        if (v.norm() <= kRelTol * norm0) {
            status.dependent_columns.push_back(static_cast<std::size_t>(j));
        } else {
            basis.push_back(v / v.norm());
        }
    }
    status.full_rank = status.dependent_columns.empty();
    return status;
}

}  // namespace covadj
