#pragma once

#include <stdexcept>
#include <string>

namespace covadj {

// Input-data problems: malformed CSV, bad columns, invalid dataset shape.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingColumn : DataError {
    explicit MissingColumn(const std::string& column)
        : DataError("missing column '" + column + "'"), column(column) {}
    std::string column;
};

struct NonBinaryOutcome : DataError {
    NonBinaryOutcome(std::size_t row, const std::string& column, const std::string& value)
        : DataError("outcome column '" + column + "' has non-binary value '" + value +
                    "' at data row " + std::to_string(row)),
          row(row), column(column) {}
    std::size_t row;
    std::string column;
};

struct NonBinaryTreatment : DataError {
    NonBinaryTreatment(std::size_t row, const std::string& column, const std::string& value)
        : DataError("treatment column '" + column + "' has non-binary value '" + value +
                    "' at data row " + std::to_string(row)),
          row(row), column(column) {}
    std::size_t row;
    std::string column;
};

struct UnparsableNumeric : DataError {
    UnparsableNumeric(std::size_t row, const std::string& column, const std::string& value)
        : DataError("column '" + column + "' has unparsable numeric value '" + value +
                    "' at data row " + std::to_string(row)),
          row(row), column(column) {}
    std::size_t row;
    std::string column;
};

struct InvalidDataset : DataError {
    using DataError::DataError;
};

// Problems arising while estimating variances on otherwise valid fits.
struct EstimationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 1 - h_i vanished for an HC type that divides by it.
struct DegenerateLeverage : EstimationError {
    using EstimationError::EstimationError;
};

// The averaged information matrix is numerically singular.
struct SingularInformation : EstimationError {
    using EstimationError::EstimationError;
};

// An arm is too small for a sample variance.
struct DegenerateArm : EstimationError {
    using EstimationError::EstimationError;
};

struct NegativeVariance : EstimationError {
    using EstimationError::EstimationError;
};

}  // namespace covadj
