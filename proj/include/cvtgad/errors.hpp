#pragma once

#include <stdexcept>
#include <string>

namespace cvtgad {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor shapes do not line up for the requested operation.
struct ShapeError : Error {
    using Error::Error;
};

// Operand outside the mathematical domain of the operation (log of a
// non-positive value, division by zero, non-finite attention logits).
struct DomainError : Error {
    using Error::Error;
};

// A caller broke an API precondition (non-scalar backward seed, negative
// input to L1 normalization, mismatched view sizes, empty segment).
struct ContractError : Error {
    using Error::Error;
};

// A required dataset file is missing or unreadable.
struct IngestError : Error {
    using Error::Error;
};

// A dataset file exists but its contents are malformed.
struct FormatError : Error {
    using Error::Error;
};

// Invalid or inconsistent experiment configuration.
struct ConfigError : Error {
    using Error::Error;
};

// The experimental protocol cannot proceed (no anomalous graphs, empty
// training set, minority-rule tie).
struct ProtocolError : Error {
    using Error::Error;
};

// A metric is undefined for the given inputs (single-class AUC).
struct MetricError : Error {
    using Error::Error;
};

}  // namespace cvtgad
