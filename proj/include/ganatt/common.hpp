#pragma once

#include <stdexcept>
#include <string>

namespace ganatt {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Incompatible matrix/vector dimensions.
struct ShapeError : Error {
    using Error::Error;
};

// Invalid configuration values (counts, rates, paths).
struct ConfigError : Error {
    using Error::Error;
};

// Bad or degenerate input data.
struct DataError : Error {
    using Error::Error;
};

// Malformed file contents; message carries row/column where known.
struct ParseError : Error {
    using Error::Error;
};

struct TrainingError : Error {
    using Error::Error;
};

struct EstimationError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace ganatt
