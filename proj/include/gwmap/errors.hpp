#ifndef GWMAP_ERRORS_HPP
#define GWMAP_ERRORS_HPP

#include <stdexcept>
#include <string>

/**
 * @file errors.hpp
 *
 * @brief Exception types thrown by the library.
 *
 * Everything derives from `gwmap::Error`, so callers that do not care about
 * the category can catch a single type. The CLI maps categories onto exit codes.
 */

namespace gwmap {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A point or matrix has the wrong dimension for the model or dataset.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Invalid settings: out-of-range k, too many units, unknown field selector, etc.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input data cannot be used: too few points, all points identical, non-finite values.
class DataError : public Error {
public:
    using Error::Error;
};

/// Malformed file contents. The message names the row/column or JSON field path.
class ParseError : public DataError {
public:
    using DataError::DataError;
};

/// Influence is undefined for a transformation matrix with no nonzero entries.
class DegenerateMatrixError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss.
class NumericalError : public Error {
public:
    using Error::Error;
};

}

#endif
