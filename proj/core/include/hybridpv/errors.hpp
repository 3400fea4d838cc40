#pragma once

#include <stdexcept>
#include <string>

namespace hpv {

/// Malformed or inconsistent run configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input data: weather or regulation CSV, results log (CLI exit code 3).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The simulated battery left the region where its equivalent circuit is valid
/// (CLI exit code 4).
class ModelValidityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative numerical routine did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hpv
