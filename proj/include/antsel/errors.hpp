#pragma once

#include <stdexcept>

namespace antsel {

/// Invalid configuration value (dimensions, rates, grids, spec files).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Operands whose shapes do not line up (subset vs. matrix, batch vs. chromosome).
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite inputs or a failed factorization.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Requested combinatorial work exceeds the configured budget.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace antsel
