// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace pinpoint {

/// Operand shapes do not line up for the requested operation.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A window, crop or index falls outside the structure it addresses.
class BoundsError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Invalid hyperparameters or an ill-posed configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// NaN/Inf reached a loss or gradient.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document (JSON/JSONL/CSV/config).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pinpoint
