// SPDX-FileCopyrightText: 2026 The voxnt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace voxnt {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Coordinate outside the grid.
class BoundsError : public Error {
public:
    using Error::Error;
};

// Malformed or truncated file, bad magic, size mismatch.
class FormatError : public Error {
public:
    using Error::Error;
};

// Operands whose dimensions or channel counts disagree.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Input values that break a type invariant (bad label, non-finite real, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Inconsistent thresholds, group counts or other user configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Scene specifications that cannot be rasterized or solved in closed form.
class SpecError : public Error {
public:
    using Error::Error;
};

// Filesystem failures; the message carries the path.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace voxnt
