/*
 * Copyright 2026 The OPE Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#pragma once

#include <stdexcept>
#include <string>

namespace ope {

enum class ErrorKind {
    InvalidArgument,
    Config,
    Data,
    NumericalDegeneracy,
    OptimizationFailure,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), m_kind(kind) {}

    ErrorKind kind() const noexcept { return m_kind; }

private:
    ErrorKind m_kind;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(ErrorKind::InvalidArgument, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

/// Malformed or inconsistent input data (training files, designs).
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

/// A matrix that should be positive definite failed to factorize.
class NumericalDegeneracy : public Error {
public:
    explicit NumericalDegeneracy(const std::string& what)
        : Error(ErrorKind::NumericalDegeneracy, what) {}
};

class OptimizationFailure : public Error {
public:
    explicit OptimizationFailure(const std::string& what)
        : Error(ErrorKind::OptimizationFailure, what) {}
};

} // namespace ope
