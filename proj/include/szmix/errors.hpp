// Copyright 2026 The szmix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace szmix {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SZMIX_DEFINE_ERROR(Name)                                  \
    class Name : public Error {                                   \
    public:                                                       \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

SZMIX_DEFINE_ERROR(NotSquare);
SZMIX_DEFINE_ERROR(NegativeEntry);
SZMIX_DEFINE_ERROR(NotErgodic);
SZMIX_DEFINE_ERROR(NotReversible);
SZMIX_DEFINE_ERROR(ZeroStationaryProbability);
SZMIX_DEFINE_ERROR(DimensionMismatch);
SZMIX_DEFINE_ERROR(InvalidDistribution);
SZMIX_DEFINE_ERROR(PreconditionViolated);
SZMIX_DEFINE_ERROR(TooFewStates);
SZMIX_DEFINE_ERROR(ConfigTooCoarse);
SZMIX_DEFINE_ERROR(DomainError);
SZMIX_DEFINE_ERROR(ExhaustedRetries);
SZMIX_DEFINE_ERROR(StepFailure);
SZMIX_DEFINE_ERROR(StepSizeUnderflow);
SZMIX_DEFINE_ERROR(ConfigParseError);
SZMIX_DEFINE_ERROR(IoError);
SZMIX_DEFINE_ERROR(SchemaError);

#undef SZMIX_DEFINE_ERROR

/// Raised when one of the two classification lemmas fails on a concrete
/// distribution. Firing means a bug, never bad input.
class LemmaViolation : public Error {
public:
    explicit LemmaViolation(const std::string& what) : Error("LemmaViolation: " + what) {}
};

/// A column of a transition matrix does not sum to one.
class ColumnSumViolation : public Error {
public:
    ColumnSumViolation(std::size_t column, double sum)
        : Error("ColumnSumViolation: column " + std::to_string(column) + " sums to " +
                std::to_string(sum)),
          column_(column),
          sum_(sum) {}

    std::size_t column() const noexcept { return column_; }
    double sum() const noexcept { return sum_; }

private:
    std::size_t column_;
    double sum_;
};

}  // namespace szmix
