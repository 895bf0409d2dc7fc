// Copyright 2026 The fockdiag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace fockdiag {

/// Base of every exception thrown by the library. `code()` is a stable,
/// machine-readable identifier used by the CLI error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message) : Error("domain_error", message) {}
};

/// A required ASPP entry (m, k) is absent from the table.
class MissingAsppError : public Error {
 public:
  MissingAsppError(int m, int k)
      : Error("missing_aspp", "missing ASPP entry (m=" + std::to_string(m) +
                                  ", k=" + std::to_string(k) + ")"),
        m_(m),
        k_(k) {}

  int m() const noexcept { return m_; }
  int k() const noexcept { return k_; }

 private:
  int m_;
  int k_;
};

/// Internal consistency check failed (e.g. a probability far below zero).
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& message) : Error("contract_error", message) {}
};

/// Linear system for ASPP inference has insufficient numerical rank.
class RankDeficientError : public Error {
 public:
  RankDeficientError(int rank, int unknowns)
      : Error("rank_deficient", "ASPP system is rank deficient: numerical rank " +
                                    std::to_string(rank) + " of " +
                                    std::to_string(unknowns) + " unknowns"),
        rank_(rank),
        unknowns_(unknowns) {}

  int rank() const noexcept { return rank_; }
  int unknowns() const noexcept { return unknowns_; }

 private:
  int rank_;
  int unknowns_;
};

}  // namespace fockdiag
