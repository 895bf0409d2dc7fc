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

#include <charconv>
#include <string>
#include <string_view>

#include "fockdiag/error.hpp"

namespace fockdiag {

enum class StateKind { DoubleFockSuperposition, TwinFock };

/// Bosonic two-mode input: either the double-Fock superposition
/// (|N,M> + |M,N>)/sqrt(2) with N > M >= 0, or the twin-Fock state |N,N>.
class InputState {
 public:
  static InputState double_fock(int n, int m) {
    if (!(n > m && m >= 0)) {
      throw DomainError("double-Fock superposition requires N > M >= 0, got N=" +
                        std::to_string(n) + ", M=" + std::to_string(m));
    }
    return InputState(StateKind::DoubleFockSuperposition, n, m);
  }

  static InputState twin_fock(int n) {
    if (n < 1) throw DomainError("twin-Fock state requires N >= 1, got N=" + std::to_string(n));
    return InputState(StateKind::TwinFock, n, n);
  }

  /// Parses "N:M" (double-Fock) or "N,N" (twin-Fock).
  static InputState parse(std::string_view text) {
    const auto sep = text.find_first_of(":,");
    if (sep == std::string_view::npos) {
      throw DomainError("state must be written N:M or N,N, got '" + std::string(text) + "'");
    }
    const int n = parse_int(text.substr(0, sep), text);
    const int m = parse_int(text.substr(sep + 1), text);
    if (text[sep] == ':') return double_fock(n, m);
    if (n != m) {
      throw DomainError("twin-Fock state N,N requires equal counts, got '" + std::string(text) + "'");
    }
    return twin_fock(n);
  }

  StateKind kind() const noexcept { return kind_; }
  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }
  int total() const noexcept { return n_ + m_; }
  /// Harmonic order of the phase dependence, N - M.
  int harmonic() const noexcept { return n_ - m_; }
  bool is_twin() const noexcept { return kind_ == StateKind::TwinFock; }

  std::string label() const {
    return std::to_string(n_) + (is_twin() ? "," : ":") + std::to_string(m_);
  }

  friend bool operator==(const InputState&, const InputState&) = default;

 private:
  InputState(StateKind kind, int n, int m) : kind_(kind), n_(n), m_(m) {}

  static int parse_int(std::string_view part, std::string_view whole) {
    int value = 0;
    const auto* end = part.data() + part.size();
    auto [ptr, ec] = std::from_chars(part.data(), end, value);
    if (ec != std::errc() || ptr != end || part.empty()) {
      throw DomainError("malformed state '" + std::string(whole) + "'");
    }
    return value;
  }

  StateKind kind_;
  int n_;
  int m_;
};

}  // namespace fockdiag
