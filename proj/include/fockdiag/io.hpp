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
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fockdiag/aspp_table.hpp"
#include "fockdiag/diagnosis.hpp"
#include "fockdiag/error.hpp"
#include "fockdiag/experiment.hpp"
#include "fockdiag/probability.hpp"

namespace fockdiag::io {

inline constexpr const char* kSchema = "fockdiag/v1";

/// Shortest text that round-trips to the same double.
inline std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw DomainError("malformed " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

inline std::int64_t parse_int(std::string_view text, std::string_view what) {
  std::int64_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw DomainError("malformed " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV: curves "eta,p_0,...,p_T" and counts "eta,shots,c_0,...,c_T"

inline std::string curve_header(int total) {
  std::string h = "eta";
  for (int s = 0; s <= total; ++s) h += ",p_" + std::to_string(s);
  return h;
}

inline std::string counts_header(int total) {
  std::string h = "eta,shots";
  for (int s = 0; s <= total; ++s) h += ",c_" + std::to_string(s);
  return h;
}

inline void write_curve_csv(std::ostream& os, const SignalCurve& curve) {
  os << curve_header(curve.state.total()) << '\n';
  for (const auto& row : curve.rows) {
    os << format_double(row.eta);
    for (double p : row.probs) os << ',' << format_double(p);
    os << '\n';
  }
}

inline std::vector<std::string> read_lines(std::istream& is) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

inline SignalCurve read_curve_csv(std::istream& is, const InputState& state) {
  const auto lines = read_lines(is);
  if (lines.empty() || lines.front() != curve_header(state.total())) {
    throw DomainError("curve CSV header must be '" + curve_header(state.total()) + "'");
  }
  SignalCurve curve{state, {}};
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split(lines[i], ',');
    if (static_cast<int>(fields.size()) != state.total() + 2) {
      throw DomainError("curve CSV line " + std::to_string(i + 1) + " has wrong field count");
    }
    OutcomeDistribution row{parse_double(fields[0], "eta"), {}};
    for (std::size_t f = 1; f < fields.size(); ++f) {
      row.probs.push_back(parse_double(fields[f], "probability"));
    }
    curve.rows.push_back(std::move(row));
  }
  return curve;
}

inline void write_counts_csv(std::ostream& os, const std::vector<CountRecord>& records, int total) {
  os << counts_header(total) << '\n';
  for (const auto& r : records) {
    os << format_double(r.eta) << ',' << r.shots;
    for (auto c : r.counts) os << ',' << c;
    os << '\n';
  }
}

inline std::vector<CountRecord> read_counts_csv(std::istream& is, const InputState& state) {
  const auto lines = read_lines(is);
  if (lines.empty() || lines.front() != counts_header(state.total())) {
    throw DomainError("counts CSV header must be '" + counts_header(state.total()) + "'");
  }
  std::vector<CountRecord> records;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split(lines[i], ',');
    if (static_cast<int>(fields.size()) != state.total() + 3) {
      throw DomainError("counts CSV line " + std::to_string(i + 1) + " has wrong field count");
    }
    CountRecord r{parse_double(fields[0], "eta"), parse_int(fields[1], "shots"), {}};
    for (std::size_t f = 2; f < fields.size(); ++f) r.counts.push_back(parse_int(fields[f], "count"));
    records.push_back(std::move(r));
  }
  return records;
}

// ---------------------------------------------------------------------------
// JSON

using nlohmann::json;

inline json envelope(const std::string& command) {
  json j;
  j["schema"] = kSchema;
  j["command"] = command;
  return j;
}

inline json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

inline json to_json(const DecoherenceParams& p) {
  return {{"gamma_dist", p.gamma_dist}, {"gamma_phase", p.gamma_phase}, {"gamma_mix", p.gamma_mix}};
}

inline json to_json(const AsppTable& table) {
  json arr = json::array();
  for (const auto& [key, value] : table.entries()) {
    arr.push_back({{"m", key.m}, {"k", key.k}, {"value", value}});
  }
  return arr;
}

inline json to_json(const Observables21& o) {
  return {{"v21", o.v21}, {"v30", o.v30}, {"p_sum", o.p_sum}};
}

inline json to_json(const Observables22& o) { return {{"p13", o.p13}, {"p22", o.p22}}; }

inline json to_json(const DiagnosisResult& r) {
  return {{"gamma_dist", optional_number(r.gamma_dist)},
          {"gamma_phase", optional_number(r.gamma_phase)},
          {"gamma_mix", optional_number(r.gamma_mix)},
          {"dist_mix_product", optional_number(r.dist_mix_product)},
          {"identifiability", to_string(r.identifiability)},
          {"residual", r.residual},
          {"projected", r.projected}};
}

inline json to_json(const std::vector<CountRecord>& records) {
  json arr = json::array();
  for (const auto& r : records) arr.push_back({{"eta", r.eta}, {"shots", r.shots}, {"counts", r.counts}});
  return arr;
}

inline std::vector<CountRecord> counts_from_json(const json& j, const InputState& state) {
  const json& arr = j.contains("records") ? j.at("records") : j;
  std::vector<CountRecord> records;
  for (const auto& item : arr) {
    CountRecord r{item.at("eta").get<double>(), item.at("shots").get<std::int64_t>(),
                  item.at("counts").get<std::vector<std::int64_t>>()};
    if (static_cast<int>(r.counts.size()) != state.total() + 1) {
      throw DomainError("counts JSON record has wrong channel count");
    }
    records.push_back(std::move(r));
  }
  return records;
}

inline json to_json(const EstimatedObservables& e) {
  json j;
  if (e.state.is_twin()) {
    j["values"] = to_json(e.obs22());
    j["std_errors"] = {{"p13", e.std_errors[0]}, {"p22", e.std_errors[1]}};
  } else {
    j["values"] = to_json(e.obs21());
    j["std_errors"] = {{"v21", e.std_errors[0]}, {"v30", e.std_errors[1]}, {"p_sum", e.std_errors[2]}};
    j["v21_sign_confidence"] = e.v21_sign_confidence;
    j["v21_sign_resolved"] = e.v21_sign_resolved;
  }
  j["shots_total"] = e.shots_total;
  j["physical"] = e.physical;
  return j;
}

}  // namespace fockdiag::io
