// cfisac: cell-free ISAC simulation library
// Copyright 2026 The cfisac Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cfisac/channels.hpp"

namespace cfisac {

// One long-format result row.
struct ResultRecord {
  std::string sweep_point;  // e.g. "sigma_alpha2_dbsm=10;varsigma=0.01;mode=isac"
  std::string metric;
  double value = 0.0;
  int drop = -1;  // -1 for aggregates
};

// A figure-style side table, written verbatim as CSV.
struct AuxTable {
  std::string file_name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

struct ResultTable {
  std::string experiment_id;
  std::uint64_t config_hash = 0;
  std::vector<ResultRecord> records;
  std::vector<AuxTable> aux;
  int failed_trials = 0;
  int total_trials = 0;
};

// Shortest round-trip decimal text of a double; stable across runs.
std::string format_number(double value);

// Columns: experiment_id,sweep_point,metric,value,drop,config_hash
void write_long_csv(std::ostream& out, const ResultTable& table);
void write_aux_csv(std::ostream& out, const AuxTable& table);

// Writes <experiment_id>.csv plus every aux table into dir; returns the paths.
std::vector<std::filesystem::path> write_result_files(const std::filesystem::path& dir,
                                                      const ResultTable& table);

// Empirical CDF of samples at each grid point. Throws on empty input.
std::vector<double> summarize_cdf(std::span<const double> samples, std::span<const double> grid);

// Binary golden record: "CFIR", u32 version, u32 K, T, R, N, L, then
// little-endian complex64 arrays: UE channels [k][t][n], direct-path LoS and
// NLoS [r][t] as column-major N x N, and per (target, r, t) the RCS, the path
// gain (imaginary part zero) and the column-major N x N response.
inline constexpr std::uint32_t kGoldenVersion = 1;

void write_golden(std::ostream& out, const ChannelRealization& realization);
ChannelRealization read_golden(std::istream& in);

}  // namespace cfisac
