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

#include "cfisac/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace cfisac {
namespace {

static_assert(std::endian::native == std::endian::little,
              "golden records are written in native little-endian order");

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("truncated golden record");
  return v;
}

void put_c64(std::ostream& out, Complex z) {
  const std::array<float, 2> v{static_cast<float>(z.real()), static_cast<float>(z.imag())};
  out.write(reinterpret_cast<const char*>(v.data()), sizeof v);
}

Complex get_c64(std::istream& in) {
  std::array<float, 2> v{};
  in.read(reinterpret_cast<char*>(v.data()), sizeof v);
  if (!in) throw std::runtime_error("truncated golden record");
  return {v[0], v[1]};
}

void put_matrix(std::ostream& out, const CMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) put_c64(out, m(i, j));
}

CMatrix get_matrix(std::istream& in, Eigen::Index n) {
  CMatrix m(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) = get_c64(in);
  return m;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), r.ptr);
}

void write_long_csv(std::ostream& out, const ResultTable& table) {
  const std::string hash = std::to_string(table.config_hash);
  out << "experiment_id,sweep_point,metric,value,drop,config_hash\n";
  for (const auto& r : table.records)
    out << csv_field(table.experiment_id) << ',' << csv_field(r.sweep_point) << ','
        << csv_field(r.metric) << ',' << format_number(r.value) << ',' << r.drop << ',' << hash
        << '\n';
}

void write_aux_csv(std::ostream& out, const AuxTable& table) {
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out << (c ? "," : "") << csv_field(table.columns[c]);
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_field(row[c]);
    out << '\n';
  }
}

std::vector<std::filesystem::path> write_result_files(const std::filesystem::path& dir,
                                                      const ResultTable& table) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  auto open = [&](const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    paths.push_back(p);
    return f;
  };
  {
    std::ofstream f = open(dir / (table.experiment_id + ".csv"));
    write_long_csv(f, table);
  }
  for (const auto& aux : table.aux) {
    std::ofstream f = open(dir / aux.file_name);
    write_aux_csv(f, aux);
  }
  return paths;
}

std::vector<double> summarize_cdf(std::span<const double> samples, std::span<const double> grid) {
  if (samples.empty()) throw std::invalid_argument("CDF of an empty sample set");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(grid.size());
  const double n = static_cast<double>(sorted.size());
  for (double x : grid) {
    const auto count = std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
    out.push_back(static_cast<double>(count) / n);
  }
  return out;
}

void write_golden(std::ostream& out, const ChannelRealization& r) {
  const auto k = static_cast<std::uint32_t>(r.ue.size());
  const auto t = static_cast<std::uint32_t>(r.tx_aps.size());
  const auto rx = static_cast<std::uint32_t>(r.rx_aps.size());
  const auto n = static_cast<std::uint32_t>(r.num_antennas);
  const auto l = static_cast<std::uint32_t>(r.rcs.size());
  out.write("CFIR", 4);
  for (std::uint32_t v : {kGoldenVersion, k, t, rx, n, l}) put_u32(out, v);
  for (int m : r.tx_aps) put_u32(out, static_cast<std::uint32_t>(m));
  for (int m : r.rx_aps) put_u32(out, static_cast<std::uint32_t>(m));
  for (const auto& per_ue : r.ue)
    for (const auto& h : per_ue)
      for (Eigen::Index i = 0; i < h.size(); ++i) put_c64(out, h(i));
  for (const auto& row : r.ap_los)
    for (const auto& g : row) put_matrix(out, g);
  for (const auto& row : r.ap_nlos)
    for (const auto& g : row) put_matrix(out, g);
  for (std::size_t target = 0; target < r.rcs.size(); ++target)
    for (std::size_t a = 0; a < r.rcs[target].size(); ++a)
      for (std::size_t b = 0; b < r.rcs[target][a].size(); ++b) {
        put_c64(out, r.rcs[target][a][b]);
        put_c64(out, Complex(r.target_gain[target][a][b], 0.0));
        put_matrix(out, r.target_response[target][a][b]);
      }
  if (!out) throw std::runtime_error("failed to write golden record");
}

ChannelRealization read_golden(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || std::memcmp(magic.data(), "CFIR", 4) != 0)
    throw std::runtime_error("not a golden channel record");
  if (get_u32(in) != kGoldenVersion) throw std::runtime_error("unsupported golden version");
  const std::uint32_t k = get_u32(in), t = get_u32(in), rx = get_u32(in), n = get_u32(in),
                      l = get_u32(in);
  ChannelRealization r;
  r.num_antennas = static_cast<int>(n);
  for (std::uint32_t i = 0; i < t; ++i) r.tx_aps.push_back(static_cast<int>(get_u32(in)));
  for (std::uint32_t i = 0; i < rx; ++i) r.rx_aps.push_back(static_cast<int>(get_u32(in)));
  r.ue.assign(k, std::vector<CVector>(t));
  for (auto& per_ue : r.ue)
    for (auto& h : per_ue) {
      h.resize(n);
      for (std::uint32_t i = 0; i < n; ++i) h(i) = get_c64(in);
    }
  r.ap_los.assign(rx, std::vector<CMatrix>(t));
  r.ap_nlos.assign(rx, std::vector<CMatrix>(t));
  for (auto& row : r.ap_los)
    for (auto& g : row) g = get_matrix(in, n);
  for (auto& row : r.ap_nlos)
    for (auto& g : row) g = get_matrix(in, n);
  r.rcs.assign(l, std::vector<std::vector<Complex>>(rx, std::vector<Complex>(t)));
  r.target_gain.assign(l, std::vector<std::vector<double>>(rx, std::vector<double>(t)));
  r.target_response.assign(l, std::vector<std::vector<CMatrix>>(rx, std::vector<CMatrix>(t)));
  for (std::uint32_t target = 0; target < l; ++target)
    for (std::uint32_t a = 0; a < rx; ++a)
      for (std::uint32_t b = 0; b < t; ++b) {
        r.rcs[target][a][b] = get_c64(in);
        r.target_gain[target][a][b] = get_c64(in).real();
        r.target_response[target][a][b] = get_matrix(in, n);
      }
  return r;
}

}  // namespace cfisac
