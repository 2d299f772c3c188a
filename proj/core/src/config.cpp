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

#include "cfisac/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace cfisac {
namespace {

struct Field {
  std::string section;
  std::string key;
  std::function<void(SystemConfig&, const std::string&)> set;
  std::function<std::string(const SystemConfig&)> get;
};

template <typename T>
T parse_value(const std::string& section, const std::string& key, const std::string& text) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      std::string v = boost::algorithm::to_lower_copy(boost::algorithm::trim_copy(text));
      if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
      if (v == "false" || v == "0" || v == "no" || v == "off") return false;
      throw boost::bad_lexical_cast();
    } else {
      return boost::lexical_cast<T>(boost::algorithm::trim_copy(text));
    }
  } catch (const boost::bad_lexical_cast&) {
    throw ConfigError("invalid value '" + text + "' for key " + section + "." + key);
  }
}

template <typename T>
std::string print_value(const T& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_floating_point_v<T>) {
    // Shortest text that round-trips exactly.
    std::array<char, 64> buf{};
    const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), r.ptr);
  } else {
    return std::to_string(v);
  }
}

template <typename T>
Field make_field(std::string section, std::string key, T SystemConfig::*member) {
  const std::string s = section, k = key;
  return {std::move(section), std::move(key),
          [member, s, k](SystemConfig& c, const std::string& text) {
            c.*member = parse_value<T>(s, k, text);
          },
          [member](const SystemConfig& c) { return print_value(c.*member); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(make_field("scenario", "area_km2", &SystemConfig::area_km2));
    f.push_back(make_field("scenario", "num_aps", &SystemConfig::num_aps));
    f.push_back(make_field("scenario", "num_rx_aps", &SystemConfig::num_rx_aps));
    f.push_back(make_field("scenario", "num_ues", &SystemConfig::num_ues));
    f.push_back(make_field("scenario", "num_targets", &SystemConfig::num_targets));
    f.push_back(make_field("scenario", "num_regions", &SystemConfig::num_regions));
    f.push_back(make_field("scenario", "antennas_per_ap", &SystemConfig::antennas_per_ap));
    f.push_back(make_field("scenario", "serving_cluster_size", &SystemConfig::serving_cluster_size));
    f.push_back(make_field("scenario", "tx_aps_per_task", &SystemConfig::tx_aps_per_task));
    f.push_back(make_field("scenario", "rx_aps_per_task", &SystemConfig::rx_aps_per_task));
    f.push_back(make_field("scenario", "ue_height_m", &SystemConfig::ue_height_m));
    f.push_back(make_field("scenario", "ap_height_m", &SystemConfig::ap_height_m));
    f.push_back(make_field("scenario", "target_height_min_m", &SystemConfig::target_height_min_m));
    f.push_back(make_field("scenario", "target_height_max_m", &SystemConfig::target_height_max_m));
    f.push_back(make_field("scenario", "cell_pitch_m", &SystemConfig::cell_pitch_m));
    f.push_back(make_field("scenario", "strict_grid", &SystemConfig::strict_grid));
    f.push_back(make_field("scenario", "allow_degenerate_rank", &SystemConfig::allow_degenerate_rank));
    f.push_back({"scenario", "receive_ap_indices",
                 [](SystemConfig& c, const std::string& text) {
                   c.receive_ap_indices.clear();
                   std::vector<std::string> parts;
                   std::string t = boost::algorithm::trim_copy(text);
                   if (t.empty()) return;
                   boost::algorithm::split(parts, t, boost::algorithm::is_any_of(","));
                   for (const auto& p : parts)
                     c.receive_ap_indices.push_back(
                         parse_value<int>("scenario", "receive_ap_indices", p));
                 },
                 [](const SystemConfig& c) {
                   std::string out;
                   for (std::size_t i = 0; i < c.receive_ap_indices.size(); ++i) {
                     if (i) out += ",";
                     out += std::to_string(c.receive_ap_indices[i]);
                   }
                   return out;
                 }});
    f.push_back(make_field("scenario", "rng_seed", &SystemConfig::rng_seed));

    f.push_back(make_field("channels", "carrier_freq_hz", &SystemConfig::carrier_freq_hz));
    f.push_back(make_field("channels", "element_spacing", &SystemConfig::element_spacing));
    f.push_back(make_field("channels", "ue_angular_spread_deg", &SystemConfig::ue_angular_spread_deg));
    f.push_back(make_field("channels", "ap_angular_spread_deg", &SystemConfig::ap_angular_spread_deg));
    f.push_back(make_field("channels", "rcs_view_width_deg", &SystemConfig::rcs_view_width_deg));
    f.push_back(make_field("channels", "rcs_variance_dbsm", &SystemConfig::rcs_variance_dbsm));
    f.push_back(make_field("channels", "clutter_scale", &SystemConfig::clutter_scale));

    f.push_back(make_field("estimation", "pilot_len", &SystemConfig::pilot_len));
    f.push_back(make_field("estimation", "pilot_power_w", &SystemConfig::pilot_power_w));
    f.push_back(make_field("estimation", "pilot_reuse", &SystemConfig::pilot_reuse));

    f.push_back(make_field("precoding", "coherence_block", &SystemConfig::coherence_block));
    f.push_back(make_field("precoding", "data_len", &SystemConfig::data_len));
    f.push_back(make_field("precoding", "sensing_len", &SystemConfig::sensing_len));
    f.push_back(make_field("precoding", "ap_power_w", &SystemConfig::ap_power_w));
    f.push_back(make_field("precoding", "unit_norm_sensing", &SystemConfig::unit_norm_sensing));
    f.push_back(make_field("precoding", "tracking_error_std_rad", &SystemConfig::tracking_error_std_rad));
    f.push_back(make_field("precoding", "tracking_error_per_ap", &SystemConfig::tracking_error_per_ap));
    f.push_back({"precoding", "symbols",
                 [](SystemConfig& c, const std::string& text) {
                   std::string v = boost::algorithm::to_lower_copy(boost::algorithm::trim_copy(text));
                   if (v == "gaussian") c.symbols = SymbolAlphabet::kGaussian;
                   else if (v == "qpsk") c.symbols = SymbolAlphabet::kQpsk;
                   else throw ConfigError("invalid value '" + text + "' for key precoding.symbols");
                 },
                 [](const SystemConfig& c) {
                   return std::string(c.symbols == SymbolAlphabet::kQpsk ? "qpsk" : "gaussian");
                 }});

    f.push_back(make_field("comm_metrics", "bandwidth_hz", &SystemConfig::bandwidth_hz));
    f.push_back(make_field("comm_metrics", "noise_psd_dbm_hz", &SystemConfig::noise_psd_dbm_hz));
    f.push_back(make_field("comm_metrics", "interference_map_samples",
                           &SystemConfig::interference_map_samples));

    f.push_back({"sensing", "whitening",
                 [](SystemConfig& c, const std::string& text) {
                   std::string v = boost::algorithm::to_lower_copy(boost::algorithm::trim_copy(text));
                   if (v == "eigen") c.whitening = WhiteningMethod::kEigen;
                   else if (v == "cholesky") c.whitening = WhiteningMethod::kCholesky;
                   else throw ConfigError("invalid value '" + text + "' for key sensing.whitening");
                 },
                 [](const SystemConfig& c) {
                   return std::string(c.whitening == WhiteningMethod::kCholesky ? "cholesky" : "eigen");
                 }});
    f.push_back(make_field("sensing", "false_alarm_prob", &SystemConfig::false_alarm_prob));
    f.push_back(make_field("sensing", "far_target_approximation",
                           &SystemConfig::far_target_approximation));
    f.push_back(make_field("sensing", "interference_radius_m", &SystemConfig::interference_radius_m));

    f.push_back(make_field("power", "kappa_c", &SystemConfig::kappa_c));
    f.push_back(make_field("power", "kappa_s", &SystemConfig::kappa_s));
    f.push_back(make_field("power", "sir_target_db", &SystemConfig::sir_target_db));
    f.push_back(make_field("power", "bisection_tol", &SystemConfig::bisection_tol));
    f.push_back(make_field("power", "sca_tol", &SystemConfig::sca_tol));
    f.push_back(make_field("power", "sca_max_iter", &SystemConfig::sca_max_iter));

    f.push_back(make_field("harness", "num_drops", &SystemConfig::num_drops));
    f.push_back(make_field("harness", "num_fading", &SystemConfig::num_fading));
    f.push_back(make_field("harness", "full_scale_drops", &SystemConfig::full_scale_drops));
    f.push_back(make_field("harness", "full_scale_fading", &SystemConfig::full_scale_fading));
    f.push_back(make_field("harness", "max_trials", &SystemConfig::max_trials));
    f.push_back(make_field("harness", "sweep_fading", &SystemConfig::sweep_fading));
    return f;
  }();
  return table;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

double SystemConfig::side_m() const { return std::sqrt(area_km2) * 1000.0; }

double SystemConfig::noise_power_w() const {
  return db_to_linear(noise_psd_dbm_hz - 30.0) * bandwidth_hz;
}

void SystemConfig::validate() const {
  require(area_km2 > 0.0, "scenario.area_km2 must be positive");
  require(num_aps >= 1, "scenario.num_aps must be at least 1");
  require(num_rx_aps >= 0 && num_rx_aps < num_aps,
          "scenario.num_rx_aps must leave at least one transmit AP");
  require(num_ues >= 1, "scenario.num_ues must be at least 1");
  require(num_targets >= 0, "scenario.num_targets must be non-negative");
  require(num_regions >= 1, "scenario.num_regions must be at least 1");
  require(antennas_per_ap >= 1, "scenario.antennas_per_ap must be at least 1");
  require(serving_cluster_size >= 1 && serving_cluster_size <= num_tx_aps(),
          "scenario.serving_cluster_size must be in [1, number of transmit APs]");
  require(tx_aps_per_task >= 1 && tx_aps_per_task <= num_tx_aps(),
          "scenario.tx_aps_per_task must be in [1, number of transmit APs]");
  require(rx_aps_per_task >= 1, "scenario.rx_aps_per_task must be at least 1");
  require(num_rx_aps == 0 || rx_aps_per_task <= num_rx_aps,
          "scenario.rx_aps_per_task exceeds the receive AP pool");
  require(ue_height_m >= 0.0 && ap_height_m >= 0.0, "heights must be non-negative");
  require(target_height_min_m >= 0.0 && target_height_max_m >= target_height_min_m,
          "scenario.target_height range is empty");
  require(cell_pitch_m > 0.0, "scenario.cell_pitch_m must be positive");
  if (!receive_ap_indices.empty()) {
    require(static_cast<int>(receive_ap_indices.size()) == num_rx_aps,
            "scenario.receive_ap_indices must list exactly num_rx_aps entries");
    std::set<int> seen;
    for (int i : receive_ap_indices) {
      require(i >= 0 && i < num_aps, "scenario.receive_ap_indices entry out of range");
      require(seen.insert(i).second, "scenario.receive_ap_indices has duplicates");
    }
  }
  if (strict_grid) {
    const int root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(num_regions))));
    require(root * root == num_regions, "scenario.num_regions is not a perfect square (strict_grid)");
  }

  require(carrier_freq_hz > 0.0, "channels.carrier_freq_hz must be positive");
  require(element_spacing > 0.0, "channels.element_spacing must be positive");
  require(ue_angular_spread_deg >= 0.0 && ap_angular_spread_deg >= 0.0,
          "angular spreads must be non-negative");
  require(rcs_view_width_deg > 0.0, "channels.rcs_view_width_deg must be positive");
  require(clutter_scale >= 0.0 && clutter_scale <= 1.0, "channels.clutter_scale must lie in [0, 1]");

  require(pilot_len >= 1, "estimation.pilot_len must be at least 1");
  require(pilot_reuse || pilot_len >= num_ues,
          "estimation.pilot_len below num_ues requires pilot_reuse");
  require(pilot_len <= coherence_block, "estimation.pilot_len exceeds the coherence block");
  require(pilot_power_w > 0.0, "estimation.pilot_power_w must be positive");

  require(coherence_block >= 1, "precoding.coherence_block must be at least 1");
  require(data_len >= 1 && data_len <= coherence_block, "precoding.data_len must be in [1, tau_c]");
  require(sensing_len >= 1 && sensing_len <= coherence_block,
          "precoding.sensing_len must be in [1, tau_c]");
  require(ap_power_w > 0.0, "precoding.ap_power_w must be positive");
  require(tracking_error_std_rad >= 0.0, "precoding.tracking_error_std_rad must be non-negative");
  require(allow_degenerate_rank || antennas_per_ap * sensing_len >= tx_aps_per_task,
          "antennas_per_ap * sensing_len must be at least tx_aps_per_task");

  require(bandwidth_hz > 0.0, "comm_metrics.bandwidth_hz must be positive");
  require(interference_map_samples >= 1, "comm_metrics.interference_map_samples must be positive");

  require(false_alarm_prob > 0.0 && false_alarm_prob < 1.0,
          "sensing.false_alarm_prob must lie in (0, 1)");
  require(interference_radius_m >= 0.0, "sensing.interference_radius_m must be non-negative");

  require(bisection_tol > 0.0 && sca_tol > 0.0, "power tolerances must be positive");
  require(sca_max_iter >= 1, "power.sca_max_iter must be at least 1");

  require(num_drops >= 1 && num_fading >= 1, "harness drop and fading counts must be positive");
  require(full_scale_drops >= 1 && full_scale_fading >= 1, "harness full-scale counts must be positive");
  require(max_trials >= 1, "harness.max_trials must be positive");
  require(sweep_fading >= 1, "harness.sweep_fading must be positive");
}

SystemConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.message() + " (line " +
                      std::to_string(e.line()) + ")");
  }

  SystemConfig config;
  std::set<std::string> given;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("key '" + section + "' outside of any section");
    for (const auto& [key, value] : body) {
      const auto& table = fields();
      auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) {
        return f.section == section && f.key == key;
      });
      if (it == table.end()) throw ConfigError("unknown config key " + section + "." + key);
      it->set(config, value.data());
      given.insert(section + "." + key);
    }
  }

  // Derived defaults for keys whose baseline value scales with other keys.
  if (!given.count("scenario.num_rx_aps")) config.num_rx_aps = config.num_aps / 4;
  if (!given.count("estimation.pilot_len")) config.pilot_len = config.num_ues;
  if (!given.count("precoding.data_len"))
    config.data_len = std::max(1, config.coherence_block - config.pilot_len);
  return config;
}

SystemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

std::string format_config(const SystemConfig& config) {
  std::ostringstream os;
  std::string current;
  for (const auto& f : fields()) {
    if (f.section != current) {
      if (!current.empty()) os << "\n";
      os << "[" << f.section << "]\n";
      current = f.section;
    }
    os << f.key << " = " << f.get(config) << "\n";
  }
  return os.str();
}

std::uint64_t config_hash(const SystemConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : format_config(config)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace cfisac
