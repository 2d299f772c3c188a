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

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>

#include "cfisac/harness.hpp"

namespace cfisac {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::pair<ExperimentId, std::string>>& registry() {
  static const std::vector<std::pair<ExperimentId, std::string>> r = {
      {ExperimentId::kMissVsRcs, "miss_vs_rcs"},
      {ExperimentId::kScnrCdf, "scnr_cdf"},
      {ExperimentId::kRateCdf, "rate_cdf"},
      {ExperimentId::kKSweep, "k_sweep"},
      {ExperimentId::kTausSweep, "taus_sweep"},
      {ExperimentId::kArchitectureAblation, "architecture_ablation"},
      {ExperimentId::kFpcSweep, "fpc_sweep"},
      {ExperimentId::kSicnrCdf, "sicnr_cdf"},
      {ExperimentId::kOpcVsFpc, "opc_vs_fpc"},
  };
  return r;
}

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double to_db(double x) { return x > 0.0 ? linear_to_db(x) : -std::numeric_limits<double>::infinity(); }

std::string kv(const std::string& key, double value) { return key + "=" + format_number(value); }
std::string kv(const std::string& key, const std::string& value) { return key + "=" + value; }

template <typename... Parts>
std::string join(const Parts&... parts) {
  std::string out;
  ((out += (out.empty() ? "" : ";") + parts), ...);
  return out;
}

// Per-UE rates in Mbit/s.
std::vector<double> rates_mbps(const DropContext& drop, const PowerAllocation& alloc) {
  const auto& c = drop.config;
  std::vector<double> out;
  for (const auto& t : drop_sinr(drop, alloc))
    out.push_back(achievable_rate(t.gamma(), c.data_len, c.coherence_block, c.bandwidth_hz) / 1e6);
  return out;
}

TransmitFrame make_frame(const DropContext& drop, const PowerAllocation& alloc,
                         const FadingDraw& fd) {
  return assemble_tx_signal(alloc, fd.beams, fd.symbols, drop.phase, drop.budget,
                            drop.config.antennas_per_ap, drop.config.sensing_len);
}

// Finite samples on a uniform grid spanning their range.
AuxTable cdf_table(const std::string& file, const std::string& value_column,
                   const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  AuxTable t{file, {"series", value_column, "cdf"}, {}};
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& [name, v] : series)
    for (double x : v)
      if (std::isfinite(x)) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
  if (!(lo <= hi)) return t;
  lo = std::floor(lo);
  hi = std::ceil(hi);
  constexpr int kPoints = 101;
  std::vector<double> grid(kPoints);
  for (int i = 0; i < kPoints; ++i) grid[i] = lo + (hi - lo) * i / (kPoints - 1);
  for (const auto& [name, v] : series) {
    if (v.empty()) continue;
    const auto cdf = summarize_cdf(v, grid);
    for (int i = 0; i < kPoints; ++i)
      t.rows.push_back({name, format_number(grid[i]), format_number(cdf[i])});
  }
  return t;
}

class Runner {
 public:
  Runner(const ExperimentPlan& plan, const SystemConfig& config, const RunOptions& options)
      : plan_(plan), config_(config), options_(options) {
    table_.experiment_id = experiment_name(plan.id);
    table_.config_hash = config_hash(config);
  }

  ResultTable run();

 private:
  RandomStream drop_stream(int d) const {
    return RandomStream(plan_.seed).substream(static_cast<std::uint64_t>(d));
  }

  void log(const std::string& msg) {
    if (!options_.log) return;
    std::lock_guard<std::mutex> lock(log_mutex_);
    options_.log(msg);
  }

  template <typename T>
  std::vector<std::optional<T>> drops(const std::string& label, int trials_per_drop,
                                      const std::function<T(int)>& work) {
    auto res = for_each_drop<T>(plan_.num_drops, options_.jobs, [&](int d) {
      T value = work(d);
      log(label + " drop " + std::to_string(d + 1) + "/" + std::to_string(plan_.num_drops));
      return value;
    });
    table_.total_trials += plan_.num_drops * trials_per_drop;
    table_.failed_trials += res.failed * trials_per_drop;
    for (int d = 0; d < plan_.num_drops; ++d)
      if (!res.values[d]) log(label + " drop " + std::to_string(d) + " failed: " + res.errors[d]);
    return std::move(res.values);
  }

  void add(const std::string& point, const std::string& metric, double value, int drop = -1) {
    table_.records.push_back({point, metric, value, drop});
  }

  void miss_vs_rcs();
  void scnr_cdf();
  void rate_cdf();
  void k_sweep();
  void taus_sweep();
  void architecture_ablation();
  void fpc_sweep();
  void sicnr_cdf();
  void opc_vs_fpc();

  // Detection pools for `study` under `config`, merged over drops in order.
  DetectionPools detection_pools(const std::string& label, const SystemConfig& config,
                                 const DetectionStudy& study) {
    auto values = drops<DetectionPools>(label, study.fading_per_drop, [&](int d) {
      RandomStream rng = drop_stream(d);
      RandomStream drop_rng = rng.substream(0);
      const DropContext drop = build_drop(config, SensingMode::kDetection, {},
                                          static_cast<std::size_t>(d), drop_rng);
      RandomStream trial_rng = rng.substream(1);
      return run_detection_drop(drop, study, trial_rng);
    });
    DetectionPools all;
    for (auto& v : values)
      if (v) all.append(*v);
    return all;
  }

  double safe_miss(const DetectionPool& pool, std::size_t level, double p_fa) {
    try {
      return miss_probability(pool, level, p_fa);
    } catch (const std::exception& e) {
      log(std::string("miss probability unavailable: ") + e.what());
      return kNaN;
    }
  }

  const ExperimentPlan& plan_;
  const SystemConfig& config_;
  const RunOptions& options_;
  ResultTable table_;
  std::mutex log_mutex_;
};

ResultTable Runner::run() {
  switch (plan_.id) {
    case ExperimentId::kMissVsRcs: miss_vs_rcs(); break;
    case ExperimentId::kScnrCdf: scnr_cdf(); break;
    case ExperimentId::kRateCdf: rate_cdf(); break;
    case ExperimentId::kKSweep: k_sweep(); break;
    case ExperimentId::kTausSweep: taus_sweep(); break;
    case ExperimentId::kArchitectureAblation: architecture_ablation(); break;
    case ExperimentId::kFpcSweep: fpc_sweep(); break;
    case ExperimentId::kSicnrCdf: sicnr_cdf(); break;
    case ExperimentId::kOpcVsFpc: opc_vs_fpc(); break;
  }
  add("all", "failed_trials", table_.failed_trials);
  add("all", "total_trials", table_.total_trials);
  return std::move(table_);
}

void Runner::miss_vs_rcs() {
  DetectionStudy study;
  study.rcs_dbsm = plan_.rcs_dbsm;
  study.clutter_scales = plan_.clutter_scales;
  study.modes = {PowerRule::fractional(config_.kappa_c, config_.kappa_s), PowerRule::no_sensing()};
  study.clutter_blind = true;
  study.fading_per_drop = plan_.num_fading;
  const DetectionPools all = detection_pools("miss_vs_rcs", config_, study);
  if (all.pools.empty()) return;

  const std::vector<std::string> modes = {"isac", "nosensing"};
  const std::vector<std::string> detectors = {"aware", "blind"};
  AuxTable fig{"fig2_pmiss.csv", {"sigma_alpha2_dbsm", "varsigma", "mode", "p_miss"}, {}};
  AuxTable roc{"fig2_roc.csv",
               {"sigma_alpha2_dbsm", "varsigma", "mode", "p_fa", "p_miss", "mean_scnr_db"},
               {}};
  for (std::size_t mode = 0; mode < modes.size(); ++mode)
    for (std::size_t det = 0; det < detectors.size(); ++det)
      for (std::size_t sc = 0; sc < plan_.clutter_scales.size(); ++sc) {
        const DetectionPool& pool = all.pools[mode][sc][det];
        const std::string label = modes[mode] + (det ? "_blind" : "");
        for (std::size_t r = 0; r < plan_.rcs_dbsm.size(); ++r) {
          const double rcs_db = plan_.rcs_dbsm[r];
          const double scnr_db = to_db(median(pool.scnr_unit) * db_to_linear(rcs_db));
          const double mean_scnr_db =
              to_db(std::accumulate(pool.scnr_unit.begin(), pool.scnr_unit.end(), 0.0) /
                    static_cast<double>(pool.scnr_unit.size()) * db_to_linear(rcs_db));
          const std::string point =
              join(kv("sigma_alpha2_dbsm", rcs_db), kv("varsigma", plan_.clutter_scales[sc]),
                   kv("mode", modes[mode]), kv("detector", detectors[det]));
          const double pm = safe_miss(pool, r, config_.false_alarm_prob);
          add(point, "p_miss", pm);
          add(point, "median_scnr_db", scnr_db);
          fig.rows.push_back({format_number(rcs_db), format_number(plan_.clutter_scales[sc]),
                              label, format_number(pm)});
          for (double pfa : plan_.p_fa_grid)
            roc.rows.push_back({format_number(rcs_db), format_number(plan_.clutter_scales[sc]),
                                label, format_number(pfa),
                                format_number(safe_miss(pool, r, pfa)),
                                format_number(mean_scnr_db)});
        }
      }
  table_.aux.push_back(std::move(fig));
  table_.aux.push_back(std::move(roc));
}

void Runner::scnr_cdf() {
  using Samples = std::vector<std::vector<double>>;  // [mode][sample], dB
  const std::vector<PowerRule> rules = {PowerRule::fractional(config_.kappa_c, config_.kappa_s),
                                        PowerRule::no_sensing()};
  const std::vector<std::string> names = {"isac", "nosensing"};
  auto values = drops<Samples>("scnr_cdf", plan_.num_fading, [&](int d) {
    RandomStream rng = drop_stream(d);
    RandomStream drop_rng = rng.substream(0);
    const DropContext drop = build_drop(config_, SensingMode::kDetection, {},
                                        static_cast<std::size_t>(d), drop_rng);
    std::vector<PowerAllocation> allocs;
    for (const auto& r : rules) allocs.push_back(allocate_power(drop, r));
    Samples out(rules.size());
    for (int f = 0; f < plan_.num_fading; ++f) {
      RandomStream frng = rng.substream({1, static_cast<std::uint64_t>(f)});
      const FadingDraw fd = draw_fading(drop, frng);
      for (std::size_t m = 0; m < rules.size(); ++m) {
        const auto s = detection_scnr(drop, make_frame(drop, allocs[m], fd),
                                      config_.clutter_scale, config_.rcs_variance());
        for (double x : s) out[m].push_back(to_db(x));
      }
    }
    return out;
  });
  Samples pooled(rules.size());
  for (int d = 0; d < plan_.num_drops; ++d) {
    if (!values[d]) continue;
    for (std::size_t m = 0; m < rules.size(); ++m) {
      const auto& v = (*values[d])[m];
      add(kv("mode", names[m]), "median_scnr_db", median(v), d);
      pooled[m].insert(pooled[m].end(), v.begin(), v.end());
    }
  }
  std::vector<std::pair<std::string, std::vector<double>>> series;
  for (std::size_t m = 0; m < rules.size(); ++m) {
    add(kv("mode", names[m]), "median_scnr_db", median(pooled[m]));
    series.emplace_back(names[m], pooled[m]);
  }
  table_.aux.push_back(cdf_table("scnr_cdf_curve.csv", "scnr_db", series));
}

void Runner::rate_cdf() {
  using Rates = std::vector<std::vector<double>>;  // [mode][ue]
  const std::vector<PowerRule> rules = {PowerRule::fractional(config_.kappa_c, config_.kappa_s),
                                        PowerRule::no_sensing()};
  const std::vector<std::string> names = {"isac", "nosensing"};
  auto values = drops<Rates>("rate_cdf", 1, [&](int d) {
    RandomStream rng = drop_stream(d);
    RandomStream drop_rng = rng.substream(0);
    const DropContext drop = build_drop(config_, SensingMode::kDetection, {},
                                        static_cast<std::size_t>(d), drop_rng);
    Rates out;
    for (const auto& r : rules) out.push_back(rates_mbps(drop, allocate_power(drop, r)));
    return out;
  });
  Rates pooled(rules.size());
  for (int d = 0; d < plan_.num_drops; ++d) {
    if (!values[d]) continue;
    for (std::size_t m = 0; m < rules.size(); ++m) {
      const auto& v = (*values[d])[m];
      for (std::size_t k = 0; k < v.size(); ++k)
        add(join(kv("mode", names[m]), kv("ue", static_cast<double>(k))), "rate_mbps", v[k], d);
      pooled[m].insert(pooled[m].end(), v.begin(), v.end());
    }
  }
  std::vector<std::pair<std::string, std::vector<double>>> series;
  for (std::size_t m = 0; m < rules.size(); ++m) {
    add(kv("mode", names[m]), "median_rate_mbps", median(pooled[m]));
    series.emplace_back(names[m], pooled[m]);
  }
  table_.aux.push_back(cdf_table("rate_cdf_curve.csv", "rate_mbps", series));
}

// Rate and SCNR summary of one detection drop.
struct DropSummary {
  double sum_rate = 0.0;
  double median_rate = 0.0;
  double min_rate = 0.0;
  double median_scnr_db = 0.0;
  double sensing_power_per_beam = 0.0;
};

DropSummary summarize_drop(const DropContext& drop, const PowerAllocation& alloc,
                           int num_fading, RandomStream& rng) {
  DropSummary s;
  const auto rates = rates_mbps(drop, alloc);
  s.sum_rate = std::accumulate(rates.begin(), rates.end(), 0.0);
  s.median_rate = median(rates);
  s.min_rate = *std::min_element(rates.begin(), rates.end());
  std::vector<double> scnr_db;
  for (int f = 0; f < num_fading; ++f) {
    RandomStream frng = rng.substream(static_cast<std::uint64_t>(f));
    const FadingDraw fd = draw_fading(drop, frng);
    for (double x : detection_scnr(drop, make_frame(drop, alloc, fd), drop.config.clutter_scale,
                                   drop.config.rcs_variance()))
      scnr_db.push_back(to_db(x));
  }
  s.median_scnr_db = median(scnr_db);
  double total = 0.0;
  int beams = 0;
  for (Eigen::Index i = 0; i < alloc.sense.size(); ++i)
    if (alloc.sense.data()[i] > 0.0) {
      total += alloc.sense.data()[i];
      ++beams;
    }
  s.sensing_power_per_beam = beams ? total / beams : 0.0;
  return s;
}

void Runner::k_sweep() {
  for (int k : plan_.ue_counts) {
    SystemConfig cfg = config_;
    cfg.num_ues = k;
    // Orthogonal pilots: the pilot overhead follows the UE count.
    if (!cfg.pilot_reuse) {
      cfg.pilot_len = k;
      cfg.data_len = std::max(1, cfg.coherence_block - k);
    }
    cfg.validate();
    const std::string point = kv("K", static_cast<double>(k));
    auto values = drops<DropSummary>(point, plan_.num_fading, [&](int d) {
      RandomStream rng = drop_stream(d);
      RandomStream drop_rng = rng.substream(0);
      const DropContext drop = build_drop(cfg, SensingMode::kDetection, {},
                                          static_cast<std::size_t>(d), drop_rng);
      RandomStream frng = rng.substream(1);
      return summarize_drop(drop, allocate_power(drop, PowerRule::fractional(cfg.kappa_c, cfg.kappa_s)),
                            plan_.num_fading, frng);
    });
    std::vector<double> sum, med, scnr_db;
    for (int d = 0; d < plan_.num_drops; ++d) {
      if (!values[d]) continue;
      add(point, "sum_rate_mbps", values[d]->sum_rate, d);
      add(point, "median_rate_mbps", values[d]->median_rate, d);
      add(point, "median_scnr_db", values[d]->median_scnr_db, d);
      sum.push_back(values[d]->sum_rate);
      med.push_back(values[d]->median_rate);
      scnr_db.push_back(values[d]->median_scnr_db);
    }
    add(point, "sum_rate_mbps", median(sum));
    add(point, "median_rate_mbps", median(med));
    add(point, "median_scnr_db", median(scnr_db));
  }
}

void Runner::taus_sweep() {
  for (int tau : plan_.sensing_lengths) {
    SystemConfig cfg = config_;
    cfg.sensing_len = tau;
    if (cfg.antennas_per_ap * tau < cfg.tx_aps_per_task) cfg.allow_degenerate_rank = true;
    cfg.validate();
    DetectionStudy study;
    study.rcs_dbsm = {cfg.rcs_variance_dbsm};
    study.clutter_scales = {cfg.clutter_scale};
    study.modes = {PowerRule::fractional(cfg.kappa_c, cfg.kappa_s)};
    study.clutter_blind = false;
    study.fading_per_drop = plan_.num_fading;
    const std::string point = kv("tau_s", static_cast<double>(tau));
    const DetectionPools all = detection_pools(point, cfg, study);
    if (all.pools.empty()) continue;
    const DetectionPool& pool = all.pools[0][0][0];
    add(point, "p_miss", safe_miss(pool, 0, cfg.false_alarm_prob));
    add(point, "median_scnr_db", to_db(median(pool.scnr_unit) * cfg.rcs_variance()));
  }
}

void Runner::architecture_ablation() {
  struct Arch {
    std::string name;
    AssociationPolicy policy;
  };
  const std::vector<Arch> archs = {{"UTC", {true, true}},
                                   {"UC", {true, false}},
                                   {"TC", {false, true}},
                                   {"CF", {false, false}}};
  for (int regions : plan_.region_counts) {
    SystemConfig cfg = config_;
    cfg.num_regions = regions;
    cfg.validate();
    for (const auto& arch : archs) {
      const std::string point = join(kv("architecture", arch.name), kv("S", static_cast<double>(regions)));
      auto values = drops<DropSummary>(point, plan_.num_fading, [&](int d) {
        RandomStream rng = drop_stream(d);
        RandomStream drop_rng = rng.substream(0);
        const DropContext drop = build_drop(cfg, SensingMode::kDetection, arch.policy,
                                            static_cast<std::size_t>(d), drop_rng);
        RandomStream frng = rng.substream(1);
        return summarize_drop(drop,
                              allocate_power(drop, PowerRule::fractional(cfg.kappa_c, cfg.kappa_s)),
                              plan_.num_fading, frng);
      });
      std::vector<double> med, mins, scnr_db, beam_power;
      for (int d = 0; d < plan_.num_drops; ++d) {
        if (!values[d]) continue;
        add(point, "median_rate_mbps", values[d]->median_rate, d);
        add(point, "min_rate_mbps", values[d]->min_rate, d);
        add(point, "median_scnr_db", values[d]->median_scnr_db, d);
        med.push_back(values[d]->median_rate);
        mins.push_back(values[d]->min_rate);
        scnr_db.push_back(values[d]->median_scnr_db);
        beam_power.push_back(values[d]->sensing_power_per_beam);
      }
      add(point, "median_rate_mbps", median(med));
      add(point, "min_rate_mbps", median(mins));
      add(point, "median_scnr_db", median(scnr_db));
      add(point, "sensing_power_per_beam_w", median(beam_power));
    }
  }
}

void Runner::fpc_sweep() {
  std::vector<std::pair<double, double>> points;
  for (double kc : plan_.kappa_grid)
    for (double ks : plan_.kappa_grid) points.emplace_back(kc, ks);
  auto values = drops<std::vector<DropSummary>>("fpc_sweep", plan_.num_fading, [&](int d) {
    RandomStream rng = drop_stream(d);
    RandomStream drop_rng = rng.substream(0);
    const DropContext drop = build_drop(config_, SensingMode::kDetection, {},
                                        static_cast<std::size_t>(d), drop_rng);
    std::vector<DropSummary> out;
    for (const auto& [kc, ks] : points) {
      RandomStream frng = rng.substream(1);  // common fading across the grid
      out.push_back(summarize_drop(drop, allocate_power(drop, PowerRule::fractional(kc, ks)),
                                   plan_.num_fading, frng));
    }
    return out;
  });
  for (std::size_t p = 0; p < points.size(); ++p) {
    const std::string point = join(kv("kappa_c", points[p].first), kv("kappa_s", points[p].second));
    std::vector<double> med, mins, scnr_db;
    for (int d = 0; d < plan_.num_drops; ++d) {
      if (!values[d]) continue;
      const DropSummary& s = (*values[d])[p];
      add(point, "median_rate_mbps", s.median_rate, d);
      add(point, "min_rate_mbps", s.min_rate, d);
      add(point, "median_scnr_db", s.median_scnr_db, d);
      med.push_back(s.median_rate);
      mins.push_back(s.min_rate);
      scnr_db.push_back(s.median_scnr_db);
    }
    add(point, "median_rate_mbps", median(med));
    add(point, "min_rate_mbps", median(mins));
    add(point, "median_scnr_db", median(scnr_db));
  }
}

void Runner::sicnr_cdf() {
  using Samples = std::array<std::vector<double>, 2>;  // with and without interference, dB
  auto values = drops<Samples>("sicnr_cdf", plan_.num_fading, [&](int d) {
    RandomStream rng = drop_stream(d);
    RandomStream drop_rng = rng.substream(0);
    const DropContext drop = build_drop(config_, SensingMode::kTracking, {},
                                        static_cast<std::size_t>(d), drop_rng);
    const PowerAllocation alloc =
        allocate_power(drop, PowerRule::fractional(config_.kappa_c, config_.kappa_s));
    Samples out;
    for (int f = 0; f < plan_.num_fading; ++f) {
      RandomStream frng = rng.substream({1, static_cast<std::uint64_t>(f)});
      const TransmitFrame frame = make_frame(drop, alloc, draw_fading(drop, frng));
      for (int w = 0; w < 2; ++w)
        for (double x : tracking_sicnr(drop, frame, config_.clutter_scale, w == 0))
          out[w].push_back(to_db(x));
    }
    return out;
  });
  const std::array<std::string, 2> names = {"sicnr", "scnr_isolated"};
  Samples pooled;
  for (int d = 0; d < plan_.num_drops; ++d) {
    if (!values[d]) continue;
    for (int w = 0; w < 2; ++w) {
      add(kv("metric", names[w]), "median_db", median((*values[d])[w]), d);
      pooled[w].insert(pooled[w].end(), (*values[d])[w].begin(), (*values[d])[w].end());
    }
  }
  std::vector<std::pair<std::string, std::vector<double>>> series;
  for (int w = 0; w < 2; ++w) {
    add(kv("metric", names[w]), "median_db", median(pooled[w]));
    series.emplace_back(names[w], pooled[w]);
  }
  table_.aux.push_back(cdf_table("sicnr_cdf_curve.csv", "value_db", series));
}

struct SchemeOutcome {
  double min_rate = 0.0;
  double median_sicnr_db = 0.0;
  double min_sir_db = 0.0;
};

void Runner::opc_vs_fpc() {
  const std::vector<std::string> names = {"fpc", "opc_comm", "opc_sensing"};
  auto values = drops<std::vector<SchemeOutcome>>("opc_vs_fpc", plan_.num_fading, [&](int d) {
    RandomStream rng = drop_stream(d);
    RandomStream drop_rng = rng.substream(0);
    const DropContext drop = build_drop(config_, SensingMode::kTracking, {},
                                        static_cast<std::size_t>(d), drop_rng);
    std::vector<FadingDraw> draws;
    for (int f = 0; f < plan_.num_fading; ++f) {
      RandomStream frng = rng.substream({1, static_cast<std::uint64_t>(f)});
      draws.push_back(draw_fading(drop, frng));
    }
    const OpcProblem problem = tracking_opc_problem(drop, draws.front());
    const OpcOptions options = opc_options(config_);

    std::vector<PowerAllocation> allocs;
    allocs.push_back(allocate_power(drop, PowerRule::fractional(0.0, 0.5)));
    const OpcResult comm =
        optimize_comm_priority(problem, drop.maps, drop.ue_lsf, drop.task_lsf, options);
    if (!comm.success) throw NumericalError("communication-prioritized OPC failed");
    allocs.push_back(comm.alloc);
    const OpcResult sens =
        optimize_sensing_priority(problem, drop.maps, drop.ue_lsf, drop.task_lsf, options);
    if (!sens.success) throw NumericalError("sensing-prioritized OPC failed");
    allocs.push_back(sens.alloc);

    std::vector<SchemeOutcome> out;
    for (const auto& alloc : allocs) {
      SchemeOutcome o;
      const auto rates = rates_mbps(drop, alloc);
      o.min_rate = *std::min_element(rates.begin(), rates.end());
      std::vector<double> sicnr_db;
      for (const auto& fd : draws)
        for (double x : tracking_sicnr(drop, make_frame(drop, alloc, fd), config_.clutter_scale, true))
          sicnr_db.push_back(to_db(x));
      o.median_sicnr_db = median(sicnr_db);
      const RVector b = problem.layout.amplitudes(alloc);
      double min_sir = std::numeric_limits<double>::infinity();
      for (int l = 0; l < problem.sir.num_targets(); ++l) min_sir = std::min(min_sir, problem.sir.sir(l, b));
      o.min_sir_db = to_db(min_sir);
      out.push_back(o);
    }
    return out;
  });
  for (std::size_t m = 0; m < names.size(); ++m) {
    const std::string point = kv("scheme", names[m]);
    std::vector<double> rates, sicnr_db;
    for (int d = 0; d < plan_.num_drops; ++d) {
      if (!values[d]) continue;
      const SchemeOutcome& o = (*values[d])[m];
      add(point, "min_rate_mbps", o.min_rate, d);
      add(point, "median_sicnr_db", o.median_sicnr_db, d);
      add(point, "min_effective_sir_db", o.min_sir_db, d);
      rates.push_back(o.min_rate);
      sicnr_db.push_back(o.median_sicnr_db);
    }
    add(point, "min_rate_mbps", median(rates));
    add(point, "median_sicnr_db", median(sicnr_db));
  }
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [id, name] : registry()) v.push_back(name);
    return v;
  }();
  return names;
}

std::optional<ExperimentId> parse_experiment(const std::string& name) {
  for (const auto& [id, n] : registry())
    if (n == name) return id;
  return std::nullopt;
}

std::string experiment_name(ExperimentId id) {
  for (const auto& [i, n] : registry())
    if (i == id) return n;
  throw std::invalid_argument("unknown experiment id");
}

ExperimentPlan default_plan(ExperimentId id, const SystemConfig& config, bool full_scale) {
  ExperimentPlan p;
  p.id = id;
  p.seed = config.rng_seed;
  p.num_drops = full_scale ? config.full_scale_drops : config.num_drops;
  switch (id) {
    case ExperimentId::kMissVsRcs:
      p.num_fading = full_scale ? config.full_scale_fading : config.num_fading;
      break;
    case ExperimentId::kRateCdf:
    case ExperimentId::kOpcVsFpc:
      p.num_fading = 1;
      break;
    default:
      p.num_fading = full_scale ? config.full_scale_fading : config.sweep_fading;
      break;
  }
  p.rcs_dbsm = {0.0, 5.0, 10.0, 15.0, 20.0};
  p.clutter_scales = {1e-3, 1e-2, 1e-1};
  p.p_fa_grid = {1e-3, 1e-2, 1e-1};
  p.ue_counts = {2, 4, 8, 16};
  p.sensing_lengths = {1, 5, 10, 25, 50};
  p.region_counts = {1, 4, 9};
  p.kappa_grid = {0.0, 0.5, 1.0};
  return p;
}

void validate_plan(const ExperimentPlan& plan, const SystemConfig& config) {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(plan.num_drops >= 1, "plan needs at least one drop");
  require(plan.num_fading >= 1, "plan needs at least one fading realization");
  require(static_cast<long>(plan.num_drops) * plan.num_fading <= config.max_trials,
          "drops x fading exceeds harness.max_trials");
  switch (plan.id) {
    case ExperimentId::kMissVsRcs:
      require(!plan.rcs_dbsm.empty() && !plan.clutter_scales.empty() && !plan.p_fa_grid.empty(),
              "miss_vs_rcs grids must be non-empty");
      for (double s : plan.clutter_scales) require(s >= 0.0, "clutter scales must be non-negative");
      for (double p : plan.p_fa_grid) require(p > 0.0 && p < 1.0, "p_fa must lie in (0, 1)");
      break;
    case ExperimentId::kKSweep:
      require(!plan.ue_counts.empty(), "k_sweep grid must be non-empty");
      break;
    case ExperimentId::kTausSweep:
      require(!plan.sensing_lengths.empty(), "taus_sweep grid must be non-empty");
      break;
    case ExperimentId::kArchitectureAblation:
      require(!plan.region_counts.empty(), "architecture_ablation grid must be non-empty");
      break;
    case ExperimentId::kFpcSweep:
      require(!plan.kappa_grid.empty(), "fpc_sweep grid must be non-empty");
      break;
    default:
      break;
  }
}

ResultTable run_experiment(const ExperimentPlan& plan, const SystemConfig& config,
                           const RunOptions& options) {
  config.validate();
  validate_plan(plan, config);
  return Runner(plan, config, options).run();
}

}  // namespace cfisac
