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

#include "cfisac/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "cfisac/linalg.hpp"

namespace cfisac {
namespace {

constexpr double kDegToRad = kPi / 180.0;

// Stream keys inside one drop.
enum : std::uint64_t { kScenarioKey = 1, kLinkKey = 2, kMapKey = 3 };

std::vector<Position> positions_of(const Scenario& s, const std::vector<int>& aps) {
  std::vector<Position> out;
  out.reserve(aps.size());
  for (int m : aps) out.push_back(s.ap_positions[m]);
  return out;
}

// Uniform point inside the radar cell centered at `center` of region `region`.
Position random_point_in_cell(const DropContext& drop, int region, const Position& center,
                              RandomStream& rng) {
  const Region& r = drop.scenario.regions[region];
  int cells_x = 0;
  for (const auto& c : r.cells)
    if (std::abs(c.y() - r.cells.front().y()) < 1e-9) ++cells_x;
  const int cells_y = static_cast<int>(r.cells.size()) / std::max(cells_x, 1);
  const double dx = (r.x_max - r.x_min) / std::max(cells_x, 1);
  const double dy = (r.y_max - r.y_min) / std::max(cells_y, 1);
  const auto& cfg = drop.config;
  return Position(center.x() + rng.uniform(-0.5, 0.5) * dx,
                  center.y() + rng.uniform(-0.5, 0.5) * dy,
                  rng.uniform(cfg.target_height_min_m, cfg.target_height_max_m));
}

CMatrix psi_of(const CMatrix& unit_clutter, double clutter_scale, double noise_var) {
  return whitened_covariance(clutter_scale * unit_clutter, noise_var);
}

std::vector<int> rx_aps_in_use(const DropContext& drop) {
  std::set<int> used;
  for (const auto& t : drop.maps.tasks) used.insert(t.rx.begin(), t.rx.end());
  return {used.begin(), used.end()};
}

}  // namespace

int DropContext::rx_index(int ap) const {
  const auto& v = scenario.rx_aps;
  const auto it = std::lower_bound(v.begin(), v.end(), ap);
  if (it == v.end() || *it != ap) throw std::invalid_argument("not a receive AP");
  return static_cast<int>(it - v.begin());
}

int DropContext::tx_index(int ap) const {
  const auto& v = scenario.tx_aps;
  const auto it = std::lower_bound(v.begin(), v.end(), ap);
  if (it == v.end() || *it != ap) throw std::invalid_argument("not a transmit AP");
  return static_cast<int>(it - v.begin());
}

DropContext build_drop(const SystemConfig& config, SensingMode phase, AssociationPolicy policy,
                       std::size_t scan_step, RandomStream& rng) {
  config.validate();
  DropContext d;
  d.config = config;
  d.phase = phase;
  RandomStream scenario_rng = rng.substream(kScenarioKey);
  d.scenario = generate_scenario(config, scenario_rng);
  const Scenario& s = d.scenario;
  const int num_ues = s.num_ues();
  const int num_aps = s.num_aps();
  const int n = config.antennas_per_ap;
  const double spacing = config.element_spacing;
  const double fc = config.carrier_freq_hz;
  d.noise_var = config.noise_power_w();

  d.task_positions = phase == SensingMode::kDetection ? next_scan_positions(s, scan_step)
                                                      : s.target_positions;

  d.ue_lsf = RMatrix::Zero(num_ues, num_aps);
  for (int k = 0; k < num_ues; ++k)
    for (int m : s.tx_aps)
      d.ue_lsf(k, m) = path_gain((s.ap_positions[m] - s.ue_positions[k]).norm(), LinkType::kUe, fc);

  d.maps = build_associations(s, d.ue_lsf, d.task_positions, config, policy);
  const int num_tasks = d.num_tasks();

  d.task_lsf = RMatrix::Zero(num_tasks, num_aps);
  for (int i = 0; i < num_tasks; ++i) {
    const Position& p = d.task_positions[i];
    for (int m : s.tx_aps)
      for (int r : d.maps.tasks[i].rx)
        d.task_lsf(i, m) +=
            two_hop_gain((p - s.ap_positions[m]).norm(), (p - s.ap_positions[r]).norm(), fc);
  }

  const double ue_spread = config.ue_angular_spread_deg * kDegToRad;
  d.corr.assign(num_ues, std::vector<CMatrix>(num_aps));
  d.corr_sqrt.assign(num_ues, std::vector<CMatrix>(num_aps));
  for (int k = 0; k < num_ues; ++k)
    for (int m : s.tx_aps) {
      const Position& ap = s.ap_positions[m];
      d.corr[k][m] = local_scattering_correlation(n, spacing, angles_between(ap, s.ue_positions[k]),
                                                  ue_spread, d.ue_lsf(k, m));
      d.corr_sqrt[k][m] = hermitian_sqrt(d.corr[k][m]);
    }

  d.pilots = make_pilot_book(num_ues, config.pilot_len, config.pilot_power_w, config.pilot_reuse);
  d.mmse.assign(num_ues, std::vector<MmseStatistics>(num_aps));
  for (int m : s.tx_aps) {
    std::vector<CMatrix> corr_at_ap(num_ues);
    for (int k = 0; k < num_ues; ++k) corr_at_ap[k] = d.corr[k][m];
    for (int k = 0; k < num_ues; ++k)
      d.mmse[k][m] = mmse_statistics(corr_at_ap, d.pilots, k, d.noise_var);
  }

  RandomStream map_rng = rng.substream(kMapKey);
  d.w_maps.assign(num_tasks, std::vector<CMatrix>(num_aps));
  const int samples = config.interference_map_samples;
  for (int i = 0; i < num_tasks; ++i) {
    for (int m : d.maps.tasks[i].tx) {
      RandomStream r = map_rng.substream({static_cast<std::uint64_t>(i),
                                          static_cast<std::uint64_t>(m)});
      const Position& ap = s.ap_positions[m];
      if (phase == SensingMode::kDetection) {
        const int region = s.region_of(d.task_positions[i]);
        d.w_maps[i][m] = sensing_interference_detection(ap, s.regions[region].cells, samples, n,
                                                        spacing, config.unit_norm_sensing, r);
      } else {
        const Position target = d.task_positions[i];
        const double sd = config.tracking_error_std_rad;
        d.w_maps[i][m] = sensing_interference_tracking(
            ap, [target](RandomStream&) { return target; },
            [sd](RandomStream& g) { return Angles{sd * g.normal(), sd * g.normal()}; },
            sd > 0.0 ? samples : 1, n, spacing, config.unit_norm_sensing, r);
      }
    }
  }

  d.stats = compute_link_statistics(d.corr, d.mmse, d.w_maps, d.pilots);
  d.budget = ap_budgets(s, config);

  RandomStream link_rng = rng.substream(kLinkKey);
  d.ap_links.resize(s.rx_aps.size());
  for (std::size_t r = 0; r < s.rx_aps.size(); ++r)
    for (int m : s.tx_aps)
      d.ap_links[r].push_back(
          make_ap_ap_link(s.ap_positions[s.rx_aps[r]], s.ap_positions[m], config, link_rng));

  const double view_width = config.rcs_view_width_deg * kDegToRad;
  for (int i = 0; i < num_tasks; ++i) {
    const auto tx_pos = positions_of(s, d.maps.tasks[i].tx);
    const auto angles = view_angles(d.task_positions[i], tx_pos);
    d.rcs_shape.push_back(build_rcs_correlation(angles, 1.0, view_width));
  }
  return d;
}

PowerAllocation allocate_power(const DropContext& drop, const PowerRule& rule) {
  if (rule.kind == PowerRule::Kind::kNoSensing) {
    AssociationMaps comm_only = drop.maps;
    for (auto& t : comm_only.tasks_of_ap) t.clear();
    return fpc_allocate(drop.ue_lsf, drop.task_lsf, comm_only, drop.budget, rule.kappa_c, 0.0);
  }
  return fpc_allocate(drop.ue_lsf, drop.task_lsf, drop.maps, drop.budget, rule.kappa_c,
                      rule.kappa_s);
}

std::vector<SinrTerms> drop_sinr(const DropContext& drop, const PowerAllocation& alloc) {
  std::vector<SinrTerms> out;
  for (int k = 0; k < drop.scenario.num_ues(); ++k)
    out.push_back(closed_form_sinr(k, alloc, drop.stats, drop.noise_var));
  return out;
}

FadingDraw draw_fading(const DropContext& drop, RandomStream& rng) {
  const auto& cfg = drop.config;
  const Scenario& s = drop.scenario;
  const int num_ues = s.num_ues();
  const int num_aps = s.num_aps();
  const int num_tasks = drop.num_tasks();
  const int n = cfg.antennas_per_ap;
  FadingDraw f;
  f.beams.comm.assign(num_ues, std::vector<CVector>(num_aps));
  f.beams.sense.assign(num_tasks, std::vector<CVector>(num_aps));

  std::vector<CVector> channels(num_ues);
  for (int m : s.tx_aps) {
    for (int k = 0; k < num_ues; ++k) channels[k] = draw_ue_channel(drop.corr_sqrt[k][m], rng);
    for (int k : drop.maps.ues_of_ap[m]) {
      const CVector y = ls_observation(channels, drop.pilots, k, drop.noise_var, rng);
      const CVector est = mmse_estimate(y, drop.mmse[k][m], drop.pilots, k);
      f.beams.comm[k][m] = mrt_precoder(est, drop.mmse[k][m].trace_phi);
    }
  }

  const double sd = cfg.tracking_error_std_rad;
  auto draw_error = [&] { return Angles{sd * rng.normal(), sd * rng.normal()}; };
  for (int i = 0; i < num_tasks; ++i) {
    const Position& target = drop.task_positions[i];
    const Angles shared = drop.phase == SensingMode::kTracking ? draw_error() : Angles{};
    for (int m : drop.maps.tasks[i].tx) {
      const Position& ap = s.ap_positions[m];
      if (drop.phase == SensingMode::kDetection) {
        f.beams.sense[i][m] =
            sensing_precoder(ap, target, n, cfg.element_spacing, cfg.unit_norm_sensing);
      } else {
        const Angles err = cfg.tracking_error_per_ap ? draw_error() : shared;
        f.beams.sense[i][m] = sensing_precoder(perturb_angles(angles_between(ap, target), err), n,
                                               cfg.element_spacing, cfg.unit_norm_sensing);
      }
    }
  }
  f.symbols = draw_symbols(num_ues, num_tasks, num_aps, cfg.sensing_len, cfg.symbols, rng);
  return f;
}

CMatrix task_echo_model(const DropContext& drop, const TransmitFrame& frame, int task,
                        const Position& target_position, int rx_ap) {
  const Scenario& s = drop.scenario;
  const auto& tx = drop.maps.tasks[task].tx;
  std::vector<CMatrix> signals;
  std::vector<TargetLink> links;
  signals.reserve(tx.size());
  links.reserve(tx.size());
  for (int m : tx) {
    signals.push_back(frame.signals[m]);
    links.push_back(
        target_channel(s.ap_positions[m], s.ap_positions[rx_ap], target_position, drop.config));
  }
  return build_stacked_model(signals, links, drop.config.sensing_len);
}

CMatrix unit_clutter_covariance(const DropContext& drop, const TransmitFrame& frame, int rx_ap) {
  const int r = drop.rx_index(rx_ap);
  const auto& tx = drop.scenario.tx_aps;
  std::vector<ClutterTerm> terms;
  terms.reserve(tx.size());
  for (std::size_t t = 0; t < tx.size(); ++t) {
    const ApApLink& link = drop.ap_links[r][t];
    const double amp = link.nlos_amplitude();
    terms.push_back({frame.signals[tx[t]], amp * amp, link.tx_factor, link.rx_corr});
  }
  return clutter_covariance(terms, drop.config.antennas_per_ap, drop.config.sensing_len);
}

CVector draw_unit_clutter(const DropContext& drop, const TransmitFrame& frame, int rx_ap,
                          RandomStream& rng) {
  const int r = drop.rx_index(rx_ap);
  const auto& tx = drop.scenario.tx_aps;
  const int n = drop.config.antennas_per_ap;
  const int tau = drop.config.sensing_len;
  CMatrix y = CMatrix::Zero(n, tau);
  for (std::size_t t = 0; t < tx.size(); ++t) {
    const ApApDraw g = draw_ap_ap_channel(drop.ap_links[r][t], 1.0, rng);
    y.noalias() += g.nlos * frame.signals[tx[t]].leftCols(tau);
  }
  return y.reshaped();
}

std::vector<double> detection_scnr(const DropContext& drop, const TransmitFrame& frame,
                                   double clutter_scale, double rcs_variance) {
  const auto& cfg = drop.config;
  std::map<int, std::shared_ptr<const Whitener>> whiteners;
  for (int m : rx_aps_in_use(drop))
    whiteners[m] = std::make_shared<const Whitener>(
        psi_of(unit_clutter_covariance(drop, frame, m), clutter_scale, drop.noise_var),
        cfg.whitening);
  std::vector<double> out;
  for (int i = 0; i < drop.num_tasks(); ++i) {
    std::vector<SensingProblem> problems;
    std::vector<CMatrix> rcs;
    for (int m : drop.maps.tasks[i].rx) {
      problems.push_back(make_sensing_problem(
          task_echo_model(drop, frame, i, drop.task_positions[i], m), whiteners.at(m)));
      rcs.push_back(rcs_variance * drop.rcs_shape[i]);
    }
    out.push_back(scnr(problems, rcs));
  }
  return out;
}

std::vector<double> tracking_sicnr(const DropContext& drop, const TransmitFrame& frame,
                                   double clutter_scale, bool with_interference) {
  const auto& cfg = drop.config;
  const double rcs_var = cfg.rcs_variance();
  std::map<int, std::shared_ptr<const Whitener>> whiteners;
  for (int m : rx_aps_in_use(drop))
    whiteners[m] = std::make_shared<const Whitener>(
        psi_of(unit_clutter_covariance(drop, frame, m), clutter_scale, drop.noise_var),
        cfg.whitening);
  const int num_tasks = drop.num_tasks();
  std::vector<double> out;
  for (int l = 0; l < num_tasks; ++l) {
    std::vector<SensingProblem> problems;
    std::vector<CMatrix> rcs;
    std::vector<std::vector<InterferingEcho>> interferers;
    for (int m : drop.maps.tasks[l].rx) {
      problems.push_back(make_sensing_problem(
          task_echo_model(drop, frame, l, drop.task_positions[l], m), whiteners.at(m)));
      rcs.push_back(rcs_var * drop.rcs_shape[l]);
      std::vector<InterferingEcho> echoes;
      if (with_interference)
        for (int other = 0; other < num_tasks; ++other) {
          if (other == l) continue;
          const double dist = (drop.task_positions[other] - drop.task_positions[l]).norm();
          if (cfg.interference_radius_m > 0.0 && dist > cfg.interference_radius_m) continue;
          echoes.push_back({task_echo_model(drop, frame, other, drop.task_positions[other], m),
                            rcs_var * drop.rcs_shape[other]});
        }
      interferers.push_back(std::move(echoes));
    }
    out.push_back(sicnr(problems, rcs, interferers));
  }
  return out;
}

void DetectionPools::append(const DetectionPools& other) {
  if (pools.empty()) {
    pools = other.pools;
    return;
  }
  for (std::size_t a = 0; a < pools.size(); ++a)
    for (std::size_t b = 0; b < pools[a].size(); ++b)
      for (std::size_t c = 0; c < pools[a][b].size(); ++c) {
        auto& dst = pools[a][b][c];
        const auto& src = other.pools[a][b][c];
        dst.h0.insert(dst.h0.end(), src.h0.begin(), src.h0.end());
        dst.scnr_unit.insert(dst.scnr_unit.end(), src.scnr_unit.begin(), src.scnr_unit.end());
        for (std::size_t r = 0; r < dst.h1.size(); ++r)
          dst.h1[r].insert(dst.h1[r].end(), src.h1[r].begin(), src.h1[r].end());
      }
}

DetectionPools run_detection_drop(const DropContext& drop, const DetectionStudy& study,
                                  RandomStream& rng) {
  if (drop.phase != SensingMode::kDetection)
    throw std::invalid_argument("detection study needs a detection-phase drop");
  const auto& cfg = drop.config;
  const int num_tasks = drop.num_tasks();
  const int detectors = study.clutter_blind ? 2 : 1;
  const std::size_t levels = study.rcs_dbsm.size();
  const Eigen::Index dim = static_cast<Eigen::Index>(cfg.antennas_per_ap) * cfg.sensing_len;
  const std::vector<int> rx_used = rx_aps_in_use(drop);

  DetectionPools out;
  out.pools.assign(study.modes.size(),
                   std::vector<std::vector<DetectionPool>>(
                       study.clutter_scales.size(), std::vector<DetectionPool>(detectors)));
  for (auto& per_mode : out.pools)
    for (auto& per_scale : per_mode)
      for (auto& pool : per_scale) pool.h1.assign(levels, {});

  std::vector<PowerAllocation> allocs;
  for (const auto& rule : study.modes) allocs.push_back(allocate_power(drop, rule));
  std::vector<double> rcs_amp;
  for (double dbsm : study.rcs_dbsm) rcs_amp.push_back(std::sqrt(db_to_linear(dbsm)));
  const auto blind = std::make_shared<const Whitener>(Whitener::white_noise(drop.noise_var, dim));

  for (int f = 0; f < study.fading_per_drop; ++f) {
    RandomStream frng = rng.substream(static_cast<std::uint64_t>(f));
    RandomStream beam_rng = frng.substream(1);
    const FadingDraw fd = draw_fading(drop, beam_rng);

    // Target positions, unit RCS draws and noise, shared by every mode.
    RandomStream target_rng = frng.substream(2);
    std::vector<Position> targets(num_tasks);
    for (int i = 0; i < num_tasks; ++i)
      targets[i] = random_point_in_cell(
          drop, drop.scenario.region_of(drop.task_positions[i]), drop.task_positions[i],
          target_rng);
    std::map<int, std::vector<CVector>> unit_rcs;  // [rx][task]
    std::map<int, CVector> noise;
    for (int m : rx_used) {
      auto& per_task = unit_rcs[m];
      for (int i = 0; i < num_tasks; ++i)
        per_task.push_back(draw_rcs(hermitian_sqrt(drop.rcs_shape[i]), target_rng));
      noise[m] = std::sqrt(drop.noise_var) * target_rng.complex_normal_vector(dim);
    }
    const RandomStream clutter_base = frng.substream(3);

    for (std::size_t mode = 0; mode < study.modes.size(); ++mode) {
      const TransmitFrame frame = assemble_tx_signal(allocs[mode], fd.beams, fd.symbols,
                                                     SensingMode::kDetection, drop.budget,
                                                     cfg.antennas_per_ap, cfg.sensing_len);
      std::map<int, CMatrix> unit_cov;
      std::map<int, CVector> clutter, echo;
      for (int m : rx_used) {
        unit_cov[m] = unit_clutter_covariance(drop, frame, m);
        RandomStream crng = clutter_base.substream(static_cast<std::uint64_t>(m));
        clutter[m] = draw_unit_clutter(drop, frame, m, crng);
        CVector e = CVector::Zero(dim);
        for (int j = 0; j < num_tasks; ++j) {
          const auto& rx = drop.maps.tasks[j].rx;
          const bool own = std::find(rx.begin(), rx.end(), m) != rx.end();
          if (cfg.far_target_approximation && !own) continue;
          e += task_echo_model(drop, frame, j, targets[j], m) * unit_rcs[m][j];
        }
        echo[m] = std::move(e);
      }
      // Models at the inspected cell centers, independent of the clutter scale.
      std::vector<std::vector<CMatrix>> models(num_tasks);
      for (int i = 0; i < num_tasks; ++i)
        for (int m : drop.maps.tasks[i].rx)
          models[i].push_back(task_echo_model(drop, frame, i, drop.task_positions[i], m));

      for (std::size_t sc = 0; sc < study.clutter_scales.size(); ++sc) {
        const double scale = study.clutter_scales[sc];
        const double clutter_amp = std::sqrt(scale);
        std::map<int, std::shared_ptr<const Whitener>> aware;
        for (int m : rx_used)
          aware[m] = std::make_shared<const Whitener>(
              psi_of(unit_cov[m], scale, drop.noise_var), cfg.whitening);
        for (int det = 0; det < detectors; ++det) {
          DetectionPool& pool = out.pools[mode][sc][det];
          for (int i = 0; i < num_tasks; ++i) {
            const auto& rx = drop.maps.tasks[i].rx;
            std::vector<SensingProblem> problems;
            std::vector<CMatrix> shapes, true_covs;
            double h0 = 0.0;
            std::vector<double> h1(levels, 0.0);
            for (std::size_t a = 0; a < rx.size(); ++a) {
              const int m = rx[a];
              problems.push_back(make_sensing_problem(models[i][a], det == 0 ? aware.at(m) : blind));
              const SensingProblem& p = problems.back();
              shapes.push_back(drop.rcs_shape[i]);
              true_covs.push_back(aware.at(m)->covariance());
              if (p.rank == 0) continue;
              const CMatrix proj = p.basis.adjoint();
              const CVector pe = proj * p.whitener->apply(echo[m]);
              const CVector disturbance =
                  proj * p.whitener->apply(CVector(clutter_amp * clutter[m] + noise[m]));
              h0 += disturbance.squaredNorm();
              for (std::size_t r = 0; r < levels; ++r)
                h1[r] += (rcs_amp[r] * pe + disturbance).squaredNorm();
            }
            pool.h0.push_back(h0);
            for (std::size_t r = 0; r < levels; ++r) pool.h1[r].push_back(h1[r]);
            // The blind detector's SCNR is measured against the true disturbance.
            pool.scnr_unit.push_back(det == 0 ? scnr(problems, shapes)
                                              : scnr(problems, shapes, true_covs));
          }
        }
      }
    }
  }
  return out;
}

double miss_probability(const DetectionPool& pool, std::size_t rcs_level, double p_fa,
                        double* threshold) {
  const double t = calibrate_threshold(pool.h0, p_fa);
  if (threshold) *threshold = t;
  const auto& h1 = pool.h1.at(rcs_level);
  if (h1.empty()) throw std::invalid_argument("no H1 trials");
  const auto misses = std::count_if(h1.begin(), h1.end(), [t](double v) { return v <= t; });
  return static_cast<double>(misses) / static_cast<double>(h1.size());
}

OpcProblem tracking_opc_problem(const DropContext& drop, const FadingDraw& draw) {
  const SystemConfig& cfg = drop.config;
  const Scenario& s = drop.scenario;
  const double rcs_var = cfg.rcs_variance();
  OpcProblem problem;
  problem.sir = build_effective_sir(
      drop.maps, s.num_aps(), draw.beams, draw.symbols, cfg.sensing_len,
      [&](int target, int rx, int tx) {
        return target_channel(s.ap_positions[tx], s.ap_positions[rx], drop.task_positions[target],
                              cfg);
      },
      [&](int target, int) -> CMatrix {
        // Uncorrelated reflections keep the SIR forms convex.
        return (rcs_var * drop.rcs_shape[target].diagonal()).asDiagonal();
      });
  problem.layout = problem.sir.layout;
  problem.rate = build_rate_soc(problem.layout, drop.stats, drop.noise_var);
  problem.stats = drop.stats;
  problem.noise_var = drop.noise_var;
  problem.budget = drop.budget;
  problem.sir_target = db_to_linear(cfg.sir_target_db);
  return problem;
}

}  // namespace cfisac
