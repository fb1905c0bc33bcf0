#include "sqz/experiment_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "sqz/atomic_response.hpp"
#include "sqz/errors.hpp"
#include "sqz/qnd_channel.hpp"
#include "sqz/spin_state.hpp"
#include "sqz/version.hpp"

namespace sqz::sim {

namespace {

// Dedicated substream tags; cycle streams use the cycle index directly.
constexpr std::uint64_t kDriftStream = 0xD21F7A11ull;
constexpr std::uint64_t kAtomLevelStream = 0xA70B1E5Eull;

double reflect_into(double x, double lo, double hi) {
  const double span = hi - lo;
  double y = std::fmod(x - lo, 2.0 * span);
  if (y < 0.0) y += 2.0 * span;
  return lo + (y <= span ? y : 2.0 * span - y);
}

}  // namespace

PhysicsDerived derive_physics(const config::PhysicsConfig& physics,
                              const config::CampaignConfig& campaign) {
  PhysicsDerived out;
  const auto q_up = atomic::compute_q(physics.probe_up);
  const auto q_dn = atomic::compute_q(physics.probe_down);
  out.re_q_up = q_up.real();
  out.im_q_up = q_up.imag();
  out.im_q_down = q_dn.imag();
  out.waist = physics.geometry.waist;
  out.detection_efficiency = physics.geometry.detection_efficiency;

  const double n_p = physics.probe_up.photons_probe;
  const double n_r = physics.probe_up.photons_reference;
  out.probe_photons_per_color = n_p;
  out.photons_per_pulse =
      atomic::effective_photon_number(physics.geometry, n_p, n_r);
  out.fringe_per_pulse = atomic::fringe_amplitude(physics.geometry, n_p, n_r);
  out.coupling_k =
      campaign.coupling_override
          ? *campaign.coupling_override
          : atomic::coupling_constant(q_up, physics.geometry, n_p, n_r);
  out.eta_ref = physics.eta_ref;
  out.photons_ref = physics.photons_ref;
  // photons of one dichromatic pulse, both colors
  out.eta_per_pulse =
      qnd::eta_from_photons(2.0 * n_p, physics.eta_ref, physics.photons_ref);
  return out;
}

RawRun simulate_run(const config::CampaignConfig& cfg,
                    const PhysicsDerived& physics, double atom_count,
                    int cycle_id, int slot, double cycle_offset, Random& rng) {
  RawRun run;
  run.cycle_id = cycle_id;
  run.slot = slot;
  run.is_reference = slot >= kAtomSlots;
  run.true_atom_count = run.is_reference ? 0.0 : atom_count;
  run.pulses.resize(cfg.pulses_per_run);

  const double n = physics.photons_per_pulse;
  const double k = physics.coupling_k;
  const double sqrt_det = std::sqrt(cfg.detector_noise_var);

  // Atom-correlated classical offset, common to the whole train.
  const double classical =
      cfg.classical_noise_coeff > 0.0 && !run.is_reference
          ? cfg.classical_noise_coeff * run.true_atom_count * rng.gaussian()
          : 0.0;

  if (run.is_reference) {
    for (int i = 0; i < cfg.pulses_per_run; ++i) {
      const double phi = rng.gaussian() / std::sqrt(n);
      run.pulses[i] = n * phi + sqrt_det * rng.gaussian() + cycle_offset;
    }
    run.latent_jz = 0.0;
  } else {
    qnd::QndPulseSpec pulse;
    pulse.photons_total = n;
    pulse.coupling = k;
    pulse.eta_per_pulse = physics.eta_per_pulse;
    pulse.jz_diffusion_var =
        cfg.partition_noise_fraction * run.true_atom_count / 4.0;
    pulse.jx_inflation_var = cfg.stark_inflation_var;

    qnd::MeasurementChain chain(spin::new_css(
        run.true_atom_count, Eigen::Vector3d{0.0, 1.0, 0.0}));
    for (int i = 0; i < cfg.pulses_per_run; ++i) {
      const auto outcome = chain.measure(pulse, rng);
      run.pulses[i] = n * (outcome.phi + classical) +
                      sqrt_det * rng.gaussian() + cycle_offset;
    }
    run.latent_jz = chain.latent_jz();
  }

  run.atom_signal = k * run.true_atom_count +
                    cfg.atom_signal_noise_sd * rng.gaussian();
  return run;
}

Campaign simulate_campaign(const config::CampaignConfig& cfg,
                           const PhysicsDerived& physics, int threads) {
  const int cycles = cfg.runs / kAtomSlots;

  // Cross-cycle processes are precomputed sequentially from their own
  // streams so that cycles can then be simulated independently.
  std::vector<double> cycle_offset(cycles, 0.0);
  if (cfg.drift_step > 0.0) {
    Random drift_rng(substream_seed(cfg.seed, kDriftStream));
    double offset = 0.0;
    for (int c = 0; c < cycles; ++c) {
      offset += cfg.drift_step * drift_rng.gaussian();
      cycle_offset[c] = offset;
    }
  }

  std::vector<double> cycle_level(cycles, 1.0);
  {
    Random atom_rng(substream_seed(cfg.seed, kAtomLevelStream));
    const double lo = cfg.atom_min_fraction, hi = 1.0;
    switch (cfg.atom_model) {
      case config::AtomModel::fixed:
        break;
      case config::AtomModel::uniform:
        for (int c = 0; c < cycles; ++c)
          cycle_level[c] = lo + (hi - lo) * atom_rng.uniform();
        break;
      case config::AtomModel::walk: {
        // Reflected random walk on [lo, hi]: slow trap-loading drift with a
        // uniform long-run distribution. Consecutive cycles stay close,
        // which is what makes previous-cycle differencing variance-neutral.
        double level = lo + (hi - lo) * atom_rng.uniform();
        for (int c = 0; c < cycles; ++c) {
          level = reflect_into(
              level + cfg.atom_walk_step_fraction * (hi - lo) *
                          atom_rng.gaussian(),
              lo, hi);
          cycle_level[c] = level;
        }
        break;
      }
    }
  }

  Campaign campaign;
  campaign.config = cfg;
  campaign.physics = physics;
  campaign.runs.resize(static_cast<std::size_t>(cycles) * kSlotsPerCycle);

  auto simulate_cycle_range = [&](int first, int last) {
    for (int c = first; c < last; ++c) {
      Random rng(substream_seed(cfg.seed, static_cast<std::uint64_t>(c)));
      for (int slot = 0; slot < kSlotsPerCycle; ++slot) {
        double atoms = 0.0;
        if (slot < kAtomSlots) {
          atoms = cfg.atom_number_max * cycle_level[c];
          if (cfg.atom_jitter_fraction > 0.0)
            atoms *= std::max(0.0,
                              1.0 + cfg.atom_jitter_fraction * rng.gaussian());
          atoms = std::min(atoms, cfg.atom_number_max);
        }
        campaign.runs[static_cast<std::size_t>(c) * kSlotsPerCycle + slot] =
            simulate_run(cfg, physics, atoms, c, slot, cycle_offset[c], rng);
      }
    }
  };

  threads = std::max(1, std::min(threads, cycles));
  if (threads == 1) {
    simulate_cycle_range(0, cycles);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (cycles + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int first = t * chunk;
      const int last = std::min(cycles, first + chunk);
      if (first < last) pool.emplace_back(simulate_cycle_range, first, last);
    }
    for (auto& worker : pool) worker.join();
  }
  return campaign;
}

void write_campaign_csv(const Campaign& campaign, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");

  out << "cycle_id,slot,is_reference";
  for (int i = 1; i <= campaign.config.pulses_per_run; ++i) out << ",p" << i;
  out << ",atom_signal\n";

  char buf[32];
  for (const auto& run : campaign.runs) {
    out << run.cycle_id << ',' << run.slot << ',' << (run.is_reference ? 1 : 0);
    for (const double p : run.pulses) {
      std::snprintf(buf, sizeof buf, "%.17g", p);
      out << ',' << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", run.atom_signal);
    out << ',' << buf << '\n';
  }
  if (!out) throw DataError(path + ": write failed");
}

std::vector<RawRun> read_campaign_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open campaign CSV");

  std::string line;
  if (!std::getline(in, line))
    throw DataError(path + ": empty campaign file");
  // Count pulse columns from the header.
  int pulse_columns = 0;
  {
    std::istringstream header(line);
    std::string field;
    while (std::getline(header, field, ','))
      if (!field.empty() && field[0] == 'p' &&
          field.find_first_not_of("0123456789", 1) == std::string::npos)
        ++pulse_columns;
  }
  if (pulse_columns == 0)
    throw DataError(path + ": header has no pulse columns");

  std::vector<RawRun> runs;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string field;
    auto next = [&](const char* what) {
      if (!std::getline(fields, field, ','))
        throw DataError(path + ": row " + std::to_string(row) + ": missing " +
                        what);
      return field;
    };
    auto to_double = [&](const std::string& text, const char* what) {
      char* end = nullptr;
      const double value = std::strtod(text.c_str(), &end);
      if (end == text.c_str() || *end != '\0')
        throw DataError(path + ": row " + std::to_string(row) + ": bad " +
                        what + " '" + text + "'");
      return value;
    };

    RawRun run;
    run.cycle_id = static_cast<int>(to_double(next("cycle_id"), "cycle_id"));
    run.slot = static_cast<int>(to_double(next("slot"), "slot"));
    run.is_reference = to_double(next("is_reference"), "is_reference") != 0.0;
    run.pulses.resize(pulse_columns);
    for (int i = 0; i < pulse_columns; ++i)
      run.pulses[i] = to_double(next("pulse"), "pulse value");
    run.atom_signal = to_double(next("atom_signal"), "atom_signal");
    if (std::getline(fields, field, ','))
      throw DataError(path + ": row " + std::to_string(row) +
                      ": trailing fields");
    runs.push_back(std::move(run));
  }
  if (runs.empty()) throw DataError(path + ": no data rows");
  return runs;
}

nlohmann::json sidecar_json(const Campaign& campaign) {
  const auto& cfg = campaign.config;
  const auto& phys = campaign.physics;
  nlohmann::json j;
  j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  j["seed"] = cfg.seed;
  j["campaign"] = {
      {"runs", cfg.runs},
      {"cycles", cfg.runs / kAtomSlots},
      {"pulses_per_run", cfg.pulses_per_run},
      {"pulse_interval", cfg.pulse_interval},
      {"pulse_duration", cfg.pulse_duration},
      {"atom_number_max", cfg.atom_number_max},
      {"atom_number_min_fraction", cfg.atom_min_fraction},
      {"atom_model", cfg.atom_model == config::AtomModel::walk ? "walk"
                     : cfg.atom_model == config::AtomModel::uniform
                         ? "uniform"
                         : "fixed"},
      {"atom_walk_step_fraction", cfg.atom_walk_step_fraction},
      {"atom_jitter_fraction", cfg.atom_jitter_fraction},
      {"detector_noise_var", cfg.detector_noise_var},
      {"classical_noise_coeff", cfg.classical_noise_coeff},
      {"drift_step", cfg.drift_step},
      {"atom_signal_noise_sd", cfg.atom_signal_noise_sd},
      {"partition_noise_fraction", cfg.partition_noise_fraction},
      {"stark_inflation_var", cfg.stark_inflation_var},
  };
  j["physics"] = {
      {"coupling_k", phys.coupling_k},
      {"photons_per_pulse", phys.photons_per_pulse},
      {"fringe_per_pulse", phys.fringe_per_pulse},
      {"probe_photons_per_color", phys.probe_photons_per_color},
      {"eta_ref", phys.eta_ref},
      {"photons_ref", phys.photons_ref},
      {"eta_per_pulse", phys.eta_per_pulse},
      {"re_q_up", phys.re_q_up},
      {"im_q_up", phys.im_q_up},
      {"im_q_down", phys.im_q_down},
      {"waist", phys.waist},
      {"detection_efficiency", phys.detection_efficiency},
  };
  return j;
}

void write_sidecar_json(const Campaign& campaign, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << sidecar_json(campaign).dump(2) << '\n';
  if (!out) throw DataError(path + ": write failed");
}

CampaignMeta read_sidecar_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open sidecar JSON");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& err) {
    throw DataError(path + ": " + err.what());
  }
  try {
    CampaignMeta meta;
    const auto& phys = j.at("physics");
    meta.physics.coupling_k = phys.at("coupling_k").get<double>();
    meta.physics.photons_per_pulse =
        phys.at("photons_per_pulse").get<double>();
    meta.physics.fringe_per_pulse = phys.at("fringe_per_pulse").get<double>();
    meta.physics.probe_photons_per_color =
        phys.at("probe_photons_per_color").get<double>();
    meta.physics.eta_ref = phys.at("eta_ref").get<double>();
    meta.physics.photons_ref = phys.at("photons_ref").get<double>();
    meta.physics.eta_per_pulse = phys.at("eta_per_pulse").get<double>();
    meta.physics.re_q_up = phys.at("re_q_up").get<double>();
    meta.physics.im_q_up = phys.at("im_q_up").get<double>();
    meta.physics.im_q_down = phys.at("im_q_down").get<double>();
    meta.physics.waist = phys.at("waist").get<double>();
    meta.physics.detection_efficiency =
        phys.at("detection_efficiency").get<double>();
    meta.pulses_per_run = j.at("campaign").at("pulses_per_run").get<int>();
    meta.detector_noise_var =
        j.at("campaign").at("detector_noise_var").get<double>();
    meta.seed = j.at("seed").get<std::uint64_t>();
    return meta;
  } catch (const nlohmann::json::exception& err) {
    throw DataError(path + ": " + err.what());
  }
}

}  // namespace sqz::sim
