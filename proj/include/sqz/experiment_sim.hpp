#ifndef SQZ_EXPERIMENT_SIM_HPP_
#define SQZ_EXPERIMENT_SIM_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sqz/config.hpp"
#include "sqz/rng.hpp"

// Synthetic campaigns with the structure of the real noise-measurement
// sequence: MOT cycles of four interrogated ensembles plus three no-atom
// reference records, 20-pulse trains sharing one latent J_z, an atom-number
// detection signal, and a slow common-mode drift. Deterministic for a fixed
// (config, seed); cycles are simulated from independent substreams so the
// campaign is identical at any thread count.

namespace sqz::sim {

inline constexpr int kSlotsPerCycle = 7;   // 0..3 atoms, 4..6 reference
inline constexpr int kAtomSlots = 4;

// Per-pulse physics snapshot the simulator runs on; recorded in the sidecar
// so the analysis can renormalize signals and model decoherence.
struct PhysicsDerived {
  double coupling_k = 0.0;             // per-pulse k in phi = 2 k J_z + dn/n
  double photons_per_pulse = 0.0;      // n = 2 (n_R + t n_P), one pulse
  double fringe_per_pulse = 0.0;       // sqrt(t n_R n_P), one pulse
  double probe_photons_per_color = 0.0;  // n_P, probe arm, one pulse
  double eta_ref = 0.0;
  double photons_ref = 0.0;
  double eta_per_pulse = 0.0;
  double re_q_up = 0.0;
  double im_q_up = 0.0;
  double im_q_down = 0.0;
  double waist = 0.0;
  double detection_efficiency = 0.0;
};

// Evaluates the probe polarizabilities and the per-pulse coupling; the
// campaign's coupling override, when set, replaces the plane-wave k.
PhysicsDerived derive_physics(const config::PhysicsConfig& physics,
                              const config::CampaignConfig& campaign);

struct RawRun {
  int cycle_id = 0;
  int slot = 0;
  bool is_reference = false;
  std::vector<double> pulses;  // differential photon counts p_1..p_20
  double atom_signal = 0.0;    // k N_A plus detection noise
  // Ground truth for oracle tests; never exported to the campaign CSV.
  double true_atom_count = 0.0;
  double latent_jz = 0.0;
};

struct Campaign {
  config::CampaignConfig config;
  PhysicsDerived physics;
  std::vector<RawRun> runs;  // cycle-major, slot order 0..6
};

// One interrogation: draws the latent J_z from a fresh CSS, applies the
// pulse train with shot noise 1/n, detector noise, the cycle's drift
// offset, and an atom-correlated classical offset; reference slots carry
// no atoms. `cycle_offset` is the drift offset shared by the whole cycle.
RawRun simulate_run(const config::CampaignConfig& cfg,
                    const PhysicsDerived& physics, double atom_count,
                    int cycle_id, int slot, double cycle_offset, Random& rng);

Campaign simulate_campaign(const config::CampaignConfig& cfg,
                           const PhysicsDerived& physics, int threads = 1);

// Campaign CSV: header row, one run per row, 17 significant digits.
void write_campaign_csv(const Campaign& campaign, const std::string& path);
std::vector<RawRun> read_campaign_csv(const std::string& path);

// Everything the analysis needs about how a campaign was generated.
struct CampaignMeta {
  PhysicsDerived physics;
  int pulses_per_run = 20;
  double detector_noise_var = 0.0;
  std::uint64_t seed = 0;
};

void write_sidecar_json(const Campaign& campaign, const std::string& path);
CampaignMeta read_sidecar_json(const std::string& path);
nlohmann::json sidecar_json(const Campaign& campaign);

}  // namespace sqz::sim

#endif  // SQZ_EXPERIMENT_SIM_HPP_
