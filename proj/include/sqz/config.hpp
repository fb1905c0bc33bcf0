#ifndef SQZ_CONFIG_HPP_
#define SQZ_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sqz/atomic_response.hpp"
#include "sqz/qnd_channel.hpp"

// Structured-text configuration: `key = value` lines, `#` comments,
// repeated keys accumulate (used for transition-line tables). The file
// header declares the unit system; only MHz frequencies and meter lengths
// are accepted. Parse errors carry file:line diagnostics.

namespace sqz::config {

class KeyValueFile {
 public:
  static KeyValueFile parse_file(const std::string& path);
  static KeyValueFile parse_string(const std::string& text,
                                   const std::string& name);

  bool has(const std::string& key) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  std::uint64_t get_u64(const std::string& key) const;
  std::uint64_t get_u64_or(const std::string& key,
                           std::uint64_t fallback) const;
  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key,
                            const std::string& fallback) const;
  // All values recorded under `key`, in file order.
  std::vector<std::string> get_all(const std::string& key) const;

  const std::string& name() const { return name_; }
  // file:line prefix for error messages about `key`.
  std::string location(const std::string& key) const;

 private:
  struct Entry {
    std::string value;
    int line;
  };
  std::string name_;
  std::map<std::string, std::vector<Entry>> entries_;

  const Entry& single(const std::string& key) const;
};

struct PhysicsConfig {
  atomic::ProbeColor probe_up;
  atomic::ProbeColor probe_down;
  atomic::BeamGeometry geometry;
  double eta_ref = 0.0;      // echo-calibrated decoherence reference
  double photons_ref = 0.0;  // photons producing eta_ref
  qnd::TradeoffModel tradeoff;
  double prediction_atom_count = 0.0;
  int prediction_pulses_combined = 1;
  std::optional<double> coupling_override;
};

enum class AtomModel { walk, uniform, fixed };

struct CampaignConfig {
  int runs = 2000;  // interrogated ensembles; four per MOT cycle
  int pulses_per_run = 20;
  double pulse_interval = 20e-6;
  double pulse_duration = 10e-6;
  double atom_number_max = 1.2e5;
  double atom_min_fraction = 0.1;
  AtomModel atom_model = AtomModel::walk;
  double atom_walk_step_fraction = 0.06;
  double atom_jitter_fraction = 0.01;
  double detector_noise_var = 0.0;     // counts^2 per pulse
  double classical_noise_coeff = 0.0;  // per-atom signal sd, gives v2 N^2
  double drift_step = 0.0;             // counts; per-cycle random-walk step
  double atom_signal_noise_sd = 0.0;   // detection noise on the N_A signal
  double partition_noise_fraction = 0.0;  // per pulse, of N_A/4
  double stark_inflation_var = 0.0;       // atoms^2 per pulse on J_x
  std::uint64_t seed = 1;
  std::optional<double> coupling_override;
};

PhysicsConfig load_physics_config(const std::string& path);
CampaignConfig load_campaign_config(const std::string& path);

}  // namespace sqz::config

#endif  // SQZ_CONFIG_HPP_
