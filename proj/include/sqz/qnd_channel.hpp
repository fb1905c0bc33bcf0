#ifndef SQZ_QND_CHANNEL_HPP_
#define SQZ_QND_CHANNEL_HPP_

#include <utility>

#include "sqz/rng.hpp"
#include "sqz/spin_state.hpp"

// Dichromatic QND measurement channel: stochastic sampling of the
// normalized differential signal phi = dn/n + 2 k J_z, Gaussian conditional
// update of the state, and the closed-form strength / gain / trade-off
// relations.

namespace sqz::qnd {

struct QndPulseSpec {
  double photons_total = 0.0;  // n = 2 (n_R + t n_P), sets the 1/n shot term
  double coupling = 0.0;       // k, per atom
  double eta_per_pulse = 0.0;  // coherence lost to scattering in this pulse
  // Optional per-pulse variance inflation of J_z from magnetic-sublevel
  // partition noise (atoms^2, default off).
  double jz_diffusion_var = 0.0;
  // Optional per-pulse variance inflation of J_x from differential Stark
  // imbalance (atoms^2, default off). Only the anti-squeezed component.
  double jx_inflation_var = 0.0;
};

struct MeasurementOutcome {
  double phi = 0.0;
  spin::SpinState posterior;
};

// kappa^2 = C d eta, the measurement-strength budget of an ensemble with
// resonant optical depth d.
struct TradeoffModel {
  double optical_depth = 0.0;   // d
  double kappa2_per_eta = 1.0;  // C
};

// kappa^2 = n k^2 N_A.
double measurement_strength(double photons_total, double coupling,
                            double atom_count);

// zeta = kappa^2 / (1 + kappa^2), the regression coefficient predicting a
// second measurement from the first.
double optimal_gain(double kappa2);

// var(phi_2 - zeta phi_1) = 1/n_2 + k^2 N_A / (1 + kappa^2) with
// kappa^2 = n_1 k^2 N_A.
double conditional_variance(double n1, double n2, double coupling,
                            double atom_count);

// One QND run: the latent J_z is drawn once from the initial state and then
// held fixed across all pulses (measurement back-action does not disturb
// the measured observable); each pulse conditions the Gaussian state on the
// noisy readout and applies the pulse's coherence loss.
class MeasurementChain {
 public:
  explicit MeasurementChain(spin::SpinState initial)
      : state_(std::move(initial)) {}

  MeasurementOutcome measure(const QndPulseSpec& pulse, Random& rng);

  const spin::SpinState& state() const { return state_; }
  double latent_jz() const { return latent_jz_; }
  bool latent_drawn() const { return latent_drawn_; }

 private:
  spin::SpinState state_;
  double latent_jz_ = 0.0;
  bool latent_drawn_ = false;
};

// Convenience wrapper for a single measurement on a fresh state.
MeasurementOutcome sample_measurement(const spin::SpinState& state,
                                      const QndPulseSpec& pulse, Random& rng);

// eta(n_P) = 1 - (1 - eta_ref)^(n_P / n_ref): decoherence from probing with
// n_P photons, referenced to a calibration point.
double eta_from_photons(double photons, double eta_ref, double photons_ref);

// xi(eta) = 1 / ((1 + C d eta) (1 - eta)^2): conditioning gain against the
// squared coherence penalty.
double xi_vs_eta(const TradeoffModel& model, double eta);

// Minimizes xi_vs_eta over eta in (0, 1); returns (eta*, xi_min). For large
// C d the optimum approaches eta = 1/3 with xi_min (1 + kappa^2) -> 9/4.
std::pair<double, double> find_optimal_eta(const TradeoffModel& model);

}  // namespace sqz::qnd

#endif  // SQZ_QND_CHANNEL_HPP_
