#include "sqz/qnd_channel.hpp"

#include <cmath>
#include <stdexcept>

#include "sqz/numeric.hpp"

namespace sqz::qnd {

double measurement_strength(double photons_total, double coupling,
                            double atom_count) {
  if (photons_total < 0.0 || atom_count < 0.0)
    throw std::invalid_argument(
        "measurement_strength: photon and atom numbers must be non-negative");
  return photons_total * coupling * coupling * atom_count;
}

double optimal_gain(double kappa2) {
  if (kappa2 < 0.0)
    throw std::invalid_argument("optimal_gain: kappa^2 must be non-negative");
  return kappa2 / (1.0 + kappa2);
}

double conditional_variance(double n1, double n2, double coupling,
                            double atom_count) {
  if (!(n1 > 0.0) || !(n2 > 0.0))
    throw std::invalid_argument(
        "conditional_variance: photon numbers must be positive");
  const double kappa2 = measurement_strength(n1, coupling, atom_count);
  return 1.0 / n2 +
         coupling * coupling * atom_count / (1.0 + kappa2);
}

MeasurementOutcome MeasurementChain::measure(const QndPulseSpec& pulse,
                                             Random& rng) {
  if (!(pulse.photons_total > 0.0))
    throw std::invalid_argument("measure: photons_total must be positive");

  if (!latent_drawn_) {
    latent_jz_ = state_.mean(2) + std::sqrt(state_.cov(2, 2)) * rng.gaussian();
    latent_drawn_ = true;
  } else if (pulse.jz_diffusion_var > 0.0) {
    latent_jz_ += std::sqrt(pulse.jz_diffusion_var) * rng.gaussian();
  }
  if (pulse.jz_diffusion_var > 0.0)
    state_.cov(2, 2) += pulse.jz_diffusion_var;

  const double n = pulse.photons_total;
  const double k = pulse.coupling;
  const double phi = 2.0 * k * latent_jz_ + rng.gaussian() / std::sqrt(n);

  // Condition the Gaussian state on phi = 2 k J_z + noise(1/n). Only the
  // deterministic part depends on the draw-free quantities: the posterior
  // variance of J_z is prior / (1 + kappa2_pulse).
  const double var_phi = 4.0 * k * k * state_.cov(2, 2) + 1.0 / n;
  if (var_phi > 0.0 && k != 0.0) {
    const Eigen::Vector3d cov_z = state_.cov.col(2);
    const Eigen::Vector3d gain = (2.0 * k / var_phi) * cov_z;
    state_.mean += gain * (phi - 2.0 * k * state_.mean(2));
    state_.cov -= (4.0 * k * k / var_phi) * (cov_z * cov_z.transpose());
  }
  if (pulse.jx_inflation_var > 0.0)
    state_.cov(0, 0) += pulse.jx_inflation_var;
  state_ = spin::shrink_coherence(state_, pulse.eta_per_pulse);

  return {phi, state_};
}

MeasurementOutcome sample_measurement(const spin::SpinState& state,
                                      const QndPulseSpec& pulse, Random& rng) {
  MeasurementChain chain(state);
  return chain.measure(pulse, rng);
}

double eta_from_photons(double photons, double eta_ref, double photons_ref) {
  if (photons < 0.0)
    throw std::invalid_argument("eta_from_photons: photons must be >= 0");
  if (eta_ref < 0.0 || eta_ref >= 1.0)
    throw std::invalid_argument("eta_from_photons: eta_ref must be in [0, 1)");
  if (!(photons_ref > 0.0))
    throw std::invalid_argument("eta_from_photons: photons_ref must be > 0");
  return 1.0 - std::pow(1.0 - eta_ref, photons / photons_ref);
}

double xi_vs_eta(const TradeoffModel& model, double eta) {
  if (eta < 0.0 || eta >= 1.0)
    throw std::invalid_argument("xi_vs_eta: eta must be in [0, 1)");
  const double kappa2 = model.kappa2_per_eta * model.optical_depth * eta;
  const double coherence = 1.0 - eta;
  return 1.0 / ((1.0 + kappa2) * coherence * coherence);
}

std::pair<double, double> find_optimal_eta(const TradeoffModel& model) {
  if (model.optical_depth < 0.0 || model.kappa2_per_eta < 0.0)
    throw std::invalid_argument("find_optimal_eta: model must be non-negative");
  auto objective = [&](double eta) { return xi_vs_eta(model, eta); };
  const double lo = 0.0, hi = 1.0 - 1e-9;
  const double eta_star = numeric::minimize(objective, lo, hi, 1e-10);
  return {eta_star, objective(eta_star)};
}

}  // namespace sqz::qnd
