#include "sqz/prediction.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "sqz/atomic_response.hpp"
#include "sqz/qnd_channel.hpp"
#include "sqz/version.hpp"

namespace sqz {

nlohmann::json prediction_report(const config::PhysicsConfig& cfg) {
  const auto q_up = atomic::compute_q(cfg.probe_up);
  const auto q_dn = atomic::compute_q(cfg.probe_down);

  nlohmann::json j;
  j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  j["q_up"] = {{"re", q_up.real()}, {"im", q_up.imag()}};
  j["q_down"] = {{"re", q_dn.real()}, {"im", q_dn.imag()}};

  const double n_p = cfg.probe_up.photons_probe;
  const double n_r = cfg.probe_up.photons_reference;
  const double n_pulse =
      atomic::effective_photon_number(cfg.geometry, n_p, n_r);

  if (n_pulse > 0.0) {
    const double k = cfg.coupling_override
                         ? *cfg.coupling_override
                         : atomic::coupling_constant(q_up, cfg.geometry, n_p,
                                                     n_r);
    const int pulses = cfg.prediction_pulses_combined;
    const double n_block = pulses * n_pulse;
    const double atoms = cfg.prediction_atom_count;
    const double kappa2 = qnd::measurement_strength(n_block, k, atoms);
    j["coupling_k"] = k;
    j["coupling_k_derived"] =
        atomic::coupling_constant(q_up, cfg.geometry, n_p, n_r);
    j["pulses_combined"] = pulses;
    j["atom_count"] = atoms;
    j["kappa2"] = kappa2;
    j["zeta"] = qnd::optimal_gain(kappa2);
    // atomic part of var(phi2 - zeta phi1) relative to projection noise
    j["conditional_db"] = -10.0 * std::log10(1.0 + kappa2);
    j["conditional_variance"] =
        qnd::conditional_variance(n_block, n_block, k, atoms);
    const double n_probe = 2.0 * pulses * n_p;
    j["eta_model_working_point"] =
        qnd::eta_from_photons(n_probe, cfg.eta_ref, cfg.photons_ref);
    j["n_probe_photons"] = n_probe;
  } else {
    j["coupling_k"] = 0.0;
    j["kappa2"] = 0.0;
    j["zeta"] = 0.0;
    j["conditional_db"] = nullptr;
    j["eta_model_working_point"] = 0.0;
    j["n_probe_photons"] = 0.0;
  }

  j["eta_scattering_at_reference"] = atomic::predict_eta(
      cfg.probe_up, cfg.probe_down, cfg.geometry, cfg.photons_ref);
  j["eta_reference_photons"] = cfg.photons_ref;

  const auto [eta_star, xi_min] = qnd::find_optimal_eta(cfg.tradeoff);
  j["tradeoff"] = {{"optical_depth", cfg.tradeoff.optical_depth},
                   {"kappa2_per_eta", cfg.tradeoff.kappa2_per_eta},
                   {"eta_optimal", eta_star},
                   {"xi_min", xi_min},
                   {"xi_min_db", 10.0 * std::log10(xi_min)}};
  return j;
}

}  // namespace sqz
