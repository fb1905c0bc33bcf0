#ifndef SQZ_ATOMIC_RESPONSE_HPP_
#define SQZ_ATOMIC_RESPONSE_HPP_

#include <complex>
#include <vector>

// Dispersive atom-light interface: complex polarizability of a probe color
// from its transition table, phase shift and absorption of a plane wave,
// the per-atom coupling constant of the balanced interferometer signal, and
// the scattering-induced decoherence of a dichromatic pulse.
//
// Units: detunings and linewidths share one frequency unit (the shipped
// configs use MHz); lengths are in meters; polarizabilities come out in m^2.

namespace sqz::atomic {

struct TransitionLine {
  double cg_weight = 0.0;  // dimensionless line strength factor, in [0, 1]
  double detuning = 0.0;   // offset from line center, same unit as gamma
};

struct ProbeColor {
  std::vector<TransitionLine> lines;
  double gamma = 0.0;              // natural linewidth
  double wavelength = 0.0;         // vacuum wavelength [m]
  double photons_probe = 0.0;      // probe-arm photons per pulse
  double photons_reference = 0.0;  // detected reference-arm photons per pulse
};

struct BeamGeometry {
  double waist = 0.0;                 // probe beam waist w [m]
  double detection_efficiency = 0.0;  // t, detection probability in (0, 1]
  double interaction_length = 0.0;    // L [m]
};

using Polarizability = std::complex<double>;

// Throw std::invalid_argument when an invariant is violated.
void validate(const ProbeColor& color);
void validate(const BeamGeometry& geom);

// Q = -(3 lambda^2 / 4 pi) sum_l w_l / (Delta_l/gamma + i/2).
// Im Q >= 0 for non-negative line weights.
Polarizability compute_q(const ProbeColor& color);

// Shift applied uniformly to all of `movable`'s detunings so that
// Re Q(movable) matches Re Q(fixed) to relative tolerance 1e-10. The shift
// is searched in [search_lo, search_hi]; throws NumericalError when that
// interval does not bracket a balance point.
double balance_detuning(const ProbeColor& fixed, const ProbeColor& movable,
                        double search_lo, double search_hi);

// n = 2 (n_R + t n_P): total detected photons of one dichromatic pulse.
double effective_photon_number(const BeamGeometry& geom, double photons_probe,
                               double photons_reference);

// Interferometer fringe amplitude sqrt(t n_R n_P).
double fringe_amplitude(const BeamGeometry& geom, double photons_probe,
                        double photons_reference);

// Per-atom coupling constant k = ntilde Re Q / (n pi w^2) of the normalized
// differential signal phi = dn/n + 2 k J_z. Invariant under a common
// rescaling of the probe and reference photon numbers.
double coupling_constant(const Polarizability& q, const BeamGeometry& geom,
                         double photons_probe, double photons_reference);

// theta = (1/2) n_A Re Q for a plane wave through column density n_A [1/m^2].
double phase_shift(const Polarizability& q, double column_density);

// alpha = n_A Im Q.
double absorption(const Polarizability& q, double column_density);

// var(dn) = ntilde^2 (Re Q)^2 n_A / (pi w^2): projection-noise variance of
// the differential photon count for an equal-superposition ensemble.
double css_signal_variance(const Polarizability& q, const BeamGeometry& geom,
                           double column_density, double fringe_amplitude);

// Decohered fraction after a dichromatic pulse pair carrying total_photons
// (= 2 n_P, both colors counted):
//   eta = 1 - Int I_P(r) exp(-total_photons I_P(r) (Im Q_up + Im Q_dn)/4) dA
// with the Gaussian mode I_P(r) = 2/(pi w^2) exp(-2 r^2 / w^2). Evaluated by
// adaptive quadrature on the radial coordinate to relative tolerance 1e-8.
double predict_eta(const ProbeColor& up, const ProbeColor& down,
                   const BeamGeometry& geom, double total_photons);

}  // namespace sqz::atomic

#endif  // SQZ_ATOMIC_RESPONSE_HPP_
