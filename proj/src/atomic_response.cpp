#include "sqz/atomic_response.hpp"

#include <cmath>
#include <stdexcept>

#include "sqz/errors.hpp"
#include "sqz/numeric.hpp"

namespace sqz::atomic {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void validate(const ProbeColor& color) {
  if (color.lines.empty())
    throw std::invalid_argument("probe color needs at least one line");
  if (!(color.gamma > 0.0))
    throw std::invalid_argument("probe linewidth must be positive");
  if (!(color.wavelength > 0.0))
    throw std::invalid_argument("probe wavelength must be positive");
  if (color.photons_probe < 0.0 || color.photons_reference < 0.0)
    throw std::invalid_argument("photon numbers must be non-negative");
  for (const auto& line : color.lines) {
    if (line.cg_weight < 0.0 || line.cg_weight > 1.0)
      throw std::invalid_argument("line strength factor must be in [0, 1]");
    if (!std::isfinite(line.detuning))
      throw std::invalid_argument("line detuning must be finite");
  }
}

void validate(const BeamGeometry& geom) {
  if (!(geom.waist > 0.0))
    throw std::invalid_argument("beam waist must be positive");
  if (!(geom.detection_efficiency > 0.0) || geom.detection_efficiency > 1.0)
    throw std::invalid_argument("detection efficiency must be in (0, 1]");
}

Polarizability compute_q(const ProbeColor& color) {
  validate(color);
  std::complex<double> sum{0.0, 0.0};
  for (const auto& line : color.lines)
    sum += line.cg_weight /
           std::complex<double>(line.detuning / color.gamma, 0.5);
  const double scale = 3.0 * color.wavelength * color.wavelength / (4.0 * kPi);
  return -scale * sum;
}

double balance_detuning(const ProbeColor& fixed, const ProbeColor& movable,
                        double search_lo, double search_hi) {
  const double target = compute_q(fixed).real();
  auto mismatch = [&](double shift) {
    ProbeColor shifted = movable;
    for (auto& line : shifted.lines) line.detuning += shift;
    return compute_q(shifted).real() - target;
  };
  try {
    return numeric::find_root(mismatch, search_lo, search_hi, 1e-10);
  } catch (const NumericalError&) {
    throw NumericalError(
        "balance_detuning: no balance point bracketed in the search interval");
  }
}

double effective_photon_number(const BeamGeometry& geom, double photons_probe,
                               double photons_reference) {
  return 2.0 * (photons_reference +
                geom.detection_efficiency * photons_probe);
}

double fringe_amplitude(const BeamGeometry& geom, double photons_probe,
                        double photons_reference) {
  return std::sqrt(geom.detection_efficiency * photons_reference *
                   photons_probe);
}

double coupling_constant(const Polarizability& q, const BeamGeometry& geom,
                         double photons_probe, double photons_reference) {
  validate(geom);
  const double n = effective_photon_number(geom, photons_probe,
                                           photons_reference);
  if (!(n > 0.0))
    throw std::invalid_argument(
        "coupling_constant: effective photon number must be positive");
  const double ntilde = fringe_amplitude(geom, photons_probe,
                                         photons_reference);
  return ntilde * q.real() / (n * kPi * geom.waist * geom.waist);
}

double phase_shift(const Polarizability& q, double column_density) {
  if (column_density < 0.0)
    throw std::invalid_argument("column density must be non-negative");
  return 0.5 * column_density * q.real();
}

double absorption(const Polarizability& q, double column_density) {
  if (column_density < 0.0)
    throw std::invalid_argument("column density must be non-negative");
  return column_density * q.imag();
}

double css_signal_variance(const Polarizability& q, const BeamGeometry& geom,
                           double column_density, double fringe_amplitude) {
  validate(geom);
  if (column_density < 0.0)
    throw std::invalid_argument("column density must be non-negative");
  const double re = q.real();
  return fringe_amplitude * fringe_amplitude * re * re * column_density /
         (kPi * geom.waist * geom.waist);
}

double predict_eta(const ProbeColor& up, const ProbeColor& down,
                   const BeamGeometry& geom, double total_photons) {
  validate(geom);
  if (total_photons < 0.0)
    throw std::invalid_argument("photon number must be non-negative");
  if (total_photons == 0.0) return 0.0;

  const double im_sum = compute_q(up).imag() + compute_q(down).imag();
  const double w2 = geom.waist * geom.waist;
  const double peak = 2.0 / (kPi * w2);  // on-axis mode intensity
  const double a = total_photons * im_sum / 4.0;

  // Angular part is trivial; integrate the radial profile out to 8 waists,
  // beyond which the mode carries ~1e-55 of the weight.
  auto integrand = [&](double r) {
    const double intensity = peak * std::exp(-2.0 * r * r / w2);
    return 2.0 * kPi * r * intensity * std::exp(-a * intensity);
  };
  const double survival =
      numeric::integrate(integrand, 0.0, 8.0 * geom.waist, 1e-8);
  return 1.0 - survival;
}

}  // namespace sqz::atomic
