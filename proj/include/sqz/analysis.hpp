#ifndef SQZ_ANALYSIS_HPP_
#define SQZ_ANALYSIS_HPP_

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sqz/atomic_response.hpp"
#include "sqz/experiment_sim.hpp"

// Statistical pipeline over a campaign: previous-cycle differencing, pulse
// combination, atom-number binning, weighted quadratic fits of the variance
// and covariance curves, noise-budget decomposition, the conditionally
// reduced variance, the squeezing metric, and its sweep against the
// decoherence parameter.

namespace sqz::analysis {

struct PulsePair {
  double phi1 = 0.0;
  double phi2 = 0.0;
  double n = 0.0;  // effective photons per combined measurement
  double atom_signal = 0.0;
};

// a0 + a1 x + a2 x^2 with coefficient covariance from weighted residuals.
struct QuadFit {
  Eigen::Vector3d coeffs = Eigen::Vector3d::Zero();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  double rss = 0.0;
  int n_points = 0;

  double operator()(double x) const {
    return coeffs(0) + coeffs(1) * x + coeffs(2) * x * x;
  }
  double se(int i) const { return std::sqrt(cov(i, i)); }
};

struct BinStats {
  double mean_signal = 0.0;
  double var1 = 0.0, var2 = 0.0, cov12 = 0.0;
  double se_var1 = 0.0, se_var2 = 0.0, se_cov = 0.0;
  int count = 0;
};

struct NoiseBudget {
  double detector = 0.0;       // d0 in phi^2 at the analyzed block size
  double detector_counts2 = 0.0;  // per-pulse detector variance, counts^2
  double light_shot = 0.0;     // v0 - |c0| - d0
  double projection_slope = 0.0;  // v1, per atom
  double classical_quadratic = 0.0;  // v2, per atom^2
  double v0 = 0.0, c0 = 0.0;
};

struct SqueezingReport {
  double kappa2 = 0.0;
  double zeta = 0.0;
  double conditional_db = 0.0;  // 10 log10((R(Nmax)-R(0))/(v1 Nmax))
  double eta = 0.0;             // decoherence at this probe photon number
  double xi_db = 0.0;           // conditional_db plus the coherence penalty
  double xi_db_bin_mean = 0.0;  // mean over bin counts 5..30
  double uncertainty_db = 0.0;  // standard deviation over bin counts 5..30
  double n_probe_photons = 0.0;
  double atoms_max = 0.0;       // rightmost-bin atom number
};

struct SweepPoint {
  int pulses_combined = 0;
  double eta = 0.0;
  double sq_db_mean = 0.0;
  double sq_db_sd = 0.0;
};

struct AtomNumberEstimates {
  double from_slope = 0.0;      // phi_max / (d var / d phi)
  double from_phase = 0.0;      // theta_max 2 pi w^2 / Re Q
  double phi_max_signal = 0.0;  // largest atom_signal, normalized units
  double phi_max_rad = 0.0;     // the same signal converted to radians
};

struct AnalysisOptions {
  int pulses_combined = 10;
  int bins = 10;
  bool differencing = true;
};

struct AnalysisResult {
  AnalysisOptions options;
  int runs_analyzed = 0;
  // Fits against the measured atom signal; slope of the variance curve is
  // the self-calibrated coupling k. Absent when the campaign carries no
  // interrogation runs.
  bool atom_fit_valid = false;
  QuadFit fit_v_signal, fit_c_signal;
  double coupling_slope = 0.0;
  double coupling_slope_se = 0.0;
  // The same fits rescaled to atom-number coordinates (when calibrated).
  std::optional<QuadFit> fit_v_atoms, fit_c_atoms;
  std::vector<BinStats> bins;
  NoiseBudget budget;
  std::optional<SqueezingReport> squeezing;
  std::vector<SweepPoint> sweep;
  std::optional<AtomNumberEstimates> atom_numbers;
  double reference_slope = 0.0;
  double reference_slope_se = 0.0;
};

// phi_1 and phi_2 from the first and second blocks of `pulses_combined`
// pulses, each normalized by n = pulses_combined * photons_per_pulse.
PulsePair combine_pulses(const sim::RawRun& run, int pulses_combined,
                         double photons_per_pulse);

// Subtracts each run's pulse train from the same slot of the previous MOT
// cycle and drops the first cycle. White-noise variances double; callers
// compensate through the variance_scale argument of bin_by_atom_number.
std::vector<sim::RawRun> subtract_previous_cycle(
    const std::vector<sim::RawRun>& runs);

// Equal-population bins sorted by atom signal. Unbiased variances and
// covariance per bin; the standard error of a variance estimate over m
// samples is var * sqrt(2/(m-1)).
std::vector<BinStats> bin_by_atom_number(std::vector<PulsePair> pairs,
                                         int n_bins,
                                         double variance_scale = 1.0);

// Weighted least squares via scaled normal equations; weights are inverse
// variances of y. Throws DataError on rank deficiency.
QuadFit fit_quadratic(const std::vector<double>& x,
                      const std::vector<double>& y,
                      const std::vector<double>& weights);

// R(x) = V(x) (1 - (C(x)/V(x))^2); requires V(x) > 0.
double conditional_reduced_curve(const QuadFit& v, const QuadFit& c, double x);

// SQ = 10 log10( (R(Nmax) - R(0)) / (v1 Nmax) * (1-eta_se)^(-2 nP/n_se) ).
double squeezing_metric(const QuadFit& v, const QuadFit& c, double atoms_max,
                        double n_probe, double eta_se, double n_se);

// Supplementary atom-number estimators.
double atom_number_from_slope(double var_slope, double phi_max);
double atom_number_from_phase(double phi_max_rad,
                              const atomic::Polarizability& q, double waist);

AnalysisResult analyze_campaign(const std::vector<sim::RawRun>& runs,
                                const sim::CampaignMeta& meta,
                                const AnalysisOptions& options);

nlohmann::json report_json(const AnalysisResult& result,
                           const sim::CampaignMeta& meta);
void write_report_json(const AnalysisResult& result,
                       const sim::CampaignMeta& meta, const std::string& path);
// Plot data per bin: atom number, variances, covariance, predicted R, and
// standard errors.
void write_plot_csv(const AnalysisResult& result, const std::string& path);

}  // namespace sqz::analysis

#endif  // SQZ_ANALYSIS_HPP_
