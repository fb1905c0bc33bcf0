#include "sqz/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "sqz/errors.hpp"
#include "sqz/qnd_channel.hpp"
#include "sqz/version.hpp"

namespace sqz::analysis {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kSweepBinsLo = 5;
constexpr int kSweepBinsHi = 30;
constexpr int kSweepMaxPulses = 10;

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double acc = 0.0;
  for (const double x : v) acc += (x - mu) * (x - mu);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

PulsePair combine_pulses(const sim::RawRun& run, int pulses_combined,
                         double photons_per_pulse) {
  const int total = static_cast<int>(run.pulses.size());
  if (pulses_combined < 1 || 2 * pulses_combined > total)
    throw DataError("combine_pulses: need 1 <= P and 2P <= " +
                    std::to_string(total));
  if (!(photons_per_pulse > 0.0))
    throw DataError("combine_pulses: photons_per_pulse must be positive");

  PulsePair pair;
  pair.n = pulses_combined * photons_per_pulse;
  double sum1 = 0.0, sum2 = 0.0;
  for (int i = 0; i < pulses_combined; ++i) {
    sum1 += run.pulses[i];
    sum2 += run.pulses[pulses_combined + i];
  }
  pair.phi1 = sum1 / pair.n;
  pair.phi2 = sum2 / pair.n;
  pair.atom_signal = run.atom_signal;
  return pair;
}

std::vector<sim::RawRun> subtract_previous_cycle(
    const std::vector<sim::RawRun>& runs) {
  if (runs.empty()) throw DataError("subtract_previous_cycle: empty campaign");

  std::map<std::pair<int, int>, const sim::RawRun*> by_slot;
  int first_cycle = runs.front().cycle_id;
  for (const auto& run : runs) {
    first_cycle = std::min(first_cycle, run.cycle_id);
    by_slot[{run.cycle_id, run.slot}] = &run;
  }

  std::vector<sim::RawRun> out;
  out.reserve(runs.size());
  for (const auto& run : runs) {
    if (run.cycle_id == first_cycle) continue;
    const auto it = by_slot.find({run.cycle_id - 1, run.slot});
    if (it == by_slot.end())
      throw DataError("subtract_previous_cycle: no predecessor for cycle " +
                      std::to_string(run.cycle_id) + " slot " +
                      std::to_string(run.slot));
    const sim::RawRun& prev = *it->second;
    if (prev.pulses.size() != run.pulses.size())
      throw DataError("subtract_previous_cycle: pulse count mismatch");
    sim::RawRun diff = run;
    for (std::size_t i = 0; i < diff.pulses.size(); ++i)
      diff.pulses[i] -= prev.pulses[i];
    out.push_back(std::move(diff));
  }
  if (out.empty())
    throw DataError("subtract_previous_cycle: campaign has a single cycle");
  return out;
}

std::vector<BinStats> bin_by_atom_number(std::vector<PulsePair> pairs,
                                         int n_bins, double variance_scale) {
  if (n_bins < 1) throw DataError("bin_by_atom_number: need at least one bin");
  const int m = static_cast<int>(pairs.size());
  if (m < 2 * n_bins)
    throw DataError("bin_by_atom_number: fewer than two pairs per bin (" +
                    std::to_string(m) + " pairs, " + std::to_string(n_bins) +
                    " bins)");

  std::sort(pairs.begin(), pairs.end(),
            [](const PulsePair& a, const PulsePair& b) {
              return a.atom_signal < b.atom_signal;
            });

  std::vector<BinStats> bins;
  bins.reserve(n_bins);
  const int base = m / n_bins;
  const int extra = m % n_bins;
  int begin = 0;
  for (int b = 0; b < n_bins; ++b) {
    const int size = base + (b < extra ? 1 : 0);
    const int end = begin + size;

    double ms = 0.0, m1 = 0.0, m2 = 0.0;
    for (int i = begin; i < end; ++i) {
      ms += pairs[i].atom_signal;
      m1 += pairs[i].phi1;
      m2 += pairs[i].phi2;
    }
    ms /= size;
    m1 /= size;
    m2 /= size;

    double s11 = 0.0, s22 = 0.0, s12 = 0.0;
    for (int i = begin; i < end; ++i) {
      const double d1 = pairs[i].phi1 - m1;
      const double d2 = pairs[i].phi2 - m2;
      s11 += d1 * d1;
      s22 += d2 * d2;
      s12 += d1 * d2;
    }
    const double dof = size - 1;
    BinStats stats;
    stats.mean_signal = ms;
    stats.var1 = variance_scale * s11 / dof;
    stats.var2 = variance_scale * s22 / dof;
    stats.cov12 = variance_scale * s12 / dof;
    stats.se_var1 = stats.var1 * std::sqrt(2.0 / dof);
    stats.se_var2 = stats.var2 * std::sqrt(2.0 / dof);
    stats.se_cov =
        std::sqrt(std::max(0.0, stats.var1 * stats.var2 +
                                    stats.cov12 * stats.cov12) /
                  dof);
    stats.count = size;
    bins.push_back(stats);
    begin = end;
  }
  return bins;
}

QuadFit fit_quadratic(const std::vector<double>& x,
                      const std::vector<double>& y,
                      const std::vector<double>& weights) {
  const int m = static_cast<int>(x.size());
  if (m < 3 || y.size() != x.size() || weights.size() != x.size())
    throw DataError("fit_quadratic: need at least three weighted points");

  // Column scaling keeps the normal equations well conditioned when the
  // abscissa is large (atom numbers ~1e5) or tiny (signals ~1e-2).
  double xmax = 0.0;
  for (const double xi : x) xmax = std::max(xmax, std::abs(xi));
  const double s1 = xmax > 0.0 ? xmax : 1.0;
  const double s2 = s1 * s1;

  Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (int i = 0; i < m; ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
      throw DataError("fit_quadratic: weights must be positive and finite");
    const Eigen::Vector3d row(1.0, x[i] / s1, x[i] * x[i] / s2);
    normal += weights[i] * row * row.transpose();
    rhs += weights[i] * y[i] * row;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(normal);
  const double lmin = eig.eigenvalues()(0);
  const double lmax = eig.eigenvalues()(2);
  if (!(lmin > 0.0) || lmax / lmin > 1e12)
    throw DataError("fit_quadratic: design matrix is rank deficient");

  const Eigen::Vector3d scaled = eig.eigenvectors() *
                                 (eig.eigenvalues().cwiseInverse().asDiagonal() *
                                  (eig.eigenvectors().transpose() * rhs));
  Eigen::Matrix3d inv = eig.eigenvectors() *
                        eig.eigenvalues().cwiseInverse().asDiagonal() *
                        eig.eigenvectors().transpose();

  QuadFit fit;
  fit.n_points = m;
  double rss = 0.0;
  for (int i = 0; i < m; ++i) {
    const double pred = scaled(0) + scaled(1) * x[i] / s1 +
                        scaled(2) * x[i] * x[i] / s2;
    rss += weights[i] * (y[i] - pred) * (y[i] - pred);
  }
  fit.rss = rss;
  // Covariance from the weighted residuals (reduced chi^2 times the
  // inverse normal matrix); exact interpolation keeps the bare inverse.
  const double chi2_red = m > 3 ? rss / (m - 3) : 1.0;
  inv *= chi2_red;

  const Eigen::Vector3d scale(1.0, 1.0 / s1, 1.0 / s2);
  fit.coeffs = scaled.cwiseProduct(scale);
  fit.cov = scale.asDiagonal() * inv * scale.asDiagonal();
  return fit;
}

double conditional_reduced_curve(const QuadFit& v, const QuadFit& c,
                                 double x) {
  const double vx = v(x);
  if (!(vx > 0.0))
    throw NumericalError("conditional_reduced_curve: V(x) must be positive");
  const double ratio = c(x) / vx;
  return vx * (1.0 - ratio * ratio);
}

double squeezing_metric(const QuadFit& v, const QuadFit& c, double atoms_max,
                        double n_probe, double eta_se, double n_se) {
  const double v1_term = v.coeffs(1) * atoms_max;
  if (!(v1_term > 0.0))
    throw NumericalError("squeezing_metric: projection-noise term v1 Nmax"
                         " must be positive");
  const double reduced = conditional_reduced_curve(v, c, atoms_max) -
                         conditional_reduced_curve(v, c, 0.0);
  const double penalty =
      std::pow(1.0 - eta_se, -2.0 * n_probe / n_se);
  const double argument = reduced / v1_term * penalty;
  if (!(argument > 0.0))
    throw NumericalError("squeezing_metric: nonpositive argument of log");
  return 10.0 * std::log10(argument);
}

double atom_number_from_slope(double var_slope, double phi_max) {
  if (!(var_slope > 0.0))
    throw NumericalError("atom_number_from_slope: slope must be positive");
  return phi_max / var_slope;
}

double atom_number_from_phase(double phi_max_rad,
                              const atomic::Polarizability& q, double waist) {
  if (q.real() == 0.0)
    throw NumericalError("atom_number_from_phase: Re Q must be nonzero");
  return phi_max_rad * 2.0 * kPi * waist * waist / q.real();
}

namespace {

// One pulse-combination working set: pairs split by run type, sorted by
// atom signal, with the decoherence bookkeeping for this block size.
struct PipelineContext {
  std::vector<PulsePair> atom_pairs;
  std::vector<PulsePair> ref_pairs;
  double variance_scale = 1.0;
  double n_block = 0.0;
  double n_probe = 0.0;  // probe-arm photons of the first block, both colors
  double eta = 0.0;
};

PipelineContext make_context(const std::vector<sim::RawRun>& runs,
                             const sim::CampaignMeta& meta, int pulses,
                             double variance_scale) {
  PipelineContext ctx;
  ctx.variance_scale = variance_scale;
  ctx.n_block = pulses * meta.physics.photons_per_pulse;
  ctx.n_probe = 2.0 * pulses * meta.physics.probe_photons_per_color;
  ctx.eta = qnd::eta_from_photons(ctx.n_probe, meta.physics.eta_ref,
                                  meta.physics.photons_ref);
  for (const auto& run : runs) {
    PulsePair pair =
        combine_pulses(run, pulses, meta.physics.photons_per_pulse);
    (run.is_reference ? ctx.ref_pairs : ctx.atom_pairs).push_back(pair);
  }
  return ctx;
}

struct FitBundle {
  std::vector<BinStats> bins;
  QuadFit v_signal, c_signal;
  double signal_max_bin = 0.0;  // rightmost bin center
};

// The no-atom reference records pin the variance and covariance curves at
// zero atom number, the same role the empty-interferometer points play in
// the plotted noise decomposition. Without that anchor the three quadratic
// coefficients are nearly collinear over the populated range.
constexpr std::size_t kMinReferenceAnchor = 8;

FitBundle fit_bins(const PipelineContext& ctx, int n_bins) {
  FitBundle bundle;
  bundle.bins = bin_by_atom_number(ctx.atom_pairs, n_bins, ctx.variance_scale);
  bundle.signal_max_bin = bundle.bins.back().mean_signal;

  struct Site {
    double x, var1, var2, cov, dof;
  };
  std::vector<Site> sites;
  for (const auto& bin : bundle.bins)
    sites.push_back({bin.mean_signal, bin.var1, bin.var2, bin.cov12,
                     static_cast<double>(bin.count - 1)});
  if (ctx.ref_pairs.size() >= kMinReferenceAnchor) {
    std::vector<PulsePair> refs = ctx.ref_pairs;
    const auto anchor =
        bin_by_atom_number(std::move(refs), 1, ctx.variance_scale).front();
    sites.push_back({anchor.mean_signal, anchor.var1, anchor.var2,
                     anchor.cov12, static_cast<double>(anchor.count - 1)});
  }

  std::vector<double> xv, yv, wv, xc, yc, wc;
  for (const auto& site : sites) {
    xv.push_back(site.x);
    yv.push_back(site.var1);
    xv.push_back(site.x);
    yv.push_back(site.var2);
    xc.push_back(site.x);
    yc.push_back(site.cov);
  }

  double var_floor = 0.0;
  for (const auto& site : sites)
    var_floor = std::max(var_floor, std::max(site.var1, site.var2));
  var_floor *= 1e-3;
  if (!(var_floor > 0.0))
    throw DataError("fit_bins: degenerate bins with zero spread");

  // First pass with empirical weights, then reweight from the fitted
  // curves: weights carrying the sampling noise of the very estimate they
  // weigh would bias the fit low.
  auto weights_from = [&](const QuadFit* v_fit, const QuadFit* c_fit) {
    wv.clear();
    wc.clear();
    for (const auto& site : sites) {
      const double var_model =
          v_fit ? std::max((*v_fit)(site.x), var_floor)
                : 0.5 * (site.var1 + site.var2);
      const double cov_model = c_fit ? (*c_fit)(site.x) : site.cov;
      // se(var) = var sqrt(2/dof); se(cov)^2 = (var1 var2 + cov^2)/dof
      const double w_var = site.dof / (2.0 * var_model * var_model);
      wv.push_back(w_var);
      wv.push_back(w_var);
      wc.push_back(site.dof /
                   std::max(var_model * var_model + cov_model * cov_model,
                            var_floor * var_floor));
    }
  };

  weights_from(nullptr, nullptr);
  bundle.v_signal = fit_quadratic(xv, yv, wv);
  bundle.c_signal = fit_quadratic(xc, yc, wc);
  for (int pass = 0; pass < 3; ++pass) {
    weights_from(&bundle.v_signal, &bundle.c_signal);
    bundle.v_signal = fit_quadratic(xv, yv, wv);
    bundle.c_signal = fit_quadratic(xc, yc, wc);
  }
  return bundle;
}

// 10 log10((R(smax) - R(0)) / (a1 smax)); the ratio is invariant under the
// signal -> atom-number rescaling, so it can be taken in signal coordinates.
double conditional_db_of(const FitBundle& bundle) {
  const double reduced =
      conditional_reduced_curve(bundle.v_signal, bundle.c_signal,
                                bundle.signal_max_bin) -
      conditional_reduced_curve(bundle.v_signal, bundle.c_signal, 0.0);
  const double slope_term = bundle.v_signal.coeffs(1) * bundle.signal_max_bin;
  if (!(slope_term > 0.0) || !(reduced > 0.0))
    throw NumericalError("conditional reduction is not positive");
  return 10.0 * std::log10(reduced / slope_term);
}

double xi_db_of(const FitBundle& bundle, const PipelineContext& ctx,
                const sim::CampaignMeta& meta) {
  return squeezing_metric(bundle.v_signal, bundle.c_signal,
                          bundle.signal_max_bin, ctx.n_probe,
                          meta.physics.eta_ref, meta.physics.photons_ref);
}

QuadFit rescale_to_atoms(const QuadFit& fit, double k_hat) {
  // x_signal = k_hat * atoms: a_j -> a_j k_hat^j, holding k_hat fixed.
  QuadFit out = fit;
  const Eigen::Vector3d scale(1.0, k_hat, k_hat * k_hat);
  out.coeffs = fit.coeffs.cwiseProduct(scale);
  out.cov = scale.asDiagonal() * fit.cov * scale.asDiagonal();
  return out;
}

}  // namespace

AnalysisResult analyze_campaign(const std::vector<sim::RawRun>& runs,
                                const sim::CampaignMeta& meta,
                                const AnalysisOptions& options) {
  if (options.bins < 2)
    throw DataError("analyze_campaign: need at least two bins");

  AnalysisResult result;
  result.options = options;

  std::vector<sim::RawRun> working =
      options.differencing ? subtract_previous_cycle(runs) : runs;
  const double variance_scale = options.differencing ? 0.5 : 1.0;
  result.runs_analyzed = static_cast<int>(working.size());

  PipelineContext ctx =
      make_context(working, meta, options.pulses_combined, variance_scale);

  std::optional<FitBundle> bundle;
  if (!ctx.atom_pairs.empty()) {
    bundle = fit_bins(ctx, options.bins);
    result.atom_fit_valid = true;
    result.bins = bundle->bins;
    result.fit_v_signal = bundle->v_signal;
    result.fit_c_signal = bundle->c_signal;
    result.coupling_slope = bundle->v_signal.coeffs(1);
    result.coupling_slope_se = bundle->v_signal.se(1);
  } else if (ctx.ref_pairs.empty()) {
    throw DataError("analyze_campaign: campaign has no runs");
  }

  // Noise budget at this block size. The detector term comes from the
  // no-atom reference records rather than the fit.
  result.budget.v0 = result.fit_v_signal.coeffs(0);
  result.budget.c0 = result.fit_c_signal.coeffs(0);
  if (ctx.ref_pairs.size() >= 2) {
    double m1 = 0.0, m2 = 0.0;
    for (const auto& p : ctx.ref_pairs) {
      m1 += p.phi1;
      m2 += p.phi2;
    }
    m1 /= ctx.ref_pairs.size();
    m2 /= ctx.ref_pairs.size();
    double s1 = 0.0, s2 = 0.0;
    for (const auto& p : ctx.ref_pairs) {
      s1 += (p.phi1 - m1) * (p.phi1 - m1);
      s2 += (p.phi2 - m2) * (p.phi2 - m2);
    }
    const double dof = static_cast<double>(ctx.ref_pairs.size()) - 1.0;
    const double var_ref = ctx.variance_scale * 0.5 * (s1 + s2) / dof;
    result.budget.detector = var_ref - 1.0 / ctx.n_block;
    result.budget.detector_counts2 =
        result.budget.detector * options.pulses_combined *
        meta.physics.photons_per_pulse * meta.physics.photons_per_pulse;
  }
  result.budget.light_shot = result.budget.v0 -
                             std::abs(result.budget.c0) -
                             result.budget.detector;

  const double k_hat = result.coupling_slope;
  const bool calibrated =
      result.atom_fit_valid && k_hat > 0.0 && std::isfinite(k_hat);
  if (calibrated) {
    result.fit_v_atoms = rescale_to_atoms(bundle->v_signal, k_hat);
    result.fit_c_atoms = rescale_to_atoms(bundle->c_signal, k_hat);
    result.budget.projection_slope = result.fit_v_atoms->coeffs(1);
    result.budget.classical_quadratic = result.fit_v_atoms->coeffs(2);
  }

  // Reference-run control fit: binned by their (noise-only) atom signal,
  // the variance curve must have no atom-number dependence.
  if (ctx.ref_pairs.size() >= 6) {
    double lo = ctx.ref_pairs.front().atom_signal, hi = lo;
    for (const auto& p : ctx.ref_pairs) {
      lo = std::min(lo, p.atom_signal);
      hi = std::max(hi, p.atom_signal);
    }
    if (hi > lo) {
      const int ref_bins = std::min<int>(
          options.bins, static_cast<int>(ctx.ref_pairs.size()) / 2);
      try {
        FitBundle ref{};
        ref.bins = bin_by_atom_number(ctx.ref_pairs, ref_bins,
                                      ctx.variance_scale);
        std::vector<double> x, y, w;
        for (const auto& bin : ref.bins) {
          if (!(bin.se_var1 > 0.0) || !(bin.se_var2 > 0.0)) continue;
          x.push_back(bin.mean_signal);
          y.push_back(bin.var1);
          w.push_back(1.0 / (bin.se_var1 * bin.se_var1));
          x.push_back(bin.mean_signal);
          y.push_back(bin.var2);
          w.push_back(1.0 / (bin.se_var2 * bin.se_var2));
        }
        const QuadFit ref_fit = fit_quadratic(x, y, w);
        result.reference_slope = ref_fit.coeffs(1);
        result.reference_slope_se = ref_fit.se(1);
      } catch (const DataError&) {
        // too few usable reference bins; leave the control at zero
      }
    }
  }

  // Squeezing at the requested block size, with the bin-count uncertainty
  // taken over 5..30 bins.
  if (bundle) {
    try {
      SqueezingReport sq;
      sq.conditional_db = conditional_db_of(*bundle);
      sq.eta = ctx.eta;
      sq.n_probe_photons = ctx.n_probe;
      sq.xi_db = xi_db_of(*bundle, ctx, meta);
      const double zeta = bundle->c_signal(bundle->signal_max_bin) /
                          bundle->v_signal(bundle->signal_max_bin);
      sq.zeta = zeta;
      sq.kappa2 = zeta < 1.0 ? zeta / (1.0 - zeta) : 0.0;
      sq.atoms_max = calibrated ? bundle->signal_max_bin / k_hat : 0.0;

      std::vector<double> xi_samples;
      for (int k = kSweepBinsLo; k <= kSweepBinsHi; ++k) {
        try {
          xi_samples.push_back(xi_db_of(fit_bins(ctx, k), ctx, meta));
        } catch (const DataError&) {
        } catch (const NumericalError&) {
        }
      }
      if (!xi_samples.empty()) {
        sq.xi_db_bin_mean = mean_of(xi_samples);
        sq.uncertainty_db = sd_of(xi_samples);
      } else {
        sq.xi_db_bin_mean = sq.xi_db;
      }
      result.squeezing = sq;
    } catch (const NumericalError&) {
      // no resolvable atomic noise at this block size
    }
  }

  // Decoherence sweep: vary the effective probe photon number by combining
  // 1..10 consecutive pulses.
  const int max_pulses =
      result.atom_fit_valid ? std::min(kSweepMaxPulses, meta.pulses_per_run / 2)
                            : 0;
  for (int pulses = 1; pulses <= max_pulses; ++pulses) {
    const PipelineContext sweep_ctx =
        make_context(working, meta, pulses, variance_scale);

    std::vector<double> xi_samples;
    for (int k = kSweepBinsLo; k <= kSweepBinsHi; ++k) {
      try {
        xi_samples.push_back(
            xi_db_of(fit_bins(sweep_ctx, k), sweep_ctx, meta));
      } catch (const DataError&) {
      } catch (const NumericalError&) {
      }
    }
    if (xi_samples.empty()) continue;
    SweepPoint point;
    point.pulses_combined = pulses;
    point.eta = sweep_ctx.eta;
    point.sq_db_mean = mean_of(xi_samples);
    point.sq_db_sd = sd_of(xi_samples);
    result.sweep.push_back(point);
  }

  // Atom-number verification from the raw (undifferenced) detection pulse.
  if (calibrated) {
    double phi_max = 0.0;
    for (const auto& run : runs)
      if (!run.is_reference) phi_max = std::max(phi_max, run.atom_signal);
    if (phi_max > 0.0) {
      AtomNumberEstimates est;
      est.phi_max_signal = phi_max;
      est.from_slope = atom_number_from_slope(k_hat, phi_max);
      // signal -> physical radians: theta = phi * n / (2 ntilde), per pulse
      est.phi_max_rad = phi_max * meta.physics.photons_per_pulse /
                        (2.0 * meta.physics.fringe_per_pulse);
      est.from_phase = atom_number_from_phase(
          est.phi_max_rad,
          atomic::Polarizability(meta.physics.re_q_up, meta.physics.im_q_up),
          meta.physics.waist);
      result.atom_numbers = est;
    }
  }

  return result;
}

namespace {

nlohmann::json fit_to_json(const QuadFit& fit) {
  return {{"coeffs", {fit.coeffs(0), fit.coeffs(1), fit.coeffs(2)}},
          {"se", {fit.se(0), fit.se(1), fit.se(2)}},
          {"rss", fit.rss},
          {"n_points", fit.n_points}};
}

}  // namespace

nlohmann::json report_json(const AnalysisResult& result,
                           const sim::CampaignMeta& meta) {
  nlohmann::json j;
  j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  j["seed"] = meta.seed;
  j["input"] = {{"pulses_per_run", meta.pulses_per_run},
                {"detector_noise_var_config", meta.detector_noise_var},
                {"physics",
                 {{"coupling_k", meta.physics.coupling_k},
                  {"photons_per_pulse", meta.physics.photons_per_pulse},
                  {"probe_photons_per_color",
                   meta.physics.probe_photons_per_color},
                  {"eta_ref", meta.physics.eta_ref},
                  {"photons_ref", meta.physics.photons_ref},
                  {"re_q_up", meta.physics.re_q_up},
                  {"waist", meta.physics.waist}}}};
  j["options"] = {{"pulses_combined", result.options.pulses_combined},
                  {"bins", result.options.bins},
                  {"differencing", result.options.differencing}};
  j["runs_analyzed"] = result.runs_analyzed;
  if (result.atom_fit_valid) {
    j["fit_signal"] = {{"v", fit_to_json(result.fit_v_signal)},
                       {"c", fit_to_json(result.fit_c_signal)}};
  } else {
    j["fit_signal"] = nullptr;
  }
  j["coupling_slope"] = result.coupling_slope;
  j["coupling_slope_se"] = result.coupling_slope_se;
  if (result.fit_v_atoms)
    j["fit_atoms"] = {{"v", fit_to_json(*result.fit_v_atoms)},
                      {"c", fit_to_json(*result.fit_c_atoms)}};
  j["noise_budget"] = {{"v0", result.budget.v0},
                       {"c0", result.budget.c0},
                       {"detector", result.budget.detector},
                       {"detector_counts2", result.budget.detector_counts2},
                       {"light_shot", result.budget.light_shot},
                       {"projection_slope", result.budget.projection_slope},
                       {"classical_quadratic",
                        result.budget.classical_quadratic}};
  j["reference"] = {{"slope", result.reference_slope},
                    {"slope_se", result.reference_slope_se}};
  if (result.squeezing) {
    const auto& sq = *result.squeezing;
    j["squeezing"] = {{"kappa2", sq.kappa2},
                      {"zeta", sq.zeta},
                      {"conditional_db", sq.conditional_db},
                      {"eta", sq.eta},
                      {"xi_db", sq.xi_db},
                      {"xi_db_bin_mean", sq.xi_db_bin_mean},
                      {"uncertainty_db", sq.uncertainty_db},
                      {"n_probe_photons", sq.n_probe_photons},
                      {"atoms_max", sq.atoms_max}};
  } else {
    j["squeezing"] = nullptr;
  }
  nlohmann::json sweep = nlohmann::json::array();
  for (const auto& point : result.sweep)
    sweep.push_back({{"pulses_combined", point.pulses_combined},
                     {"eta", point.eta},
                     {"sq_db_mean", point.sq_db_mean},
                     {"sq_db_sd", point.sq_db_sd}});
  j["eta_sweep"] = sweep;
  if (result.atom_numbers) {
    const auto& est = *result.atom_numbers;
    j["atom_numbers"] = {{"from_slope", est.from_slope},
                         {"from_phase", est.from_phase},
                         {"phi_max_signal", est.phi_max_signal},
                         {"phi_max_rad", est.phi_max_rad}};
  } else {
    j["atom_numbers"] = nullptr;
  }
  return j;
}

void write_report_json(const AnalysisResult& result,
                       const sim::CampaignMeta& meta,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << report_json(result, meta).dump(2) << '\n';
  if (!out) throw DataError(path + ": write failed");
}

void write_plot_csv(const AnalysisResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << "atoms,mean_signal,var_phi1,var_phi2,cov,r_predicted,"
         "se_var_phi1,se_var_phi2,se_cov\n";
  const double k_hat = result.coupling_slope;
  char buf[32];
  auto put = [&](double value, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g", value);
    out << buf << sep;
  };
  for (const auto& bin : result.bins) {
    const double atoms = k_hat > 0.0 ? bin.mean_signal / k_hat : 0.0;
    double r = 0.0;
    try {
      r = conditional_reduced_curve(result.fit_v_signal, result.fit_c_signal,
                                    bin.mean_signal);
    } catch (const NumericalError&) {
    }
    put(atoms, ',');
    put(bin.mean_signal, ',');
    put(bin.var1, ',');
    put(bin.var2, ',');
    put(bin.cov12, ',');
    put(r, ',');
    put(bin.se_var1, ',');
    put(bin.se_var2, ',');
    put(bin.se_cov, '\n');
  }
  if (!out) throw DataError(path + ": write failed");
}

}  // namespace sqz::analysis
