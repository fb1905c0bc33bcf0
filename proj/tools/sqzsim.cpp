// Command-line front end: closed-form predictions, campaign simulation,
// the statistical analysis pipeline, and the decoherence sweep.
//
// Exit codes: 0 success, 2 configuration error, 3 data error,
// 4 numerical failure.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sqz/analysis.hpp"
#include "sqz/config.hpp"
#include "sqz/errors.hpp"
#include "sqz/experiment_sim.hpp"
#include "sqz/prediction.hpp"
#include "sqz/qnd_channel.hpp"
#include "sqz/version.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonOptions {
  std::string out_dir = ".";
  int threads = 1;
};

void write_json_file(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw sqz::DataError(path.string() + ": cannot open for writing");
  out << j.dump(2) << '\n';
  if (!out) throw sqz::DataError(path.string() + ": write failed");
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path path(dir);
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec && !fs::is_directory(path))
    throw sqz::DataError(dir + ": cannot create output directory");
  return path;
}

int cmd_predict(const std::string& config_path, const CommonOptions& common) {
  const auto cfg = sqz::config::load_physics_config(config_path);
  const json report = sqz::prediction_report(cfg);
  const fs::path out = prepare_out_dir(common.out_dir) / "prediction.json";
  write_json_file(report, out);
  std::cout << report.dump(2) << '\n';
  return 0;
}

int cmd_simulate(const std::string& campaign_path,
                 const std::string& physics_path,
                 std::optional<std::uint64_t> seed, std::optional<int> runs,
                 bool no_drift, const CommonOptions& common) {
  auto campaign_cfg = sqz::config::load_campaign_config(campaign_path);
  const auto physics_cfg = sqz::config::load_physics_config(physics_path);
  if (seed) campaign_cfg.seed = *seed;
  if (runs) {
    if (*runs <= 0 || *runs % 4 != 0)
      throw sqz::ConfigError("--runs must be a positive multiple of 4");
    campaign_cfg.runs = *runs;
  }
  if (no_drift) campaign_cfg.drift_step = 0.0;

  const auto physics = sqz::sim::derive_physics(physics_cfg, campaign_cfg);
  const auto campaign =
      sqz::sim::simulate_campaign(campaign_cfg, physics, common.threads);

  const fs::path out = prepare_out_dir(common.out_dir);
  sqz::sim::write_campaign_csv(campaign, (out / "campaign.csv").string());
  sqz::sim::write_sidecar_json(campaign, (out / "campaign.json").string());
  std::cout << "wrote " << campaign.runs.size() << " runs ("
            << campaign.config.runs << " interrogations, seed "
            << campaign.config.seed << ") to " << out.string() << '\n';
  return 0;
}

sqz::sim::CampaignMeta load_meta(const std::string& campaign_csv,
                                 const std::string& sidecar) {
  std::string path = sidecar;
  if (path.empty()) {
    fs::path p(campaign_csv);
    p.replace_extension(".json");
    path = p.string();
  }
  return sqz::sim::read_sidecar_json(path);
}

int cmd_analyze(const std::string& campaign_csv, const std::string& sidecar,
                int pulses, int bins, bool no_differencing,
                const CommonOptions& common) {
  const auto runs = sqz::sim::read_campaign_csv(campaign_csv);
  const auto meta = load_meta(campaign_csv, sidecar);

  sqz::analysis::AnalysisOptions options;
  options.pulses_combined = pulses;
  options.bins = bins;
  options.differencing = !no_differencing;
  const auto result = sqz::analysis::analyze_campaign(runs, meta, options);

  const fs::path out = prepare_out_dir(common.out_dir);
  sqz::analysis::write_report_json(result, meta,
                                   (out / "report.json").string());
  sqz::analysis::write_plot_csv(result, (out / "plotdata.csv").string());

  if (result.squeezing) {
    const auto& sq = *result.squeezing;
    std::cout << "conditional reduction " << sq.conditional_db
              << " dB, eta " << sq.eta << ", SQ " << sq.xi_db << " dB (bin"
              << " sweep " << sq.xi_db_bin_mean << " +- " << sq.uncertainty_db
              << " dB)\n";
  } else {
    std::cout << "no resolvable atomic noise; reference slope "
              << result.reference_slope << " +- " << result.reference_slope_se
              << '\n';
  }
  return 0;
}

int cmd_sweep(const std::string& campaign_csv, const std::string& sidecar,
              const std::string& physics_path, int bins,
              bool no_differencing, const CommonOptions& common) {
  const auto runs = sqz::sim::read_campaign_csv(campaign_csv);
  const auto meta = load_meta(campaign_csv, sidecar);
  const auto physics_cfg = sqz::config::load_physics_config(physics_path);

  sqz::analysis::AnalysisOptions options;
  options.bins = bins;
  options.differencing = !no_differencing;
  options.pulses_combined = std::min(10, meta.pulses_per_run / 2);
  const auto result = sqz::analysis::analyze_campaign(runs, meta, options);

  const fs::path out = prepare_out_dir(common.out_dir);
  const fs::path path = out / "sweep.csv";
  std::ofstream file(path);
  if (!file) throw sqz::DataError(path.string() + ": cannot open");
  file << "pulses_combined,eta,sq_db_mean,sq_db_sd,xi_theory_db\n";
  char buf[32];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    file << buf << sep;
  };
  for (const auto& point : result.sweep) {
    const double xi_theory =
        sqz::qnd::xi_vs_eta(physics_cfg.tradeoff, point.eta);
    file << point.pulses_combined << ',';
    put(point.eta, ',');
    put(point.sq_db_mean, ',');
    put(point.sq_db_sd, ',');
    put(10.0 * std::log10(xi_theory), '\n');
  }
  if (!file) throw sqz::DataError(path.string() + ": write failed");

  const auto [eta_star, xi_min] =
      sqz::qnd::find_optimal_eta(physics_cfg.tradeoff);
  std::cout << "wrote " << result.sweep.size() << " sweep points to "
            << path.string() << "; theory optimum eta " << eta_star
            << ", xi_min " << 10.0 * std::log10(xi_min) << " dB\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QND spin-squeezing simulator and analysis toolkit"};
  app.set_version_flag("--version",
                       std::string(sqz::kToolName) + " " + sqz::kToolVersion);
  app.require_subcommand(1);

  CommonOptions common;
  std::string config_path, physics_path, campaign_csv, sidecar;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs_override;
  int pulses = 10, bins = 10;
  bool no_differencing = false, no_drift = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", common.out_dir, "Output directory");
    cmd->add_option("--threads", common.threads, "Worker thread cap")
        ->check(CLI::Range(1, 256));
  };

  auto* predict = app.add_subcommand(
      "predict", "Closed-form predictions from a physics config");
  predict->add_option("--config", config_path, "Physics config path")
      ->required();
  add_common(predict);

  auto* simulate =
      app.add_subcommand("simulate", "Generate a synthetic campaign");
  simulate->add_option("--config", config_path, "Campaign config path")
      ->required();
  simulate->add_option("--physics", physics_path, "Physics config path")
      ->required();
  simulate->add_option("--seed", seed, "Seed override (64-bit)");
  simulate->add_option("--runs", runs_override, "Interrogation-run override");
  simulate->add_flag("--no-drift", no_drift, "Disable the cycle drift walk");
  add_common(simulate);

  auto* analyze =
      app.add_subcommand("analyze", "Run the noise-budget/squeezing pipeline");
  analyze->add_option("--campaign", campaign_csv, "Campaign CSV path")
      ->required();
  analyze->add_option("--sidecar", sidecar,
                      "Sidecar JSON path (default: CSV with .json)");
  analyze->add_option("--pulses-combined", pulses,
                      "Pulses per combined measurement")
      ->check(CLI::Range(1, 10));
  analyze->add_option("--bins", bins, "Atom-number bins")
      ->check(CLI::Range(5, 30));
  analyze->add_flag("--no-differencing", no_differencing,
                    "Skip previous-cycle subtraction");
  add_common(analyze);

  auto* sweep = app.add_subcommand(
      "sweep", "Squeezing vs decoherence, empirical and theoretical");
  sweep->add_option("--campaign", campaign_csv, "Campaign CSV path")
      ->required();
  sweep->add_option("--sidecar", sidecar, "Sidecar JSON path");
  sweep->add_option("--config", config_path, "Physics config path")
      ->required();
  sweep->add_option("--bins", bins, "Atom-number bins")
      ->check(CLI::Range(5, 30));
  sweep->add_flag("--no-differencing", no_differencing,
                  "Skip previous-cycle subtraction");
  add_common(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (predict->parsed()) return cmd_predict(config_path, common);
    if (simulate->parsed())
      return cmd_simulate(config_path, physics_path, seed, runs_override,
                          no_drift, common);
    if (analyze->parsed())
      return cmd_analyze(campaign_csv, sidecar, pulses, bins, no_differencing,
                         common);
    if (sweep->parsed())
      return cmd_sweep(campaign_csv, sidecar, config_path, bins,
                       no_differencing, common);
  } catch (const sqz::ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return 2;
  } catch (const sqz::DataError& err) {
    std::cerr << "data error: " << err.what() << '\n';
    return 3;
  } catch (const sqz::NumericalError& err) {
    std::cerr << "numerical error: " << err.what() << '\n';
    return 4;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 4;
  }
  return 0;
}
