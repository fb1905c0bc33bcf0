#include "sqz/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sqz/errors.hpp"

namespace sqz::config {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& text, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE)
    throw ConfigError(where + ": expected a number, got '" + text + "'");
  return value;
}

std::uint64_t parse_u64(const std::string& text, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE)
    throw ConfigError(where + ": expected an unsigned integer, got '" + text +
                      "'");
  return static_cast<std::uint64_t>(value);
}

}  // namespace

KeyValueFile KeyValueFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str(), path);
}

KeyValueFile KeyValueFile::parse_string(const std::string& text,
                                        const std::string& name) {
  KeyValueFile file;
  file.name_ = name;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(name + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(name + ":" + std::to_string(line_no) + ": empty key");
    if (value.empty())
      throw ConfigError(name + ":" + std::to_string(line_no) +
                        ": empty value for '" + key + "'");
    file.entries_[key].push_back({value, line_no});
  }
  return file;
}

bool KeyValueFile::has(const std::string& key) const {
  return entries_.count(key) != 0;
}

const KeyValueFile::Entry& KeyValueFile::single(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end())
    throw ConfigError(name_ + ": missing required key '" + key + "'");
  if (it->second.size() != 1)
    throw ConfigError(location(key) + ": key '" + key +
                      "' given more than once");
  return it->second.front();
}

std::string KeyValueFile::location(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return name_;
  return name_ + ":" + std::to_string(it->second.front().line);
}

double KeyValueFile::get_double(const std::string& key) const {
  return parse_double(single(key).value, location(key) + " (" + key + ")");
}

double KeyValueFile::get_double_or(const std::string& key,
                                   double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::uint64_t KeyValueFile::get_u64(const std::string& key) const {
  return parse_u64(single(key).value, location(key) + " (" + key + ")");
}

std::uint64_t KeyValueFile::get_u64_or(const std::string& key,
                                       std::uint64_t fallback) const {
  return has(key) ? get_u64(key) : fallback;
}

std::string KeyValueFile::get_string(const std::string& key) const {
  return single(key).value;
}

std::string KeyValueFile::get_string_or(const std::string& key,
                                        const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

std::vector<std::string> KeyValueFile::get_all(const std::string& key) const {
  std::vector<std::string> values;
  const auto it = entries_.find(key);
  if (it != entries_.end())
    for (const auto& entry : it->second) values.push_back(entry.value);
  return values;
}

namespace {

void check_units(const KeyValueFile& file) {
  if (file.get_string("units.frequency") != "MHz")
    throw ConfigError(file.location("units.frequency") +
                      ": only MHz frequencies are supported");
  if (file.get_string("units.length") != "m")
    throw ConfigError(file.location("units.length") +
                      ": only meter lengths are supported");
}

atomic::ProbeColor load_probe(const KeyValueFile& file,
                              const std::string& prefix) {
  atomic::ProbeColor color;
  color.wavelength = file.get_double(prefix + ".wavelength");
  color.gamma = file.get_double(prefix + ".gamma");
  color.photons_probe = file.get_double(prefix + ".photons_probe");
  color.photons_reference = file.get_double(prefix + ".photons_reference");
  const auto lines = file.get_all(prefix + ".line");
  if (lines.empty())
    throw ConfigError(file.name() + ": '" + prefix +
                      ".line' requires at least one entry");
  for (const auto& text : lines) {
    std::istringstream in(text);
    atomic::TransitionLine line;
    if (!(in >> line.cg_weight >> line.detuning))
      throw ConfigError(file.name() + ": '" + prefix + ".line = " + text +
                        "' must be '<weight> <detuning>'");
    std::string rest;
    if (in >> rest)
      throw ConfigError(file.name() + ": '" + prefix + ".line = " + text +
                        "' has trailing content");
    color.lines.push_back(line);
  }
  try {
    atomic::validate(color);
  } catch (const std::invalid_argument& err) {
    throw ConfigError(file.name() + ": " + prefix + ": " + err.what());
  }
  return color;
}

}  // namespace

PhysicsConfig load_physics_config(const std::string& path) {
  const KeyValueFile file = KeyValueFile::parse_file(path);
  check_units(file);

  PhysicsConfig cfg;
  cfg.probe_up = load_probe(file, "probe_up");
  cfg.probe_down = load_probe(file, "probe_down");
  cfg.geometry.waist = file.get_double("geometry.waist");
  cfg.geometry.detection_efficiency =
      file.get_double("geometry.detection_efficiency");
  cfg.geometry.interaction_length =
      file.get_double_or("geometry.interaction_length", 0.0);
  try {
    atomic::validate(cfg.geometry);
  } catch (const std::invalid_argument& err) {
    throw ConfigError(file.name() + ": geometry: " + err.what());
  }
  cfg.eta_ref = file.get_double("decoherence.eta_ref");
  cfg.photons_ref = file.get_double("decoherence.photons_ref");
  if (cfg.eta_ref < 0.0 || cfg.eta_ref >= 1.0)
    throw ConfigError(file.location("decoherence.eta_ref") +
                      ": eta_ref must be in [0, 1)");
  if (!(cfg.photons_ref > 0.0))
    throw ConfigError(file.location("decoherence.photons_ref") +
                      ": photons_ref must be positive");
  cfg.tradeoff.optical_depth = file.get_double("tradeoff.optical_depth");
  cfg.tradeoff.kappa2_per_eta =
      file.get_double_or("tradeoff.kappa2_per_eta", 1.0);
  cfg.prediction_atom_count =
      file.get_double_or("prediction.atom_count", 1.2e5);
  cfg.prediction_pulses_combined = static_cast<int>(
      file.get_u64_or("prediction.pulses_combined", 1));
  if (file.has("prediction.coupling_override"))
    cfg.coupling_override = file.get_double("prediction.coupling_override");
  return cfg;
}

CampaignConfig load_campaign_config(const std::string& path) {
  const KeyValueFile file = KeyValueFile::parse_file(path);

  CampaignConfig cfg;
  cfg.runs = static_cast<int>(file.get_u64("campaign.runs"));
  cfg.pulses_per_run =
      static_cast<int>(file.get_u64_or("campaign.pulses_per_run", 20));
  cfg.pulse_interval = file.get_double_or("campaign.pulse_interval", 20e-6);
  cfg.pulse_duration = file.get_double_or("campaign.pulse_duration", 10e-6);
  cfg.atom_number_max = file.get_double("campaign.atom_number_max");
  cfg.atom_min_fraction =
      file.get_double_or("campaign.atom_number_min_fraction", 0.1);
  const std::string model = file.get_string_or("campaign.atom_model", "walk");
  if (model == "walk")
    cfg.atom_model = AtomModel::walk;
  else if (model == "uniform")
    cfg.atom_model = AtomModel::uniform;
  else if (model == "fixed")
    cfg.atom_model = AtomModel::fixed;
  else
    throw ConfigError(file.location("campaign.atom_model") +
                      ": atom_model must be walk, uniform, or fixed");
  cfg.atom_walk_step_fraction =
      file.get_double_or("campaign.atom_walk_step_fraction", 0.06);
  cfg.atom_jitter_fraction =
      file.get_double_or("campaign.atom_jitter_fraction", 0.01);
  cfg.detector_noise_var =
      file.get_double_or("campaign.detector_noise_var", 0.0);
  cfg.classical_noise_coeff =
      file.get_double_or("campaign.classical_noise_coeff", 0.0);
  cfg.drift_step = file.get_double_or("campaign.drift_step", 0.0);
  cfg.atom_signal_noise_sd =
      file.get_double_or("campaign.atom_signal_noise_sd", 0.0);
  cfg.partition_noise_fraction =
      file.get_double_or("campaign.partition_noise_fraction", 0.0);
  cfg.stark_inflation_var =
      file.get_double_or("campaign.stark_inflation_var", 0.0);
  cfg.seed = file.get_u64_or("campaign.seed", 1);
  if (file.has("campaign.coupling_override"))
    cfg.coupling_override = file.get_double("campaign.coupling_override");

  if (cfg.runs <= 0 || cfg.runs % 4 != 0)
    throw ConfigError(file.location("campaign.runs") +
                      ": runs must be a positive multiple of 4 (four"
                      " interrogations per MOT cycle)");
  if (cfg.pulses_per_run <= 0 || cfg.pulses_per_run % 2 != 0)
    throw ConfigError(file.location("campaign.pulses_per_run") +
                      ": pulses_per_run must be positive and even");
  if (!(cfg.atom_number_max > 0.0))
    throw ConfigError(file.location("campaign.atom_number_max") +
                      ": atom_number_max must be positive");
  if (cfg.atom_min_fraction < 0.0 || cfg.atom_min_fraction > 1.0)
    throw ConfigError(file.name() +
                      ": atom_number_min_fraction must be in [0, 1]");
  if (cfg.detector_noise_var < 0.0 || cfg.drift_step < 0.0 ||
      cfg.classical_noise_coeff < 0.0 || cfg.atom_signal_noise_sd < 0.0 ||
      cfg.partition_noise_fraction < 0.0 || cfg.stark_inflation_var < 0.0)
    throw ConfigError(file.name() + ": noise parameters must be >= 0");
  return cfg;
}

}  // namespace sqz::config
