#include "cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "spinmarket/format.hpp"

namespace spinmarket::cli {

namespace {

using VT = ValueType;

const std::vector<KeySpec> kKeys = {
    {"n", VT::Integer, "32", "", true, "lattice side length (>= 3)"},
    {"rounds", VT::Integer, "100000", "", true, "analyzed rounds"},
    {"thermalization", VT::Integer, "5000", "", true, "rounds discarded before analysis"},
    {"seed", VT::Unsigned, "", "", true, "64-bit master seed (required)"},
    {"mode", VT::Choice, "reinterpreted", "reinterpreted|sh_baseline", true, "price formation"},
    {"coupling", VT::Real, "1", "", true, "neighbor coupling J > 0"},
    {"lambda", VT::Real, "", "", true, "threshold scale; 1 when alpha_lambda is absent"},
    {"alpha_lambda", VT::Real, "", "", true, "lambda / 4J, alternative to lambda"},
    {"noise", VT::Choice, "wm", "wm|gaussian", true, "noise law"},
    {"wm_K", VT::Real, "5", "", true, "WM weight base K > 1"},
    {"wm_b", VT::Real, "2", "", true, "WM magnitude base b > 1"},
    {"wm_b0", VT::Real, "0.21", "", true, "WM base magnitude b0 > 0"},
    {"sigma", VT::Real, "", "", true, "Gaussian noise strength"},
    {"alpha_sigma", VT::Real, "", "", true, "sigma / 4J; for wm rescales b0"},
    {"reset", VT::Bool, "true", "", true, "reset to a random state on trapping"},
    {"rethermalization", VT::Integer, "0", "", true, "rounds discarded after each reset"},
    {"taus", VT::IntegerList, "1,4,16,64,256", "", false, "return lags"},
    {"max_lag", VT::Integer, "100", "", false, "autocorrelation/variogram lags"},
    {"histogram_bins", VT::Integer, "101", "", false, "histogram bin count"},
    {"tail_xmin", VT::Real, "2", "", false, "tail threshold in rescaled std units"},
    {"min_tail_samples", VT::Integer, "100", "", false, "minimum tail samples for a fit"},
    {"output", VT::Text, "out", "", false, "output directory"},
};

const KeySpec* find_key(std::string_view name) {
  for (const auto& k : kKeys) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

template <class Int>
Int parse_int(const std::string& text) {
  Int value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument("expected an integer, got '" + text + "'");
  }
  return value;
}

std::string normalize(const KeySpec& spec, const std::string& raw) {
  const std::string text = trim(raw);
  if (text.empty()) throw std::invalid_argument("empty value");
  switch (spec.type) {
    case VT::Integer:
      return std::to_string(parse_int<std::int64_t>(text));
    case VT::Unsigned:
      return std::to_string(parse_int<std::uint64_t>(text));
    case VT::Real: {
      const double v = parse_real(text);
      if (!std::isfinite(v)) throw std::invalid_argument("expected a finite number");
      return format_real(v);
    }
    case VT::Bool: {
      std::string lower = text;
      std::transform(lower.begin(), lower.end(), lower.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      if (lower == "true" || lower == "yes" || lower == "on" || lower == "1") return "true";
      if (lower == "false" || lower == "no" || lower == "off" || lower == "0") return "false";
      throw std::invalid_argument("expected true or false, got '" + text + "'");
    }
    case VT::Text:
      return text;
    case VT::Choice: {
      for (const auto& c : split(std::string(spec.choices), '|')) {
        if (c == text) return text;
      }
      throw std::invalid_argument("expected one of " + std::string(spec.choices) + ", got '" +
                                  text + "'");
    }
    case VT::IntegerList: {
      std::string out;
      for (const auto& item : split(text, ',')) {
        if (!out.empty()) out += ',';
        out += std::to_string(parse_int<std::int64_t>(item));
      }
      return out;
    }
  }
  return text;
}

// Setting the first key (e.g. from a grid axis) removes the second.
const std::vector<std::pair<std::string_view, std::string_view>> kDisplaces = {
    {"alpha_lambda", "lambda"}, {"lambda", "alpha_lambda"}, {"alpha_sigma", "sigma"},
    {"sigma", "alpha_sigma"},   {"alpha_sigma", "wm_b0"},   {"wm_b0", "alpha_sigma"},
};

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double real_of(const ExperimentConfig& c, std::string_view key) {
  return parse_real(*c.get(key));
}

std::int64_t int_of(const ExperimentConfig& c, std::string_view key) {
  return parse_int<std::int64_t>(*c.get(key));
}

std::string canonical_without(const ExperimentConfig& config, std::string_view skip) {
  std::string out;
  for (const auto& spec : kKeys) {
    if (spec.name == skip) continue;
    const auto it = config.values.find(std::string(spec.name));
    if (it == config.values.end()) continue;
    out += std::string(spec.name) + " = " + it->second + "\n";
  }
  if (!config.grid.empty()) {
    out += "[grid]\n";
    for (const auto& axis : config.grid) {
      out += axis.key + " = ";
      for (std::size_t i = 0; i < axis.values.size(); ++i) {
        if (i) out += ", ";
        out += axis.values[i];
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace

const std::vector<KeySpec>& key_specs() { return kKeys; }

std::optional<std::string> ExperimentConfig::get(std::string_view key) const {
  const auto it = values.find(std::string(key));
  if (it != values.end()) return it->second;
  const auto* spec = find_key(key);
  if (spec && !spec->default_value.empty()) return normalize(*spec, std::string(spec->default_value));
  return std::nullopt;
}

void ExperimentConfig::set(const std::string& key, const std::string& raw, const std::string& where) {
  const auto* spec = find_key(key);
  if (!spec) throw ConfigError(where + ": unknown key '" + key + "'");
  try {
    values[key] = normalize(*spec, raw);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": key '" + key + "': " + e.what());
  }
}

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  ExperimentConfig config;
  std::string line;
  std::size_t line_no = 0;
  bool in_grid = false;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto hash = line.find('#');
    const std::string text = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text == "[grid]") {
        if (in_grid) throw ConfigError(where + ": duplicate [grid] section");
        in_grid = true;
        continue;
      }
      throw ConfigError(where + ": unknown section '" + text + "'");
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    const auto* spec = find_key(key);
    if (!spec) throw ConfigError(where + ": unknown key '" + key + "'");
    const std::string slot = (in_grid ? "grid." : "") + key;
    if (!seen.insert(slot).second) throw ConfigError(where + ": duplicate key '" + key + "'");

    if (!in_grid) {
      config.set(key, value, where);
      continue;
    }
    if (!spec->sweepable) throw ConfigError(where + ": key '" + key + "' cannot be swept");
    GridAxis axis{key, {}};
    for (const auto& item : split(value, ',')) {
      try {
        axis.values.push_back(normalize(*spec, item));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": grid key '" + key + "': " + e.what());
      }
    }
    config.grid.push_back(std::move(axis));
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  return parse_config(in, path);
}

std::string canonical_text(const ExperimentConfig& config) { return canonical_without(config, ""); }

std::string config_hash(const ExperimentConfig& config) {
  char buf[17];
  const auto h = fnv1a(canonical_without(config, "output"));
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

AnalysisOptions resolve_analysis(const ExperimentConfig& config) {
  AnalysisOptions a;
  a.taus.clear();
  for (const auto& item : split(*config.get("taus"), ',')) {
    const auto tau = parse_int<std::int64_t>(item);
    if (tau < 1) throw ConfigError("config: taus must be >= 1");
    a.taus.push_back(static_cast<int>(tau));
  }
  a.max_lag = static_cast<int>(int_of(config, "max_lag"));
  a.histogram_bins = static_cast<int>(int_of(config, "histogram_bins"));
  a.tail_xmin_multiple = real_of(config, "tail_xmin");
  a.min_tail_samples =
      static_cast<std::size_t>(std::max<std::int64_t>(2, int_of(config, "min_tail_samples")));
  if (a.max_lag < 1) throw ConfigError("config: max_lag must be >= 1");
  if (a.histogram_bins < 1) throw ConfigError("config: histogram_bins must be >= 1");
  if (!(a.tail_xmin_multiple > 0.0)) throw ConfigError("config: tail_xmin must be > 0");
  return a;
}

ResolvedConfig resolve(const ExperimentConfig& config) {
  if (!config.has("seed")) throw ConfigError("config: missing required key 'seed'");

  ResolvedConfig out;
  auto& run = out.run;
  run.n = static_cast<int>(int_of(config, "n"));
  run.rounds = int_of(config, "rounds");
  run.thermalization = int_of(config, "thermalization");
  run.seed = parse_int<std::uint64_t>(*config.get("seed"));
  run.mode = parse_price_mode(*config.get("mode"));
  run.reset.enabled = *config.get("reset") == "true";
  run.reset.rethermalization = int_of(config, "rethermalization");

  const double coupling = real_of(config, "coupling");
  if (config.has("lambda") && config.has("alpha_lambda")) {
    throw ConfigError("config: set either 'lambda' or 'alpha_lambda', not both");
  }
  const double lambda = config.has("alpha_lambda") ? 4.0 * coupling * real_of(config, "alpha_lambda")
                        : config.has("lambda")     ? real_of(config, "lambda")
                                                   : 1.0;

  const bool gaussian = *config.get("noise") == "gaussian";
  try {
    if (gaussian) {
      for (const char* key : {"wm_K", "wm_b", "wm_b0"}) {
        if (config.has(key)) {
          throw ConfigError(std::string("config: '") + key + "' requires noise = wm");
        }
      }
      if (config.has("sigma") == config.has("alpha_sigma")) {
        throw ConfigError("config: gaussian noise needs exactly one of 'sigma' or 'alpha_sigma'");
      }
      const double sigma = config.has("sigma") ? real_of(config, "sigma")
                                               : 4.0 * coupling * real_of(config, "alpha_sigma");
      run.model = ModelParams{coupling, lambda, GaussianNoise{sigma}};
    } else {
      if (config.has("sigma")) throw ConfigError("config: 'sigma' requires noise = gaussian");
      if (config.has("alpha_sigma") && config.has("wm_b0")) {
        throw ConfigError("config: set either 'wm_b0' or 'alpha_sigma' for wm noise, not both");
      }
      const WMNoiseParams shape(real_of(config, "wm_K"), real_of(config, "wm_b"),
                                real_of(config, "wm_b0"));
      if (config.has("alpha_sigma")) {
        run.model = ModelParams::from_alphas(coupling, lambda / (4.0 * coupling),
                                             real_of(config, "alpha_sigma"), shape);
        run.model.lambda = lambda;
      } else {
        run.model = ModelParams{coupling, lambda, shape};
      }
    }
    run.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  out.analysis = resolve_analysis(config);
  out.output = *config.get("output");
  return out;
}

std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& config) {
  ExperimentConfig base = config;
  base.grid.clear();
  std::vector<ExperimentConfig> cells;
  std::set<std::string> hashes;
  std::vector<std::size_t> index(config.grid.size(), 0);
  for (const auto& axis : config.grid) {
    if (axis.values.empty()) return cells;
  }
  while (true) {
    ExperimentConfig cell = base;
    for (std::size_t k = 0; k < config.grid.size(); ++k) {
      const auto& key = config.grid[k].key;
      for (const auto& [setter, displaced] : kDisplaces) {
        if (setter == key) cell.values.erase(std::string(displaced));
      }
      cell.values[key] = config.grid[k].values[index[k]];
    }
    if (hashes.insert(config_hash(cell)).second) cells.push_back(std::move(cell));
    // Odometer with the last axis fastest.
    std::size_t k = config.grid.size();
    while (k > 0) {
      --k;
      if (++index[k] < config.grid[k].values.size()) break;
      index[k] = 0;
      if (k == 0) return cells;
    }
    if (config.grid.empty()) return cells;
  }
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "': expected key=value");
  }
  config.set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1), "override");
}

}  // namespace spinmarket::cli
