#include "cli/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cli/config.hpp"
#include "spinmarket/engine.hpp"
#include "spinmarket/format.hpp"
#include "spinmarket/noise.hpp"
#include "spinmarket/stats.hpp"

namespace spinmarket::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

fs::path resolve_output(const std::string& dir) {
  fs::path path(dir);
  if (path.is_relative()) {
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) return fs::path(root) / path;
  }
  return path;
}

void prepare_output(const fs::path& dir, bool force) {
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) throw OutputError(dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir, ec) && !force) {
      throw OutputError("output directory " + dir.string() + " already exists (use --force)");
    }
  }
  fs::create_directories(dir, ec);
  if (ec) throw OutputError("cannot create " + dir.string() + ": " + ec.message());
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot write " + path.string());
  body(out);
  if (!out) throw OutputError("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& doc) {
  write_file(path, [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
}

std::string provenance(std::uint64_t seed, const std::string& hash) {
  return "seed=" + std::to_string(seed) + " config_hash=" + hash;
}

json real_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json tail_json(int tau, const TailFit& fit) {
  return {{"tau", tau},
          {"exponent", fit.exponent},
          {"stderr", fit.std_error},
          {"x_min", fit.x_min},
          {"x_max", fit.x_max},
          {"n_tail", fit.n_tail},
          {"method", fit.method},
          {"regression_exponent", real_or_null(fit.regression_exponent)},
          {"regression_points", fit.regression_points}};
}

json noise_json(const NoiseSpec& noise) {
  if (const auto* g = std::get_if<GaussianNoise>(&noise)) {
    return {{"kind", "gaussian"}, {"sigma", g->sigma}};
  }
  const auto& wm = std::get<WMNoiseParams>(noise);
  json j = {{"kind", "wm"}, {"K", wm.K()}, {"b", wm.b()}, {"b0", wm.b0()}, {"beta", wm.beta()}};
  if (wm.has_finite_variance()) {
    j["variance"] = wm.variance();
    j["sigma"] = std::sqrt(wm.variance());
  } else {
    j["variance"] = "infinite";
  }
  return j;
}

json resolved_json(const ResolvedConfig& rc) {
  const auto& run = rc.run;
  json j = {{"n", run.n},
            {"rounds", run.rounds},
            {"thermalization", run.thermalization},
            {"seed", run.seed},
            {"mode", to_string(run.mode)},
            {"coupling", run.model.coupling},
            {"lambda", run.model.lambda},
            {"alpha_lambda", run.model.alpha_lambda()},
            {"noise", noise_json(run.model.noise)},
            {"reset", run.reset.enabled},
            {"rethermalization", run.reset.rethermalization}};
  try {
    j["alpha_sigma"] = run.model.alpha_sigma();
  } catch (const std::domain_error&) {
    j["alpha_sigma"] = "infinite";
  }
  j["analysis"] = {{"taus", rc.analysis.taus},
                   {"max_lag", rc.analysis.max_lag},
                   {"histogram_bins", rc.analysis.histogram_bins},
                   {"tail_xmin", rc.analysis.tail_xmin_multiple},
                   {"min_tail_samples", rc.analysis.min_tail_samples}};
  return j;
}

json summary_json(const RunSummary& s) {
  json per_tau = json::array();
  for (const auto& t : s.per_tau) {
    per_tau.push_back({{"tau", t.tau},
                       {"n_returns", t.n_returns},
                       {"tail_exponent", real_or_null(t.tail_exponent)},
                       {"tail_stderr", real_or_null(t.tail_std_error)},
                       {"excess_kurtosis", real_or_null(t.excess_kurtosis)}});
  }
  return {{"resets", s.resets},
          {"segments", s.segments},
          {"traps", s.traps},
          {"per_tau", per_tau},
          {"vol_volume_correlation", real_or_null(s.vol_volume_correlation)},
          {"diagnostics",
           {{"ed_identity_violations", s.diagnostics.ed_identity_violations},
            {"crafty_violations", s.diagnostics.crafty_violations},
            {"discarded_resets", s.diagnostics.discarded_resets}}}};
}

/// Histograms, tail fits and lag statistics for one analysis.
std::vector<std::string> write_analysis(const fs::path& dir, const SeriesAnalysis& analysis,
                                        const std::string& prov) {
  std::vector<std::string> files;
  json fits = json::array();
  for (const auto& ta : analysis.per_tau) {
    if (ta.histogram) {
      const auto name = "hist_tau" + std::to_string(ta.tau) + ".csv";
      write_file(dir / name, [&](std::ostream& out) { write_histogram_csv(out, *ta.histogram, prov); });
      files.push_back(name);
    }
    if (ta.tail) fits.push_back(tail_json(ta.tau, *ta.tail));
  }
  write_json(dir / "tail_fits.json", fits);
  files.emplace_back("tail_fits.json");
  const std::pair<const char*, const std::vector<double>*> lag_files[] = {
      {"acf_returns.csv", &analysis.return_acf},
      {"acf_abs_returns.csv", &analysis.abs_return_acf},
      {"variogram.csv", &analysis.variogram},
  };
  for (const auto& [name, values] : lag_files) {
    if (values->empty()) continue;
    write_file(dir / name, [&](std::ostream& out) { write_lag_csv(out, *values, prov); });
    files.emplace_back(name);
  }
  return files;
}

std::string format_exponent(double v) {
  if (!std::isfinite(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

struct RunOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> rounds;
  std::optional<std::string> output;
  bool force = false;
};

ExperimentConfig load_with_overrides(const RunOptions& opts) {
  auto config = load_config(opts.config_path);
  for (const auto& o : opts.overrides) apply_override(config, o);
  if (opts.seed) config.set("seed", std::to_string(*opts.seed), "--seed");
  if (opts.rounds) config.set("rounds", std::to_string(*opts.rounds), "--rounds");
  if (opts.output) config.set("output", *opts.output, "--output");
  return config;
}

json manifest_json(const ExperimentConfig& config, const ResolvedConfig& rc, const RunResult& result,
                   const SeriesAnalysis& analysis, const std::vector<std::string>& files) {
  ExperimentConfig recorded = config;
  recorded.values.erase("output");
  json explicit_values = json::object();
  for (const auto& [k, v] : recorded.values) explicit_values[k] = v;
  return {{"config_hash", config_hash(config)},
          {"seed", rc.run.seed},
          {"config", explicit_values},
          {"config_text", canonical_text(recorded)},
          {"resolved", resolved_json(rc)},
          {"summary", summary_json(summarize(result, analysis))},
          {"reset_times", result.reset_times},
          {"segment_rounds", result.segment_rounds},
          {"warnings", analysis.warnings},
          {"files", files}};
}

void write_run_artifacts(const fs::path& dir, const ExperimentConfig& config,
                         const ResolvedConfig& rc, const RunResult& result,
                         const SeriesAnalysis& analysis) {
  const auto prov = provenance(rc.run.seed, config_hash(config));
  write_file(dir / "series.csv", [&](std::ostream& out) {
    write_series_csv(out, result.series, prov + " n_agents=" + std::to_string(result.series.n_agents));
  });
  auto files = write_analysis(dir, analysis, prov);
  files.insert(files.begin(), "series.csv");
  files.emplace_back("manifest.json");
  write_json(dir / "manifest.json", manifest_json(config, rc, result, analysis, files));
}

int cmd_run(const RunOptions& opts, std::ostream& out) {
  const auto config = load_with_overrides(opts);
  if (!config.grid.empty()) throw ConfigError(opts.config_path + ": [grid] is only valid for sweep");
  const auto rc = resolve(config);
  const auto dir = resolve_output(rc.output);
  prepare_output(dir, opts.force);

  const auto result = run_simulation(rc.run);
  const auto analysis = analyze_series(result.series, rc.analysis);
  write_run_artifacts(dir, config, rc, result, analysis);

  out << "run " << config_hash(config) << ": " << rc.run.rounds << " rounds, "
      << result.reset_times.size() << " resets, tail exponents";
  for (const auto& ta : analysis.per_tau) {
    out << " tau=" << ta.tau << ":" << format_exponent(ta.tail ? ta.tail->exponent : NAN);
  }
  out << '\n';
  return kOk;
}

std::string csv_safe(std::string text) {
  for (auto& c : text) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return text;
}

int cmd_sweep(const RunOptions& opts, int parallelism, bool cell_artifacts, std::ostream& out,
              std::ostream& err) {
  const auto config = load_with_overrides(opts);
  if (!config.has("seed")) throw ConfigError("config: missing required key 'seed'");
  const auto analysis_options = resolve_analysis(config);
  const auto base_seed = std::stoull(*config.get("seed"));
  const auto dir = resolve_output(*config.get("output"));
  prepare_output(dir, opts.force);

  const auto cells = expand_grid(config);
  std::vector<std::optional<ResolvedConfig>> resolved(cells.size());
  std::vector<std::string> errors(cells.size());
  std::vector<RunConfig> runnable;
  std::vector<std::size_t> runnable_cell;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    try {
      resolved[i] = resolve(cells[i]);
      runnable.push_back(resolved[i]->run);
      runnable_cell.push_back(i);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }

  std::vector<SweepEntry> entries;
  if (!runnable.empty()) {
    SweepCallback callback;
    if (cell_artifacts) {
      callback = [&](std::size_t k, const RunResult& result, const SeriesAnalysis& analysis) {
        const auto i = runnable_cell[k];
        const auto cell_dir = dir / ("cell_" + std::to_string(i) + "_" + config_hash(cells[i]));
        fs::create_directories(cell_dir);
        write_run_artifacts(cell_dir, cells[i], *resolved[i], result, analysis);
      };
    }
    entries = run_sweep(runnable, analysis_options, parallelism, callback);
  }
  std::vector<const SweepEntry*> entry_of(cells.size(), nullptr);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    entry_of[runnable_cell[k]] = &entries[k];
    if (!entries[k].error.empty()) errors[runnable_cell[k]] = entries[k].error;
  }

  std::size_t failures = 0;
  write_file(dir / "sweep.csv", [&](std::ostream& csv) {
    csv << "# " << provenance(base_seed, config_hash(config)) << '\n';
    csv << "cell,config_hash,seed,noise,coupling,lambda,alpha_lambda,sigma,alpha_sigma,"
           "resets,segments,traps,vol_volume_correlation";
    for (int tau : analysis_options.taus) {
      csv << ",tail_tau" << tau << ",tail_se_tau" << tau << ",kurtosis_tau" << tau;
    }
    csv << ",status,error\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
      csv << i << ',' << config_hash(cells[i]) << ',';
      if (resolved[i]) {
        const auto& m = resolved[i]->run.model;
        double sigma = NAN;
        try {
          sigma = effective_sigma(m.noise);
        } catch (const std::domain_error&) {
          sigma = INFINITY;
        }
        csv << resolved[i]->run.seed << ','
            << (std::holds_alternative<GaussianNoise>(m.noise) ? "gaussian" : "wm") << ','
            << format_real(m.coupling) << ',' << format_real(m.lambda) << ','
            << format_real(m.alpha_lambda()) << ',' << format_real(sigma) << ','
            << format_real(sigma / (4.0 * m.coupling));
      } else {
        csv << ",,,,,,";
      }
      const auto* entry = entry_of[i];
      if (entry && entry->summary) {
        const auto& s = *entry->summary;
        csv << ',' << s.resets << ',' << s.segments << ',' << s.traps << ','
            << format_real(s.vol_volume_correlation);
        for (const auto& t : s.per_tau) {
          csv << ',' << format_real(t.tail_exponent) << ',' << format_real(t.tail_std_error) << ','
              << format_real(t.excess_kurtosis);
        }
        csv << ",ok,\n";
      } else {
        ++failures;
        csv << ",,,,";
        for (std::size_t k = 0; k < analysis_options.taus.size(); ++k) csv << ",,,";
        csv << ",failed," << csv_safe(errors[i]) << '\n';
      }
    }
  });

  out << "sweep " << config_hash(config) << ": " << cells.size() << " cells, " << failures
      << " failed\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!errors[i].empty()) err << "cell " << i << ": " << errors[i] << '\n';
  }
  return failures ? kRuntimeError : kOk;
}

struct NoiseOptions {
  double K = 5.0;
  double b = 2.0;
  double b0 = 0.21;
  std::int64_t count = 1000000;
  std::uint64_t seed = 0;
  std::string output;
  bool force = false;
};

int cmd_sample_noise(const NoiseOptions& opts, std::ostream& out) {
  std::optional<WMNoiseParams> params;
  try {
    params.emplace(opts.K, opts.b, opts.b0);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("sample-noise: ") + e.what());
  }
  if (opts.count < 0) throw ConfigError("sample-noise: count must be >= 0");
  const auto dir = resolve_output(opts.output);
  prepare_output(dir, opts.force);

  Rng rng(derive_seed(opts.seed, 0));
  const WmSampler sampler(*params);
  std::vector<double> samples(static_cast<std::size_t>(opts.count));
  for (auto& x : samples) x = sampler(rng);

  std::ostringstream tag;
  tag << "seed=" << opts.seed << " K=" << format_real(opts.K) << " b=" << format_real(opts.b)
      << " b0=" << format_real(opts.b0) << " count=" << opts.count;
  write_file(dir / "samples.csv", [&](std::ostream& csv) {
    csv << "# " << tag.str() << "\nvalue\n";
    for (double x : samples) csv << format_real(x) << '\n';
  });

  json summary = {{"K", opts.K},         {"b", opts.b},
                  {"b0", opts.b0},       {"count", opts.count},
                  {"seed", opts.seed},   {"beta", params->beta()},
                  {"tail_exponent_theory", 1.0 + params->beta()}};
  if (params->has_finite_variance()) {
    summary["variance"] = params->variance();
    summary["sigma_theory"] = std::sqrt(params->variance());
  } else {
    summary["variance"] = "infinite";
    summary["sigma_theory"] = nullptr;
  }
  summary["sigma_empirical"] = samples.empty() ? json(nullptr) : json(standard_deviation(samples));
  const double x_min = params->spike_magnitude(2);
  try {
    const auto fit = tail_exponent(samples, x_min, 10);
    summary["tail_fit"] = tail_json(0, fit);
  } catch (const std::exception& e) {
    summary["tail_fit"] = nullptr;
    summary["tail_fit_error"] = e.what();
  }
  json spikes = json::array();
  std::vector<std::int64_t> counts(7, 0);
  for (double x : samples) {
    for (int j = 0; j < 7; ++j) {
      if (std::abs(x) == sampler.magnitude_for(j)) ++counts[static_cast<std::size_t>(j)];
    }
  }
  for (int j = 0; j < 7; ++j) {
    spikes.push_back({{"j", j},
                      {"magnitude", sampler.magnitude_for(j)},
                      {"expected_probability", params->spike_probability(j)},
                      {"observed", counts[static_cast<std::size_t>(j)]}});
  }
  summary["spikes"] = spikes;
  write_json(dir / "summary.json", summary);

  out << "sample-noise: " << opts.count << " samples, sigma_empirical="
      << (samples.empty() ? std::string("n/a") : format_exponent(standard_deviation(samples)))
      << " sigma_theory="
      << (params->has_finite_variance() ? format_exponent(std::sqrt(params->variance()))
                                        : std::string("infinite"))
      << " beta=" << format_exponent(params->beta()) << " tail_exponent="
      << (summary["tail_fit"].is_null()
              ? std::string("n/a")
              : format_exponent(summary["tail_fit"]["regression_exponent"].is_null()
                                    ? NAN
                                    : summary["tail_fit"]["regression_exponent"].get<double>()))
      << '\n';
  return kOk;
}

struct StatsOptions {
  std::string series_path;
  std::string output;
  std::vector<int> taus{1, 4, 16, 64, 256};
  int max_lag = 100;
  int bins = 101;
  double tail_xmin = 2.0;
  std::size_t min_tail = 100;
  bool force = false;
};

int cmd_stats(const StatsOptions& opts, std::ostream& out) {
  std::ifstream in(opts.series_path, std::ios::binary);
  if (!in) throw ConfigError(opts.series_path + ": cannot open series file");
  std::string prov;
  std::string first;
  if (std::getline(in, first) && first.rfind("# ", 0) == 0) {
    prov = first.substr(2);
    if (const auto pos = prov.find(" n_agents="); pos != std::string::npos) prov.erase(pos);
  }
  in.clear();
  in.seekg(0);
  MarketSeries series;
  try {
    series = read_series_csv(in);
  } catch (const std::runtime_error& e) {
    throw ConfigError(opts.series_path + ": " + e.what());
  }

  AnalysisOptions options;
  options.taus = opts.taus;
  options.max_lag = opts.max_lag;
  options.histogram_bins = opts.bins;
  options.tail_xmin_multiple = opts.tail_xmin;
  options.min_tail_samples = opts.min_tail;

  const auto dir = resolve_output(opts.output);
  prepare_output(dir, opts.force);
  const auto analysis = analyze_series(series, options);
  auto files = write_analysis(dir, analysis, prov);

  json per_tau = json::array();
  for (const auto& ta : analysis.per_tau) {
    per_tau.push_back({{"tau", ta.tau},
                       {"n_returns", ta.n_returns},
                       {"std", ta.stddev},
                       {"excess_kurtosis", ta.histogram ? json(ta.excess_kurtosis) : json(nullptr)},
                       {"tail_exponent", ta.tail ? json(ta.tail->exponent) : json(nullptr)},
                       {"error", ta.error}});
  }
  write_json(dir / "stats_summary.json",
             {{"source_provenance", prov},
              {"rounds", series.size()},
              {"per_tau", per_tau},
              {"vol_volume_correlation",
               analysis.vol_volume_correlation ? json(*analysis.vol_volume_correlation)
                                               : json(nullptr)},
              {"warnings", analysis.warnings}});

  out << "stats: " << series.size() << " rounds, tail exponents";
  for (const auto& ta : analysis.per_tau) {
    out << " tau=" << ta.tau << ":" << format_exponent(ta.tail ? ta.tail->exponent : NAN);
  }
  out << '\n';
  return kOk;
}

void add_run_options(CLI::App* cmd, RunOptions& opts) {
  cmd->add_option("config", opts.config_path, "Experiment config file")->required();
  cmd->add_option("--set", opts.overrides, "Override a config key (key=value), repeatable");
  cmd->add_option("--seed", opts.seed, "Override the seed");
  cmd->add_option("--rounds", opts.rounds, "Override the number of analyzed rounds");
  cmd->add_option("--output,-o", opts.output, "Override the output directory");
  cmd->add_flag("--force", opts.force, "Write into an existing output directory");

  std::string keys = "Config keys:\n";
  for (const auto& k : key_specs()) {
    keys += "  " + std::string(k.name);
    if (!k.default_value.empty()) keys += " [" + std::string(k.default_value) + "]";
    keys += "  " + std::string(k.help) + "\n";
  }
  cmd->footer(keys);
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Threshold spin-market simulator with Weierstrass-Mandelbrot noise"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Run one experiment and analyze it");
  add_run_options(run, run_opts);

  RunOptions sweep_opts;
  int parallelism = 1;
  bool cell_artifacts = false;
  auto* sweep = app.add_subcommand("sweep", "Run every cell of a [grid] config");
  add_run_options(sweep, sweep_opts);
  sweep->add_option("--parallelism,-j", parallelism, "Concurrent cells")->check(CLI::PositiveNumber);
  sweep->add_flag("--cell-artifacts", cell_artifacts, "Write series and manifest per cell");

  NoiseOptions noise_opts;
  auto* noise = app.add_subcommand("sample-noise", "Draw Weierstrass-Mandelbrot samples");
  noise->add_option("--K", noise_opts.K, "Weight base K > 1")->capture_default_str();
  noise->add_option("--b", noise_opts.b, "Magnitude base b > 1")->capture_default_str();
  noise->add_option("--b0", noise_opts.b0, "Base magnitude b0 > 0")->capture_default_str();
  noise->add_option("--count,-n", noise_opts.count, "Number of samples")->capture_default_str();
  noise->add_option("--seed", noise_opts.seed, "Seed")->required();
  noise->add_option("--output,-o", noise_opts.output, "Output directory")->required();
  noise->add_flag("--force", noise_opts.force, "Write into an existing output directory");

  StatsOptions stats_opts;
  auto* stats = app.add_subcommand("stats", "Re-analyze an existing series CSV");
  stats->add_option("series", stats_opts.series_path, "series.csv from a run")->required();
  stats->add_option("--output,-o", stats_opts.output, "Output directory")->required();
  stats->add_option("--taus", stats_opts.taus, "Return lags")->delimiter(',');
  stats->add_option("--max-lag", stats_opts.max_lag, "Autocorrelation lags")->capture_default_str();
  stats->add_option("--bins", stats_opts.bins, "Histogram bins")->capture_default_str();
  stats->add_option("--tail-xmin", stats_opts.tail_xmin, "Tail threshold in std units")
      ->capture_default_str();
  stats->add_option("--min-tail", stats_opts.min_tail, "Minimum tail samples")->capture_default_str();
  stats->add_flag("--force", stats_opts.force, "Write into an existing output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*run) return cmd_run(run_opts, out);
    if (*sweep) return cmd_sweep(sweep_opts, parallelism, cell_artifacts, out, err);
    if (*noise) return cmd_sample_noise(noise_opts, out);
    if (*stats) return cmd_stats(stats_opts, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const OutputError& e) {
    err << "error: " << e.what() << '\n';
    return kOutputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace spinmarket::cli
