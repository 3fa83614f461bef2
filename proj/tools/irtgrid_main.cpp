// irtgrid: estimate per-item difficulty and per-model ability from binary
// correctness records, bin items by difficulty, correlate difficulty with
// per-item metrics, validate bins on held-out models, and build
// cross-difficulty generalization grids.
//
// Pipeline: ingest -> fit -> bin -> correlate / validate -> grid -> render.
// Every subcommand writes a .manifest.json next to each output; diagnostics
// go to stderr, data to the files named by flags.

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "irtgrid/analysis.hpp"
#include "irtgrid/csv.hpp"
#include "irtgrid/errors.hpp"
#include "irtgrid/fsio.hpp"
#include "irtgrid/grid.hpp"
#include "irtgrid/manifest.hpp"
#include "irtgrid/metric_table.hpp"
#include "irtgrid/params_io.hpp"
#include "irtgrid/response.hpp"
#include "irtgrid/rng.hpp"
#include "irtgrid/svg_heatmap.hpp"
#include "irtgrid/svi.hpp"
#include "irtgrid/synthetic.hpp"
#include "irtgrid/version.hpp"

namespace {

using namespace irtgrid;

constexpr int kExitOk = 0;
constexpr int kExitParse = 1;         // input malformed
constexpr int kExitPrecondition = 2;  // precondition/coverage failure
constexpr int kExitNumeric = 3;       // numerical failure

using ConfigList = std::vector<std::pair<std::string, std::string>>;

RunManifest start_manifest(const std::string& subcommand, std::uint64_t seed) {
  RunManifest manifest;
  manifest.tool_version = kVersion;
  manifest.subcommand = subcommand;
  manifest.seed = seed;
  manifest.started_at = utc_timestamp_now();
  return manifest;
}

void finish_manifests(RunManifest manifest, const ConfigList& config,
                      const std::vector<std::string>& inputs,
                      const std::vector<std::string>& outputs) {
  manifest.config = config;
  for (const auto& path : inputs) {
    manifest.input_digests.emplace_back(path, sha256_file_hex(path));
  }
  manifest.finished_at = utc_timestamp_now();
  for (const auto& path : outputs) {
    write_manifest(path, manifest);
  }
}

struct FitArgs {
  std::string responses;
  std::string out;
  std::string variant = "1pl";
  std::uint64_t seed = 0;
  std::size_t epochs = 1000;
  double lr = 0.1;
  std::size_t batch_size = 0;
  std::size_t mc_samples = 4;
  double tolerance = 1e-6;
  std::size_t patience = 50;
  std::size_t min_model_obs = 1;
  std::size_t min_item_obs = 1;
  std::string duplicates = "keep-first";
  bool lenient = false;
  bool nondeterministic = false;
};

int run_fit(const FitArgs& args) {
  auto manifest = start_manifest("fit", args.seed);

  const auto parsed = parse_response_file(
      args.responses, args.lenient ? ParseMode::Lenient : ParseMode::Strict);
  if (parsed.skipped_lines > 0) {
    std::cerr << "warning: skipped " << parsed.skipped_lines << " malformed lines\n";
  }

  BuildOptions build_opts;
  build_opts.min_model_obs = args.min_model_obs;
  build_opts.min_item_obs = args.min_item_obs;
  build_opts.duplicates =
      args.duplicates == "error" ? DuplicatePolicy::Error : DuplicatePolicy::KeepFirst;
  const auto built = build_matrix(parsed.records, build_opts);
  if (built.duplicates_dropped > 0) {
    std::cerr << "warning: dropped " << built.duplicates_dropped << " duplicate observations ("
              << built.duplicate_conflicts << " conflicting)\n";
  }
  if (built.models_removed > 0 || built.items_removed > 0) {
    std::cerr << "note: threshold filtering removed " << built.models_removed << " models and "
              << built.items_removed << " items\n";
  }

  FitConfig config;
  config.variant = variant_from_string(args.variant);
  config.epochs = args.epochs;
  config.learning_rate = args.lr;
  config.batch_size = args.batch_size;
  config.mc_samples = args.mc_samples;
  config.tolerance = args.tolerance;
  config.patience = args.patience;
  config.seed = args.seed;
  config.deterministic = !args.nondeterministic;

  PriorConfig priors;  // N(0,1) abilities/difficulties, log-normal discrimination
  const IrtFit fit_result = fit(built.matrix, priors, config);
  std::cerr << "fit: " << built.matrix.model_count() << " models, "
            << built.matrix.item_count() << " items, " << built.matrix.observations.size()
            << " observations; " << fit_result.elbo_trace.size() << " epochs, final ELBO "
            << format_double(fit_result.final_elbo())
            << (fit_result.converged ? " (converged)" : " (epoch budget)") << "\n";

  write_params_file(args.out, fit_result);
  const ConfigList config_list = {
      {"responses", args.responses},
      {"out", args.out},
      {"variant", args.variant},
      {"seed", std::to_string(args.seed)},
      {"epochs", std::to_string(args.epochs)},
      {"lr", format_double(args.lr)},
      {"batch_size", std::to_string(args.batch_size)},
      {"mc_samples", std::to_string(args.mc_samples)},
      {"tolerance", format_double(args.tolerance)},
      {"patience", std::to_string(args.patience)},
      {"min_model_obs", std::to_string(args.min_model_obs)},
      {"min_item_obs", std::to_string(args.min_item_obs)},
      {"duplicates", args.duplicates},
      {"lenient", args.lenient ? "true" : "false"},
      {"deterministic", args.nondeterministic ? "false" : "true"},
  };
  finish_manifests(std::move(manifest), config_list, {args.responses}, {args.out});
  return kExitOk;
}

struct BinArgs {
  std::string params;
  std::string out;
  std::size_t k = 10;
};

int run_bin(const BinArgs& args) {
  auto manifest = start_manifest("bin", 0);
  const IrtFit fit_result = read_params_file(args.params);
  const auto binning = bin_by_difficulty(difficulties_from_fit(fit_result), args.k);
  atomic_write_file(args.out, binning_to_csv(binning));
  finish_manifests(std::move(manifest),
                   {{"params", args.params}, {"out", args.out}, {"k", std::to_string(args.k)}},
                   {args.params}, {args.out});
  return kExitOk;
}

struct CorrelateArgs {
  std::string params;
  std::string metrics;
  std::string schema;
  std::string out;
};

int run_correlate(const CorrelateArgs& args) {
  auto manifest = start_manifest("correlate", 0);
  const IrtFit fit_result = read_params_file(args.params);
  const MetricSchema schema = load_metric_schema(args.schema);
  const MetricTable table = load_metric_table_file(args.metrics, schema);
  const auto report = correlate_metrics(difficulties_from_fit(fit_result), table);
  for (const auto& pair : report.skipped) {
    std::cerr << "warning: undefined correlation skipped: " << pair << "\n";
  }
  atomic_write_file(args.out, correlation_report_to_json(report));
  finish_manifests(std::move(manifest),
                   {{"params", args.params},
                    {"metrics", args.metrics},
                    {"schema", args.schema},
                    {"out", args.out}},
                   {args.params, args.metrics, args.schema}, {args.out});
  return kExitOk;
}

struct ValidateArgs {
  std::string holdout;
  std::string bins;
  std::string out;
  bool lenient = false;
};

int run_validate(const ValidateArgs& args) {
  auto manifest = start_manifest("validate", 0);
  const auto parsed = parse_response_file(
      args.holdout, args.lenient ? ParseMode::Lenient : ParseMode::Strict);
  if (parsed.records.empty()) {
    std::cerr << "warning: holdout set is empty; validation is vacuous\n";
  }
  const auto binning = binning_from_csv(read_file(args.bins));
  const auto report = holdout_validation(parsed.records, binning);
  if (report.unknown_items > 0) {
    std::cerr << "warning: " << report.unknown_items
              << " holdout observations reference items outside the binning\n";
  }
  for (std::size_t bin = 0; bin < binning.k; ++bin) {
    if (report.per_bin_counts[bin] == 0) {
      std::cerr << "warning: bin " << bin << " has no holdout coverage\n";
    }
  }
  atomic_write_file(args.out, validation_report_to_json(report));
  finish_manifests(std::move(manifest),
                   {{"holdout", args.holdout}, {"bins", args.bins}, {"out", args.out}},
                   {args.holdout, args.bins}, {args.out});
  return kExitOk;
}

struct GridArgs {
  std::string acc;
  std::string out;
  std::string svg;
  bool mask = true;
  bool annotate = false;
};

int run_grid(const GridArgs& args) {
  auto manifest = start_manifest("grid", 0);
  const auto grid = import_grid_csv(read_file(args.acc), args.mask);
  std::vector<std::string> outputs;
  if (!args.out.empty()) {
    atomic_write_file(args.out, export_improvement_csv(grid));
    outputs.push_back(args.out);
  }
  if (!args.svg.empty()) {
    HeatmapOptions options;
    options.annotate = args.annotate;
    options.title = "improvement over zero-shot";
    atomic_write_file(args.svg, render_heatmap_svg(grid.improvement, grid.mask_diagonal, options));
    outputs.push_back(args.svg);
  }
  if (outputs.empty()) {
    throw PreconditionError("grid: nothing to do (pass --out and/or --svg)");
  }
  finish_manifests(std::move(manifest),
                   {{"acc", args.acc},
                    {"out", args.out},
                    {"svg", args.svg},
                    {"mask", args.mask ? "true" : "false"},
                    {"annotate", args.annotate ? "true" : "false"}},
                   {args.acc}, outputs);
  return kExitOk;
}

struct SimulateArgs {
  std::string spec;
  std::string out;
  std::uint64_t seed = 0;
};

// Simulation spec document:
//   {
//     "models": 300, "items": 200, "k": 10,
//     "students_per_cell": 500,
//     "effect": {"kind": "locality", "gain": 0.8, "width": 1.0},
//     "sampler": {"theta_mean": 0, "theta_sd": 1, "beta_mean": 0, "beta_sd": 1}
//   }
int run_simulate(const SimulateArgs& args) {
  auto manifest = start_manifest("simulate", args.seed);
  nlohmann::json spec;
  try {
    spec = nlohmann::json::parse(read_file(args.spec));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid simulation spec: ") + e.what());
  }

  std::size_t n_models = 0, n_items = 0, k = 0, students = 0;
  EffectModel effect;
  SamplerSpec sampler;
  try {
    n_models = spec.at("models").get<std::size_t>();
    n_items = spec.at("items").get<std::size_t>();
    k = spec.value("k", std::size_t{10});
    students = spec.value("students_per_cell", std::size_t{500});
    const auto& eff = spec.at("effect");
    const std::string kind = eff.at("kind").get<std::string>();
    if (kind == "locality") {
      effect.kind = EffectModel::Kind::Locality;
      effect.width = eff.value("width", 1.0);
    } else if (kind == "uniform") {
      effect.kind = EffectModel::Kind::Uniform;
    } else {
      throw ParseError("simulation spec: effect kind must be locality or uniform");
    }
    effect.gain = eff.at("gain").get<double>();
    if (spec.contains("sampler")) {
      const auto& s = spec["sampler"];
      sampler.theta_mean = s.value("theta_mean", sampler.theta_mean);
      sampler.theta_sd = s.value("theta_sd", sampler.theta_sd);
      sampler.beta_mean = s.value("beta_mean", sampler.beta_mean);
      sampler.beta_sd = s.value("beta_sd", sampler.beta_sd);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid simulation spec: ") + e.what());
  }

  // Ground truth: seeded ability pool and item difficulties, items binned
  // by their true difficulty.
  sampler.validate();
  Rng rng(mix_seed(args.seed, 0xA11));
  std::vector<double> pool(n_models);
  for (auto& theta : pool) theta = sampler.theta_mean + sampler.theta_sd * rng.normal();
  std::vector<std::pair<std::string, double>> betas;
  betas.reserve(n_items);
  for (std::size_t i = 0; i < n_items; ++i) {
    betas.emplace_back("q" + std::to_string(i),
                       sampler.beta_mean + sampler.beta_sd * rng.normal());
  }
  const auto binning = bin_by_difficulty(betas, k);
  const auto grid = simulate_experiment(pool, betas, binning, effect, students,
                                        mix_seed(args.seed, 0xB22));
  atomic_write_file(args.out, export_grid_csv(grid));
  finish_manifests(std::move(manifest),
                   {{"spec", args.spec}, {"out", args.out}, {"seed", std::to_string(args.seed)}},
                   {args.spec}, {args.out});
  return kExitOk;
}

struct StatsArgs {
  std::string responses;
  std::string out;
  bool lenient = false;
};

int run_stats(const StatsArgs& args) {
  const auto parsed = parse_response_file(
      args.responses, args.lenient ? ParseMode::Lenient : ParseMode::Strict);
  const auto built = build_matrix(parsed.records);
  const auto stats = matrix_stats(built.matrix);

  nlohmann::ordered_json doc;
  doc["models"] = built.matrix.model_count();
  doc["items"] = built.matrix.item_count();
  doc["observations"] = built.matrix.observations.size();
  doc["density"] = stats.density;
  doc["skipped_lines"] = parsed.skipped_lines;
  doc["duplicates_dropped"] = built.duplicates_dropped;
  doc["duplicate_conflicts"] = built.duplicate_conflicts;
  doc["degenerate_items"] = stats.degenerate_items;
  double facility_min = 1.0, facility_max = 0.0, facility_sum = 0.0;
  for (const double p : stats.item_facility) {
    facility_min = std::min(facility_min, p);
    facility_max = std::max(facility_max, p);
    facility_sum += p;
  }
  doc["item_facility"] = {{"min", facility_min},
                          {"mean", facility_sum / static_cast<double>(stats.item_facility.size())},
                          {"max", facility_max}};
  const std::string text = doc.dump(2) + "\n";

  if (args.out.empty()) {
    std::cout << text;
  } else {
    auto manifest = start_manifest("stats", 0);
    atomic_write_file(args.out, text);
    finish_manifests(std::move(manifest), {{"responses", args.responses}, {"out", args.out}},
                     {args.responses}, {args.out});
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IRT-based difficulty estimation and cross-difficulty generalization toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* cmd_fit = app.add_subcommand(
      "fit", "Fit a 1PL/2PL model to a response file by stochastic variational inference");
  cmd_fit->add_option("--responses", fit_args.responses, "Line-delimited response records")
      ->required();
  cmd_fit->add_option("--out", fit_args.out, "Output parameter file")->required();
  cmd_fit->add_option("--variant", fit_args.variant, "Model variant")
      ->check(CLI::IsMember({"1pl", "2pl"}))
      ->capture_default_str();
  cmd_fit->add_option("--seed", fit_args.seed, "RNG seed")->capture_default_str();
  cmd_fit->add_option("--epochs", fit_args.epochs, "Epoch budget")->capture_default_str();
  cmd_fit->add_option("--lr", fit_args.lr, "Learning rate")->capture_default_str();
  cmd_fit->add_option("--batch-size", fit_args.batch_size, "Observations per batch (0 = full)")
      ->capture_default_str();
  cmd_fit->add_option("--mc-samples", fit_args.mc_samples, "Reparameterization draws per step")
      ->capture_default_str();
  cmd_fit->add_option("--tolerance", fit_args.tolerance,
                      "Relative ELBO improvement threshold over the patience window")
      ->capture_default_str();
  cmd_fit->add_option("--patience", fit_args.patience, "Patience window (epochs)")
      ->capture_default_str();
  cmd_fit->add_option("--min-model-obs", fit_args.min_model_obs,
                      "Drop models with fewer observations")
      ->capture_default_str();
  cmd_fit->add_option("--min-item-obs", fit_args.min_item_obs,
                      "Drop items with fewer observations")
      ->capture_default_str();
  cmd_fit->add_option("--duplicates", fit_args.duplicates, "Duplicate (model,item) policy")
      ->check(CLI::IsMember({"keep-first", "error"}))
      ->capture_default_str();
  cmd_fit->add_flag("--lenient", fit_args.lenient, "Skip and count malformed lines");
  cmd_fit->add_flag("--nondeterministic", fit_args.nondeterministic,
                    "Refresh Monte-Carlo draws every epoch (trace no longer monotone)");

  BinArgs bin_args;
  auto* cmd_bin = app.add_subcommand("bin", "Bin items into K equal-size difficulty bins");
  cmd_bin->add_option("--params", bin_args.params, "Parameter file from fit")->required();
  cmd_bin->add_option("--out", bin_args.out, "Output bins file")->required();
  cmd_bin->add_option("--k", bin_args.k, "Bin count")->capture_default_str();

  CorrelateArgs correlate_args;
  auto* cmd_correlate = app.add_subcommand(
      "correlate", "Spearman correlations between IRT difficulty and metric columns");
  cmd_correlate->add_option("--params", correlate_args.params, "Parameter file from fit")
      ->required();
  cmd_correlate->add_option("--metrics", correlate_args.metrics, "Comma-delimited metric file")
      ->required();
  cmd_correlate->add_option("--schema", correlate_args.schema, "Column schema JSON")->required();
  cmd_correlate->add_option("--out", correlate_args.out, "Output correlation report")->required();

  ValidateArgs validate_args;
  auto* cmd_validate = app.add_subcommand(
      "validate", "Per-bin accuracy of held-out models over an existing binning");
  cmd_validate->add_option("--holdout", validate_args.holdout, "Holdout response records")
      ->required();
  cmd_validate->add_option("--bins", validate_args.bins, "Bins file from bin")->required();
  cmd_validate->add_option("--out", validate_args.out, "Output validation report")->required();
  cmd_validate->add_flag("--lenient", validate_args.lenient, "Skip and count malformed lines");

  GridArgs grid_args;
  auto* cmd_grid = app.add_subcommand(
      "grid", "Improvement matrix and heatmap from a grid accuracy file");
  cmd_grid->add_option("--acc", grid_args.acc, "Grid accuracy file")->required();
  cmd_grid->add_option("--out", grid_args.out, "Output improvement file");
  cmd_grid->add_option("--svg", grid_args.svg, "Output heatmap SVG");
  cmd_grid->add_flag("--mask,!--no-mask", grid_args.mask, "Mask the diagonal (default on)");
  cmd_grid->add_flag("--annotate", grid_args.annotate, "Print values inside heatmap cells");

  SimulateArgs simulate_args;
  auto* cmd_simulate = app.add_subcommand(
      "simulate", "Synthetic cross-difficulty experiment from a spec file");
  cmd_simulate->add_option("--spec", simulate_args.spec, "Simulation spec JSON")->required();
  cmd_simulate->add_option("--out", simulate_args.out, "Output grid accuracy file")->required();
  cmd_simulate->add_option("--seed", simulate_args.seed, "RNG seed")->capture_default_str();

  StatsArgs stats_args;
  auto* cmd_stats = app.add_subcommand("stats", "Summary statistics of a response file");
  cmd_stats->add_option("--responses", stats_args.responses, "Line-delimited response records")
      ->required();
  cmd_stats->add_option("--out", stats_args.out, "Write the summary here instead of stdout");
  cmd_stats->add_flag("--lenient", stats_args.lenient, "Skip and count malformed lines");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_fit->parsed()) return run_fit(fit_args);
    if (cmd_bin->parsed()) return run_bin(bin_args);
    if (cmd_correlate->parsed()) return run_correlate(correlate_args);
    if (cmd_validate->parsed()) return run_validate(validate_args);
    if (cmd_grid->parsed()) return run_grid(grid_args);
    if (cmd_simulate->parsed()) return run_simulate(simulate_args);
    if (cmd_stats->parsed()) return run_stats(stats_args);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}
