// Command-line front end: validate, analyze, train, experiment fig1, and
// decompose. Every run with the same flags, environment, and input bytes
// produces byte-identical primary outputs; the run manifest differs only in
// its duration field. Exit codes: 0 success, 2 user or input error,
// 3 numerical failure.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "structkan/decompose.hpp"
#include "structkan/fig1.hpp"
#include "structkan/manifest.hpp"
#include "structkan/representability.hpp"
#include "structkan/threads.hpp"
#include "structkan/train_smooth.hpp"
#include "structkan/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace structkan;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw std::invalid_argument("failed reading " + path.string());
  return bytes;
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::invalid_argument("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out.good()) throw std::invalid_argument("failed writing " + path.string());
}

// Collects manifest bookkeeping for one subcommand run. Primary outputs go
// through write_output; finish() stamps the duration and writes
// manifest.json as the final file so a manifest always describes a
// completed run.
class CommandRun {
 public:
  CommandRun(std::string subcommand, fs::path out_dir)
      : out_dir_(std::move(out_dir)), start_(std::chrono::steady_clock::now()) {
    manifest_.subcommand = std::move(subcommand);
    manifest_.version = kVersion;
    std::error_code ec;
    fs::create_directories(out_dir_, ec);
    if (ec)
      throw std::invalid_argument("cannot create output directory " + out_dir_.string() +
                                  ": " + ec.message());
  }

  std::string read_input(const fs::path& path) {
    std::string bytes = read_file(path);
    manifest_.add_input(path.generic_string(), bytes);
    return bytes;
  }

  void write_output(const std::string& name, std::string_view bytes) {
    write_file(out_dir_ / name, bytes);
    manifest_.outputs.push_back(name);
  }

  void finish(json config, std::uint64_t seed) {
    manifest_.config = std::move(config);
    manifest_.seed = seed;
    manifest_.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_file(out_dir_ / "manifest.json", manifest_to_string(manifest_));
  }

 private:
  fs::path out_dir_;
  RunManifest manifest_;
  std::chrono::steady_clock::time_point start_;
};

// ---------------------------------------------------------------------------
// Layered configuration: built-in defaults, then --config file values, then
// explicit flags. Each flag records whether it was actually passed so file
// values only fill the gaps.

struct ConfigFlags {
  std::string config_path;
  std::string engine;
  int rounds = 0;
  double learning_rate = 0.0;
  int tree_depth = 0;
  int min_leaf_count = 0;
  double probe_epsilon = 0.0;
  int batch_size = 0;
  std::uint64_t seed = 0;
  int train_samples = 0;
  int val_samples = 0;
  double lo = 0.0;
  double hi = 0.0;

  CLI::Option* o_engine = nullptr;
  CLI::Option* o_rounds = nullptr;
  CLI::Option* o_learning_rate = nullptr;
  CLI::Option* o_tree_depth = nullptr;
  CLI::Option* o_min_leaf_count = nullptr;
  CLI::Option* o_probe_epsilon = nullptr;
  CLI::Option* o_batch_size = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_train_samples = nullptr;
  CLI::Option* o_val_samples = nullptr;
  CLI::Option* o_lo = nullptr;
  CLI::Option* o_hi = nullptr;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& f, bool with_engine_choice) {
  cmd->add_option("--config", f.config_path,
                  "JSON config file; flag values override it, it overrides defaults");
  if (with_engine_choice)
    f.o_engine = cmd->add_option("--engine", f.engine, "Training engine: boosted or smooth");
  f.o_rounds = cmd->add_option("--rounds", f.rounds, "Boosting rounds / training epochs");
  f.o_learning_rate =
      cmd->add_option("--learning-rate", f.learning_rate,
                      "Shrinkage (boosted) or Adam step size (smooth)");
  f.o_tree_depth = cmd->add_option("--tree-depth", f.tree_depth, "Maximum regression tree depth");
  f.o_min_leaf_count =
      cmd->add_option("--min-leaf-count", f.min_leaf_count, "Minimum samples per tree leaf");
  f.o_probe_epsilon =
      cmd->add_option("--probe-epsilon", f.probe_epsilon,
                      "Sensitivity probe window, relative to the probed column's std");
  f.o_batch_size = cmd->add_option("--batch-size", f.batch_size, "Mini-batch size (smooth engine)");
  f.o_seed = cmd->add_option("--seed", f.seed, "Base seed for data generation and training");
  f.o_train_samples = cmd->add_option("--train-samples", f.train_samples, "Training sample count");
  f.o_val_samples = cmd->add_option("--val-samples", f.val_samples, "Validation sample count");
  f.o_lo = cmd->add_option("--lo", f.lo, "Sampling range lower bound");
  f.o_hi = cmd->add_option("--hi", f.hi, "Sampling range upper bound");
}

struct RunSettings {
  EngineConfig engine;
  int train_samples = 10000;
  int val_samples = 2000;
  double lo = -1.0;
  double hi = 1.0;
};

Engine parse_engine(const std::string& name) {
  if (name == "boosted") return Engine::Boosted;
  if (name == "smooth") return Engine::Smooth;
  throw std::invalid_argument("unknown engine '" + name + "' (expected boosted or smooth)");
}

// Boosted and smooth defaults differ only in learning rate.
EngineConfig engine_defaults(Engine e) {
  EngineConfig c;
  c.engine = e;
  if (e == Engine::Smooth) c.learning_rate = 1e-2;
  return c;
}

RunSettings resolve_settings(const ConfigFlags& f, CommandRun* run) {
  json file = json::object();
  if (!f.config_path.empty()) {
    std::string bytes = run != nullptr ? run->read_input(f.config_path) : read_file(f.config_path);
    try {
      file = json::parse(bytes);
    } catch (const json::parse_error& e) {
      throw std::invalid_argument(std::string("config file: ") + e.what());
    }
    if (!file.is_object()) throw std::invalid_argument("config file: expected a JSON object");
    static const std::vector<std::string> kKnown = {
        "engine",        "rounds",     "learning_rate", "tree_depth",
        "min_leaf_count", "probe_epsilon", "batch_size", "seed",
        "train_samples", "val_samples", "lo",           "hi"};
    for (const auto& [key, value] : file.items()) {
      (void)value;
      if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end())
        throw std::invalid_argument("config file: unknown key '" + key + "'");
    }
  }

  // The engine choice resolves first because it selects the defaults the
  // other layers refine.
  std::string engine_name = "boosted";
  if (file.contains("engine")) engine_name = file["engine"].get<std::string>();
  if (f.o_engine != nullptr && f.o_engine->count() > 0) engine_name = f.engine;
  RunSettings s;
  s.engine = engine_defaults(parse_engine(engine_name));

  if (file.contains("rounds")) s.engine.rounds = file["rounds"].get<int>();
  if (file.contains("learning_rate")) s.engine.learning_rate = file["learning_rate"].get<double>();
  if (file.contains("tree_depth")) s.engine.tree_depth = file["tree_depth"].get<int>();
  if (file.contains("min_leaf_count")) s.engine.min_leaf_count = file["min_leaf_count"].get<int>();
  if (file.contains("probe_epsilon")) s.engine.probe_epsilon = file["probe_epsilon"].get<double>();
  if (file.contains("batch_size")) s.engine.batch_size = file["batch_size"].get<int>();
  if (file.contains("seed")) s.engine.seed = file["seed"].get<std::uint64_t>();
  if (file.contains("train_samples")) s.train_samples = file["train_samples"].get<int>();
  if (file.contains("val_samples")) s.val_samples = file["val_samples"].get<int>();
  if (file.contains("lo")) s.lo = file["lo"].get<double>();
  if (file.contains("hi")) s.hi = file["hi"].get<double>();

  if (f.o_rounds->count() > 0) s.engine.rounds = f.rounds;
  if (f.o_learning_rate->count() > 0) s.engine.learning_rate = f.learning_rate;
  if (f.o_tree_depth->count() > 0) s.engine.tree_depth = f.tree_depth;
  if (f.o_min_leaf_count->count() > 0) s.engine.min_leaf_count = f.min_leaf_count;
  if (f.o_probe_epsilon->count() > 0) s.engine.probe_epsilon = f.probe_epsilon;
  if (f.o_batch_size->count() > 0) s.engine.batch_size = f.batch_size;
  if (f.o_seed->count() > 0) s.engine.seed = f.seed;
  if (f.o_train_samples->count() > 0) s.train_samples = f.train_samples;
  if (f.o_val_samples->count() > 0) s.val_samples = f.val_samples;
  if (f.o_lo->count() > 0) s.lo = f.lo;
  if (f.o_hi->count() > 0) s.hi = f.hi;

  s.engine.validate();
  if (s.train_samples < 1 || s.val_samples < 1)
    throw std::invalid_argument("sample counts must be >= 1");
  if (!(s.lo < s.hi)) throw std::invalid_argument("sampling range requires lo < hi");
  return s;
}

json settings_to_json(const RunSettings& s) {
  return {{"engine", engine_name(s.engine.engine)},
          {"rounds", s.engine.rounds},
          {"learning_rate", s.engine.learning_rate},
          {"tree_depth", s.engine.tree_depth},
          {"min_leaf_count", s.engine.min_leaf_count},
          {"probe_epsilon", s.engine.probe_epsilon},
          {"batch_size", s.engine.batch_size},
          {"seed", s.engine.seed},
          {"train_samples", s.train_samples},
          {"val_samples", s.val_samples},
          {"lo", s.lo},
          {"hi", s.hi}};
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  for (char c : text) {
    if (c == sep) {
      out.push_back(item);
      item.clear();
    } else if (c != ' ') {
      item += c;
    }
  }
  out.push_back(item);
  return out;
}

// ---------------------------------------------------------------------------
// validate

struct ValidateArgs {
  std::string topology_path;
};

int cmd_validate(const ValidateArgs& a) {
  const std::string bytes = read_file(a.topology_path);
  const NetworkModel model = model_from_string(bytes);
  const NetworkTopology& t = model.topology;
  std::printf("topology valid: %d nodes, %zu edges, output node %d\n", t.node_count(),
              t.edges.size(), t.output);
  return 0;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
  std::string topology_path;
  std::string out_dir;
  int max_p = 30;
  std::int64_t n = 0;
  std::string k, k_prime;
  std::int64_t n_prime = 0;
  CLI::Option* o_n = nullptr;
  CLI::Option* o_k = nullptr;
  CLI::Option* o_k_prime = nullptr;
  CLI::Option* o_n_prime = nullptr;
};

Smoothness parse_smoothness(const std::string& text, const char* flag) {
  if (text == "inf") return Smoothness::inf();
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(text, &pos);
    if (pos != text.size() || v < 0) throw std::invalid_argument("");
    return Smoothness::finite(v);
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string(flag) + " must be a non-negative integer or 'inf'");
  }
}

int cmd_analyze(const AnalyzeArgs& a) {
  CommandRun run("analyze", a.out_dir);
  const NetworkModel model = model_from_string(run.read_input(a.topology_path));
  const NetworkTopology& topo = model.topology;

  const std::int64_t m = topo.univariate_count();
  const std::int64_t n = a.o_n->count() > 0 ? a.n : topo.input_dim;
  if (a.max_p < 1) throw std::invalid_argument("--max-p must be >= 1");

  json summary = {{"m", m}, {"n", n}, {"max_p", a.max_p}};

  // The counting scan needs at least one univariate node and n >= 3; the
  // lower bound is defined only there.
  const bool applicable = m >= 1 && n >= 3;
  summary["counting_applicable"] = applicable;
  if (applicable) {
    std::string csv = "p,N_p,deriv_dim_exact,claimed_bound,representable_all\n";
    for (int p = 1; p <= a.max_p; ++p) {
      const CountingReport r = counting_report(m, n, p);
      csv += std::to_string(r.p) + ',' + std::to_string(r.n_p_bound) + ',' +
             std::to_string(r.deriv_dim_exact) + ',' + std::to_string(r.claimed_lower_bound) +
             ',' + (r.representable_all ? "true" : "false") + '\n';
    }
    run.write_output("counting.csv", csv);

    try {
      const std::int64_t p_star = smoothness_limit(m, n, a.max_p);
      summary["p_star"] = p_star;
      std::printf("p* = %lld\n", static_cast<long long>(p_star));
    } catch (const std::runtime_error&) {
      summary["p_star"] = nullptr;
      std::printf("p* not reached within --max-p %d\n", a.max_p);
    }
  } else {
    summary["p_star"] = nullptr;
    std::printf("counting scan skipped: needs >= 1 univariate node and n >= 3 (m=%lld, n=%lld)\n",
                static_cast<long long>(m), static_cast<long long>(n));
  }

  const int smoothness_flags =
      (a.o_k->count() > 0) + (a.o_k_prime->count() > 0) + (a.o_n_prime->count() > 0);
  if (smoothness_flags > 0 && smoothness_flags < 3)
    throw std::invalid_argument("smoothness check needs all of --k, --k-prime, --n-prime");
  if (smoothness_flags == 3) {
    SmoothnessSpec spec;
    spec.k = parse_smoothness(a.k, "--k");
    spec.n = n;
    spec.k_prime = parse_smoothness(a.k_prime, "--k-prime");
    spec.n_prime = a.n_prime;
    const bool violates = vitushkin_violates(spec);
    std::printf("verdict: %s\n",
                violates ? "violates the smoothness bound" : "within the smoothness bound");
    summary["smoothness"] = {{"k", a.k},
                             {"n", n},
                             {"k_prime", a.k_prime},
                             {"n_prime", a.n_prime},
                             {"violates", violates}};
  } else {
    summary["smoothness"] = nullptr;
  }

  run.write_output("summary.json", summary.dump(2) + "\n");

  json config = {{"topology", a.topology_path},
                 {"n", n},
                 {"max_p", a.max_p},
                 {"k", smoothness_flags == 3 ? json(a.k) : json()},
                 {"k_prime", smoothness_flags == 3 ? json(a.k_prime) : json()},
                 {"n_prime", smoothness_flags == 3 ? json(a.n_prime) : json()}};
  run.finish(std::move(config), 0);
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string topology_path;
  std::string target;
  std::string variables;
  std::string out_dir;
  ConfigFlags config;
};

int cmd_train(const TrainArgs& a) {
  CommandRun run("train", a.out_dir);
  const NetworkModel parsed = model_from_string(run.read_input(a.topology_path));
  const NetworkTopology& topo = parsed.topology;
  const RunSettings s = resolve_settings(a.config, &run);

  std::vector<std::string> vars;
  if (!a.variables.empty()) {
    vars = split_list(a.variables, ',');
  } else {
    for (int i = 1; i <= topo.input_dim; ++i) vars.push_back("x" + std::to_string(i));
  }
  if (static_cast<int>(vars.size()) != topo.input_dim)
    throw std::invalid_argument("--variables lists " + std::to_string(vars.size()) +
                                " names but the topology has " +
                                std::to_string(topo.input_dim) + " inputs");

  const ExprTree expr = ExprTree::parse(a.target, vars);
  const TrainValSplit data =
      make_train_val(expr, s.train_samples, s.val_samples, s.engine.seed, s.lo, s.hi);

  const auto log_round = [&](const TraceRow& r) {
    std::fprintf(stderr, "round %d/%d  train %.6f  val %.6f\n", r.round, s.engine.rounds,
                 r.train_rmse_norm, r.val_rmse_norm);
  };

  TrainingTrace trace;
  NetworkModel model;
  if (s.engine.engine == Engine::Boosted) {
    BoostedResult result = train_boosted(topo, data.train, data.val, s.engine, false, log_round);
    trace = std::move(result.trace);
    model = std::move(result.model);
  } else {
    SmoothResult result = train_smooth(topo, data.train, data.val, s.engine, log_round);
    trace = std::move(result.trace);
    model = std::move(result.model);
  }

  run.write_output("trace.csv", trace.to_csv());
  run.write_output("model.json", model_to_string(model));

  const TraceRow& last = trace.rows.back();
  std::printf("final: round %d  train_rmse_norm %s  val_rmse_norm %s\n", last.round,
              format_double(last.train_rmse_norm).c_str(),
              format_double(last.val_rmse_norm).c_str());

  json config = settings_to_json(s);
  config["topology"] = a.topology_path;
  config["target"] = a.target;
  config["variables"] = vars;
  run.finish(std::move(config), s.engine.seed);
  return 0;
}

// ---------------------------------------------------------------------------
// experiment fig1

struct Fig1Args {
  std::string out_dir;
  ConfigFlags config;
};

int cmd_fig1(const Fig1Args& a) {
  CommandRun run("experiment fig1", a.out_dir);
  const RunSettings s = resolve_settings(a.config, &run);

  ExperimentSpec matched;
  matched.topology = fig1_topology();
  matched.config = s.engine;
  matched.variables = fig1_variables();
  matched.target = "x1^2*x2 + y1*y2^2";
  matched.train_samples = s.train_samples;
  matched.val_samples = s.val_samples;
  matched.lo = s.lo;
  matched.hi = s.hi;
  ExperimentSpec mismatched = matched;
  mismatched.target = "x1*y1*y2 + x1*x2*y2";

  const char* labels[2] = {"z", "zprime"};
  const Fig1Result result =
      run_fig1(matched, mismatched, [&](int which, const TraceRow& r) {
        std::fprintf(stderr, "%s round %d/%d  train %.6f  val %.6f\n", labels[which], r.round,
                     s.engine.rounds, r.train_rmse_norm, r.val_rmse_norm);
      });

  run.write_output("trace_z.csv", result.matched.to_csv());
  run.write_output("trace_zprime.csv", result.mismatched.to_csv());

  const json summary = {
      {"z",
       {{"final_val_rmse_norm", result.summary.matched_final_val},
        {"best_val_rmse_norm", result.summary.matched_best_val}}},
      {"zprime",
       {{"final_val_rmse_norm", result.summary.mismatched_final_val},
        {"best_val_rmse_norm", result.summary.mismatched_best_val}}},
      {"ratio", result.summary.ratio}};
  run.write_output("summary.json", summary.dump(2) + "\n");
  run.write_output("fig1.svg",
                   render_fig1_svg(result.matched, result.mismatched, "z (matched structure)",
                                   "z&apos; (mismatched structure)"));

  std::printf("z final val_rmse_norm %s, zprime final val_rmse_norm %s, ratio %s\n",
              format_double(result.summary.matched_final_val).c_str(),
              format_double(result.summary.mismatched_final_val).c_str(),
              format_double(result.summary.ratio).c_str());

  json config = settings_to_json(s);
  config["target_z"] = matched.target;
  config["target_zprime"] = mismatched.target;
  run.finish(std::move(config), s.engine.seed);
  return 0;
}

// ---------------------------------------------------------------------------
// decompose

struct DecomposeArgs {
  std::string expr;
  std::string partition;
  int n_probes = 256;
  std::uint64_t seed = 0;
  std::string out_dir;
};

int cmd_decompose(const DecomposeArgs& a) {
  const std::vector<std::string> blocks = split_list(a.partition, '|');
  if (blocks.size() != 2)
    throw std::invalid_argument("--partition must name two blocks separated by '|'");

  std::vector<std::string> vars;
  std::vector<int> block_a, block_b;
  for (int b = 0; b < 2; ++b) {
    for (const std::string& name : split_list(blocks[static_cast<std::size_t>(b)], ',')) {
      if (name.empty()) throw std::invalid_argument("--partition has an empty variable name");
      if (std::find(vars.begin(), vars.end(), name) != vars.end())
        throw std::invalid_argument("partition not disjoint");
      (b == 0 ? block_a : block_b).push_back(static_cast<int>(vars.size()));
      vars.push_back(name);
    }
  }

  const ExprTree expr = ExprTree::parse(a.expr, vars);
  const DecomposabilityReport report =
      decomposability_score(expr, block_a, block_b, a.n_probes, a.seed);

  constexpr double kDecomposableBelow = 1e-6;
  const json result = {{"score", report.score},
                       {"verdict", report.score < kDecomposableBelow ? "decomposable"
                                                                     : "not decomposable"},
                       {"block_a_term", report.block_a_term},
                       {"block_b_term", report.block_b_term},
                       {"block_a_degenerate", report.block_a_degenerate},
                       {"block_b_degenerate", report.block_b_degenerate},
                       {"skipped_a", report.skipped_a},
                       {"skipped_b", report.skipped_b},
                       {"evals_per_block", report.evals_per_block},
                       {"n_probes", a.n_probes},
                       {"seed", a.seed}};
  std::printf("%s\n", result.dump(2).c_str());

  if (!a.out_dir.empty()) {
    CommandRun run("decompose", a.out_dir);
    run.write_output("result.json", result.dump(2) + "\n");
    const json config = {{"expr", a.expr},
                         {"partition", a.partition},
                         {"n_probes", a.n_probes},
                         {"seed", a.seed},
                         {"decomposable_below", kDecomposableBelow}};
    run.finish(config, a.seed);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "structkan: structurally informed nested-function networks.\n"
      "Configuration resolves in layers: built-in defaults, then --config file\n"
      "values, then explicit flags (last one wins). All file outputs go under\n"
      "the --out directory; STRUCTKAN_THREADS caps worker threads (0 = auto)."};
  app.require_subcommand(1);

  ValidateArgs validate_args;
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "Check a topology file and print the result");
  validate_cmd->add_option("--topology", validate_args.topology_path, "Topology JSON file")
      ->required();

  AnalyzeArgs analyze_args;
  CLI::App* analyze_cmd = app.add_subcommand(
      "analyze", "Representability analysis: counting scan and smoothness verdict");
  analyze_cmd->add_option("--topology", analyze_args.topology_path, "Topology JSON file")
      ->required();
  analyze_cmd->add_option("--out", analyze_args.out_dir, "Output directory")->required();
  analyze_cmd->add_option("--max-p", analyze_args.max_p,
                          "Largest derivative order in the counting scan (default 30)");
  analyze_args.o_n =
      analyze_cmd->add_option("--n", analyze_args.n, "Input dimension override for the analysis");
  analyze_args.o_k = analyze_cmd->add_option(
      "--k", analyze_args.k, "Target smoothness order: non-negative integer or 'inf'");
  analyze_args.o_k_prime = analyze_cmd->add_option(
      "--k-prime", analyze_args.k_prime, "Node smoothness order: non-negative integer or 'inf'");
  analyze_args.o_n_prime =
      analyze_cmd->add_option("--n-prime", analyze_args.n_prime, "Node input dimension");

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "Train one network on one target expression");
  train_cmd->add_option("--topology", train_args.topology_path, "Topology JSON file")->required();
  train_cmd->add_option("--target", train_args.target, "Target expression over the variables")
      ->required();
  train_cmd->add_option("--variables", train_args.variables,
                        "Comma-separated input names in input-index order (default x1,x2,...)");
  train_cmd->add_option("--out", train_args.out_dir, "Output directory")->required();
  add_config_flags(train_cmd, train_args.config, true);

  CLI::App* experiment_cmd = app.add_subcommand("experiment", "Canned experiment runs");
  experiment_cmd->require_subcommand(1);
  Fig1Args fig1_args;
  CLI::App* fig1_cmd = experiment_cmd->add_subcommand(
      "fig1", "Train the two-block network on matched and mismatched targets");
  fig1_cmd->add_option("--out", fig1_args.out_dir, "Output directory")->required();
  add_config_flags(fig1_cmd, fig1_args.config, false);

  DecomposeArgs decompose_args;
  CLI::App* decompose_cmd = app.add_subcommand(
      "decompose",
      "Gradient-direction decomposability score; verdict 'decomposable' below 1e-6");
  decompose_cmd->add_option("--expr", decompose_args.expr, "Expression to test")->required();
  decompose_cmd
      ->add_option("--partition", decompose_args.partition,
                   "Two variable blocks, e.g. \"x1,x2|y1,y2\"; order defines input indices")
      ->required();
  decompose_cmd->add_option("--n-probes", decompose_args.n_probes,
                            "Probe count per block (also the samples per probe, default 256)");
  decompose_cmd->add_option("--seed", decompose_args.seed, "Base seed for probe sampling");
  decompose_cmd->add_option("--out", decompose_args.out_dir,
                            "Optional output directory for result.json and the manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    thread_cap();  // surfaces a malformed STRUCTKAN_THREADS before any work
    if (validate_cmd->parsed()) return cmd_validate(validate_args);
    if (analyze_cmd->parsed()) return cmd_analyze(analyze_args);
    if (train_cmd->parsed()) return cmd_train(train_args);
    if (experiment_cmd->parsed()) return cmd_fig1(fig1_args);
    if (decompose_cmd->parsed()) return cmd_decompose(decompose_args);
    std::fprintf(stderr, "error: no subcommand selected\n");
    return 2;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const divergence_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (...) {
    std::fprintf(stderr, "error: unknown failure\n");
    return 3;
  }
}
