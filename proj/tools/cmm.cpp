// cmm: simulate, fit, sweep, evaluate and replicate Markov-chain mixtures.

#include "cmm/em.hpp"
#include "cmm/eval.hpp"
#include "cmm/parallel.hpp"
#include "cmm/serialize.hpp"
#include "cmm/simulate.hpp"
#include "cmm/study.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace cmm;

namespace {

constexpr int kExitFitFailure = 2;
constexpr int kExitInputError = 3;

struct EmFlags {
  std::string data;
  std::string kind;
  std::optional<int> states;
  bool collapse = false;
  bool ignore_labels = false;
  std::optional<std::uint64_t> seed;
  EmConfig config;
  std::string out;
};

void add_em_flags(CLI::App& cmd, EmFlags& f) {
  cmd.add_option("--starts", f.config.num_starts, "random starts for emEM")->capture_default_str();
  cmd.add_option("--short-iters", f.config.short_iters, "EM iterations per short run")->capture_default_str();
  cmd.add_option("--epsilon", f.config.epsilon, "Aitken stopping tolerance")->capture_default_str();
  cmd.add_option("--max-iters", f.config.max_iters, "iteration cap for the full run")->capture_default_str();
  cmd.add_option("--floor", f.config.floor, "lower bound for every parameter")->capture_default_str();
  cmd.add_option("--threads", f.config.threads, "worker threads")->capture_default_str();
}

void add_data_flags(CLI::App& cmd, EmFlags& f) {
  cmd.add_option("--data", f.data, "sequence file")->required();
  cmd.add_option("--kind", f.kind, "cm, dm or dwm")->required();
  cmd.add_option("--states", f.states, "number of states J (default: largest seen)");
  cmd.add_flag("--collapse", f.collapse, "merge repeated states before CM/DM fitting");
  cmd.add_flag("--ignore-labels", f.ignore_labels, "treat every sequence as unlabelled");
  cmd.add_option("--seed", f.seed, "random seed");
  add_em_flags(cmd, f);
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  std::random_device rd;
  const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) | rd();
  std::cerr << "seed: " << s << '\n';
  return s;
}

std::pair<int, int> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const int g = std::stoi(text);
      return {g, g};
    }
    return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
  } catch (const std::exception&) {
    throw InputError("invalid group range '" + text + "' (use G or A..B)");
  }
}

Dataset load_for_kind(const EmFlags& f, ModelKind kind) {
  ParseOptions opts;
  opts.format = kind == ModelKind::CM ? SequenceFormat::SequencesWithTimes
                                      : SequenceFormat::SequencesOnly;
  opts.read_labels = !f.ignore_labels;
  opts.num_states = f.states;
  Dataset data = parse_dataset(fs::path(f.data), opts);
  if (f.collapse) {
    if (kind == ModelKind::DWM)
      std::cerr << "note: --collapse is ignored for DWM\n";
    else
      data = collapse_repeats(data);
  }
  return data;
}

void print_fit_summary(std::ostream& out, const FitResult& f, std::size_t n) {
  out << to_string(f.kind) << " G=" << f.num_groups << "  N=" << n
      << "  loglik=" << format_double(f.log_likelihood()) << "  p=" << f.num_parameters
      << "  BIC=" << format_double(f.bic) << "  iterations=" << f.iterations
      << (f.converged ? " (converged)" : " (iteration cap)") << "  start=" << f.chosen_start
      << '\n';
  out << "weights:";
  std::visit([&](const auto& m) { for (Eigen::Index g = 0; g < m.weights.size(); ++g) out << ' ' << m.weights[g]; },
             f.model);
  out << '\n';
  if (const auto* cm = std::get_if<ContinuousMixtureModel>(&f.model)) {
    out << "mean holding time per state:\n";
    for (int g = 0; g < cm->num_groups(); ++g) {
      out << "  group " << g + 1 << ':';
      for (int j = 0; j < cm->num_states(); ++j)
        out << ' ' << expected_holding_time(cm->generators[static_cast<std::size_t>(g)], j);
      out << '\n';
    }
  }
  if (f.monotonicity.decreases_at_floor + f.monotonicity.decreases_unexplained > 0)
    std::cerr << "log-likelihood decreased " << f.monotonicity.decreases_at_floor
              << " time(s) with the floor binding and " << f.monotonicity.decreases_unexplained
              << " time(s) otherwise\n";
}

void compare_printed_update(const FitResult& f, const DatasetStats& stats) {
  const auto* cm = std::get_if<ContinuousMixtureModel>(&f.model);
  if (!cm) {
    std::cerr << "note: --compare-printed-update only applies to CM fits\n";
    return;
  }
  std::cout << "generator updates from the final responsibilities (closed form vs printed ratio):\n";
  for (int g = 0; g < cm->num_groups(); ++g) {
    const auto agg = aggregate_for_group(stats, f.responsibilities, g);
    MStepReport rep;
    const Matrix closed = generator_update(agg, kDefaultFloor, rep).rates();
    const Matrix printed = printed_ratio_generator_update(agg);
    std::cout << "  group " << g + 1 << " max |difference| = "
              << (closed - printed).cwiseAbs().maxCoeff() << '\n';
  }
}

int cmd_fit(const EmFlags& f, int groups, bool compare) {
  EmConfig config = f.config;
  config.kind = parse_model_kind(f.kind);
  config.seed = resolve_seed(f.seed);
  const Dataset data = load_for_kind(f, config.kind);
  const DatasetStats stats = summarize(data);
  const FitResult result = fit(stats, groups, config);
  write_text(f.out, dump(fit_to_json(result)));
  print_fit_summary(std::cout, result, data.size());
  if (compare) compare_printed_update(result, stats);
  return 0;
}

int cmd_sweep(const EmFlags& f, const std::string& range) {
  EmConfig config = f.config;
  config.kind = parse_model_kind(f.kind);
  std::tie(config.g_min, config.g_max) = parse_range(range);
  config.seed = resolve_seed(f.seed);
  const Dataset data = load_for_kind(f, config.kind);
  const SweepResult result = sweep(summarize(data), config);
  write_text(f.out, dump(sweep_to_json(result)));
  BicTable table{config.g_min, {{std::string(to_string(config.kind)), {}}}};
  for (const auto& e : result.entries) {
    table.rows.front().values.push_back(e.fit ? std::optional<double>(e.fit->bic) : std::nullopt);
    if (!e.fit) std::cerr << "G=" << e.groups << " failed: " << e.failure << '\n';
  }
  std::cout << table.to_text();
  print_fit_summary(std::cout, result.best_fit(), data.size());
  return 0;
}

struct SimFlags {
  std::string scenario;
  int replicates = 0;
  std::optional<std::uint64_t> seed;
  std::optional<int> sequences, min_length, max_length;
  std::optional<double> labelled_fraction;
  std::string model;
  std::string out = ".";
  int threads = 1;
};

std::string replicate_name(const ScenarioSpec& spec, int r) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "_r%03d", r + 1);
  return std::string(to_string(spec.kind)) + buf;
}

int cmd_simulate(const SimFlags& f) {
  ScenarioSpec spec = default_spec(parse_scenario(f.scenario));
  if (f.replicates > 0) spec.replicates = f.replicates;
  spec.seed = resolve_seed(f.seed);
  if (f.sequences) spec.num_sequences = *f.sequences;
  if (f.min_length) spec.min_length = *f.min_length;
  if (f.max_length) spec.max_length = *f.max_length;
  if (f.labelled_fraction) spec.labelled_fraction = *f.labelled_fraction;
  if (spec.kind == Scenario::Custom) {
    if (f.model.empty()) throw InputError("the custom scenario needs --model");
    auto model = model_from_json(read_json(f.model));
    auto* cm = std::get_if<ContinuousMixtureModel>(&model);
    if (!cm) throw InputError("--model must hold a continuous model");
    spec.custom_model = *cm;
  }
  validate(spec);
  fs::create_directories(f.out);
  const auto reps = generate_scenario(spec, f.threads);

  Json manifest;
  manifest["format"] = "cmm-simulation";
  manifest["version"] = kFormatVersion;
  manifest["scenario"] = to_string(spec.kind);
  manifest["seed"] = spec.seed;
  manifest["constants_version"] = scenario_constants().version;
  manifest["num_sequences"] = spec.num_sequences;
  manifest["length_range"] = {spec.min_length, spec.max_length};
  manifest["labelled_fraction"] = spec.labelled_fraction;
  manifest["replicates"] = spec.replicates;
  Json files = Json::array();
  for (std::size_t r = 0; r < reps.size(); ++r) {
    const auto& rep = reps[r];
    const std::string base = replicate_name(spec, static_cast<int>(r));
    write_dataset(fs::path(f.out) / (base + ".txt"), rep.data);
    std::ostringstream truth;
    truth << (rep.raw ? "sequence,group,stream_group\n" : "sequence,group\n");
    for (std::size_t i = 0; i < rep.truth.size(); ++i) {
      truth << i + 1 << ',' << rep.truth[i] + 1;
      if (rep.raw) truth << ',' << rep.stream_group[i] + 1;
      truth << '\n';
    }
    write_text(fs::path(f.out) / (base + ".truth.csv"), truth.str());
    Json entry{{"data", base + ".txt"}, {"truth", base + ".truth.csv"}};
    if (rep.raw) {
      write_dataset(fs::path(f.out) / (base + ".raw.txt"), *rep.raw);
      entry["raw"] = base + ".raw.txt";
    }
    files.push_back(std::move(entry));
  }
  manifest["files"] = std::move(files);
  write_text(fs::path(f.out) / "manifest.json", dump(manifest));
  std::cout << "wrote " << reps.size() << " replicate(s) of " << to_string(spec.kind) << " to "
            << f.out << '\n';
  return 0;
}

std::vector<int> read_truth(const fs::path& path, bool stream_group) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<int> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    const std::size_t col = stream_group ? 2 : 1;
    if (cells.size() <= col) throw InputError(path.string() + ": missing column");
    out.push_back(std::stoi(cells[col]) - 1);
  }
  return out;
}

int cmd_evaluate(const std::string& fit_path, const std::string& truth_path,
                 const std::string& data_path, bool include_labelled, bool stream_group) {
  const Json doc = read_json(fit_path);
  std::vector<int> assigned = assignments_from_json(doc);
  for (auto& a : assigned) --a;
  const std::vector<int> truth = read_truth(truth_path, stream_group);
  double ari = 0.0;
  if (!data_path.empty()) {
    const Dataset data = parse_dataset(fs::path(data_path));
    ari = evaluate_assignments(data, truth, assigned, include_labelled);
  } else {
    ari = adjusted_rand_index(truth, assigned);
  }
  std::cout << "ARI " << ari << '\n';
  return 0;
}

struct ReplicateFlags {
  std::string study;
  int replicates = 0;
  std::optional<std::uint64_t> seed;
  std::string scale = "large";
  std::optional<int> sequences;
  bool include_labelled = false;
  EmFlags em;
  std::string groups = "1..5";
  std::string out;
};

int cmd_replicate(ReplicateFlags& f) {
  StudyOptions o;
  o.study = parse_study(f.study);
  if (f.scale != "large" && f.scale != "small") throw InputError("--scale must be small or large");
  o.large = f.scale == "large";
  o.replicates = f.replicates > 0 ? f.replicates : (o.study == Study::Msnbc ? 1 : 100);
  o.seed = resolve_seed(f.seed);
  o.em = f.em.config;
  std::tie(o.em.g_min, o.em.g_max) = parse_range(f.groups);
  o.num_sequences = f.sequences;
  o.ari_include_labelled = f.include_labelled;
  o.threads = f.em.config.threads;
  const StudyReport report = run_study(o);

  const fs::path dir = f.out.empty() ? fs::path("replicate_" + f.study) : fs::path(f.out);
  fs::create_directories(dir);
  write_text(dir / "table.txt", report.table_text);
  write_text(dir / "table.csv", report.table_csv);
  write_text(dir / "ari.csv", report.ari_csv);
  Json manifest;
  manifest["format"] = "cmm-replicate";
  manifest["version"] = kFormatVersion;
  manifest["study"] = f.study;
  manifest["scale"] = f.scale;
  manifest["replicates"] = o.replicates;
  manifest["seed"] = o.seed;
  manifest["constants_version"] = scenario_constants().version;
  manifest["groups"] = {o.em.g_min, o.em.g_max};
  manifest["starts"] = o.em.num_starts;
  manifest["short_iters"] = o.em.short_iters;
  manifest["epsilon"] = o.em.epsilon;
  manifest["max_iters"] = o.em.max_iters;
  manifest["floor"] = o.em.floor;
  if (o.num_sequences) manifest["num_sequences"] = *o.num_sequences;
  write_text(dir / "manifest.json", dump(manifest));
  std::cout << report.table_text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixtures of discrete- and continuous-time Markov chains for clickstreams"};
  app.require_subcommand(1);
  const int threads = default_thread_count();

  SimFlags sim;
  sim.threads = threads;
  auto* simulate = app.add_subcommand("simulate", "generate scenario datasets");
  simulate->add_option("--scenario", sim.scenario,
                       "sim1-small|sim1-large|sim2-small|sim2-large|sim3|sim3-small|"
                       "sim3-large|msnbc-augment|custom")->required();
  simulate->add_option("--replicates", sim.replicates, "number of datasets");
  simulate->add_option("--seed", sim.seed, "random seed");
  simulate->add_option("--sequences", sim.sequences, "sequences per dataset");
  simulate->add_option("--min-length", sim.min_length);
  simulate->add_option("--max-length", sim.max_length);
  simulate->add_option("--labelled-fraction", sim.labelled_fraction);
  simulate->add_option("--model", sim.model, "continuous model JSON for the custom scenario");
  simulate->add_option("--out", sim.out, "output directory")->capture_default_str();
  simulate->add_option("--threads", sim.threads)->capture_default_str();

  EmFlags fit_flags;
  fit_flags.config.threads = threads;
  fit_flags.out = "fit.json";
  int fit_groups = 2;
  bool compare = false;
  auto* fit_cmd = app.add_subcommand("fit", "fit one mixture");
  add_data_flags(*fit_cmd, fit_flags);
  fit_cmd->add_option("--groups", fit_groups, "number of groups G")->capture_default_str();
  fit_cmd->add_option("--out", fit_flags.out, "result file")->capture_default_str();
  fit_cmd->add_flag("--compare-printed-update", compare,
                    "also evaluate the printed-ratio generator update");

  EmFlags sweep_flags;
  sweep_flags.config.threads = threads;
  sweep_flags.out = "sweep.json";
  std::string sweep_range = "1..5";
  auto* sweep_cmd = app.add_subcommand("sweep", "fit a range of G and select by BIC");
  add_data_flags(*sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--groups", sweep_range, "range A..B")->capture_default_str();
  sweep_cmd->add_option("--out", sweep_flags.out, "result file")->capture_default_str();

  std::string eval_fit, eval_truth, eval_data;
  bool eval_all = false, eval_stream = false;
  auto* evaluate = app.add_subcommand("evaluate", "ARI of a fit against a truth file");
  evaluate->add_option("--fit", eval_fit, "fit or sweep result")->required();
  evaluate->add_option("--truth", eval_truth, "truth sidecar")->required();
  evaluate->add_option("--data", eval_data, "dataset, to exclude labelled sequences");
  evaluate->add_flag("--include-labelled", eval_all);
  evaluate->add_flag("--stream-group", eval_stream, "score against the stream_group column");

  ReplicateFlags rep;
  rep.em.config.threads = threads;
  auto* replicate = app.add_subcommand("replicate", "run a simulation study end to end");
  replicate->add_option("study", rep.study, "sim1|sim2|sim3|msnbc")->required();
  replicate->add_option("--replicates", rep.replicates);
  replicate->add_option("--seed", rep.seed);
  replicate->add_option("--scale", rep.scale, "small or large")->capture_default_str();
  replicate->add_option("--sequences", rep.sequences);
  replicate->add_option("--groups", rep.groups)->capture_default_str();
  replicate->add_flag("--include-labelled", rep.include_labelled);
  replicate->add_option("--out", rep.out, "output directory (default replicate_<study>)");
  add_em_flags(*replicate, rep.em);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*fit_cmd) return cmd_fit(fit_flags, fit_groups, compare);
    if (*sweep_cmd) return cmd_sweep(sweep_flags, sweep_range);
    if (*evaluate) return cmd_evaluate(eval_fit, eval_truth, eval_data, eval_all, eval_stream);
    if (*replicate) return cmd_replicate(rep);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const FitFailure& e) {
    std::cerr << "fit failed: " << e.what() << '\n';
    return kExitFitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return 0;
}
