#include "cmm/study.hpp"
#include "cmm/parallel.hpp"

#include <sstream>

namespace cmm {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::size_t replicate, ModelKind kind) {
  Rng rng = make_stream(seed, {replicate, static_cast<std::uint64_t>(kind) + 1});
  return rng();
}

EmConfig config_for(const StudyOptions& o, std::size_t replicate, ModelKind kind) {
  EmConfig c = o.em;
  c.kind = kind;
  c.threads = 1;
  c.seed = derive_seed(o.seed, replicate, kind);
  return c;
}

ScenarioSpec scenario_for(const StudyOptions& o) {
  Scenario kind = Scenario::MsnbcAugment;
  switch (o.study) {
    case Study::Sim1: kind = o.large ? Scenario::Sim1Large : Scenario::Sim1Small; break;
    case Study::Sim2: kind = o.large ? Scenario::Sim2Large : Scenario::Sim2Small; break;
    case Study::Sim3: kind = o.large ? Scenario::Sim3Large : Scenario::Sim3Small; break;
    case Study::Msnbc: break;
  }
  ScenarioSpec spec = default_spec(kind);
  spec.replicates = o.replicates;
  spec.seed = o.seed;
  if (o.num_sequences) spec.num_sequences = *o.num_sequences;
  return spec;
}

struct KindOutcome {
  ReplicateOutcome outcome;
  MonotonicityLog log;
  std::optional<BicRow> bic;
};

BicRow bic_row(ModelKind kind, const SweepResult& s) {
  BicRow row{std::string(to_string(kind)), {}};
  for (const auto& e : s.entries)
    row.values.push_back(e.fit ? std::optional<double>(e.fit->bic) : std::nullopt);
  return row;
}

KindOutcome sweep_and_score(const DatasetStats& stats, const EmConfig& config,
                            std::span<const int> truth, const Dataset& data,
                            bool include_labelled) {
  const SweepResult s = sweep(stats, config);
  KindOutcome k;
  for (const auto& e : s.entries)
    if (e.fit) k.log.merge(e.fit->monotonicity);
  const auto& best = s.best_fit();
  k.outcome.selected_groups = best.num_groups;
  k.outcome.ari = evaluate_assignments(data, truth, classify(best.responsibilities), include_labelled);
  k.bic = bic_row(config.kind, s);
  return k;
}

std::string kind_label(ModelKind kind) {
  switch (kind) {
    case ModelKind::CM: return "Continuous";
    case ModelKind::DM: return "Discrete";
    case ModelKind::DWM: return "DiscreteRep";
  }
  return "?";
}

}  // namespace

std::string_view to_string(Study s) {
  switch (s) {
    case Study::Sim1: return "sim1";
    case Study::Sim2: return "sim2";
    case Study::Sim3: return "sim3";
    case Study::Msnbc: return "msnbc";
  }
  return "?";
}

Study parse_study(std::string_view name) {
  for (auto s : {Study::Sim1, Study::Sim2, Study::Sim3, Study::Msnbc})
    if (to_string(s) == name) return s;
  throw InputError("unknown study '" + std::string(name) + "'");
}

double evaluate_assignments(const Dataset& data, std::span<const int> truth,
                            std::span<const int> assigned, bool include_labelled) {
  if (truth.size() != data.size() || assigned.size() != data.size())
    throw InputError("assignments do not match the dataset size");
  std::vector<int> a, b;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!include_labelled && data.sequences[i].label) continue;
    a.push_back(truth[i]);
    b.push_back(assigned[i]);
  }
  return adjusted_rand_index(a, b);
}

StudyReport run_study(const StudyOptions& options) {
  validate(options.em);
  const ScenarioSpec spec = scenario_for(options);
  validate(spec);

  std::vector<ModelKind> kinds = {ModelKind::CM, ModelKind::DM};
  if (options.study == Study::Msnbc) kinds = {ModelKind::DWM, ModelKind::DM, ModelKind::CM};

  const auto reps = static_cast<std::size_t>(options.replicates);
  std::vector<std::vector<KindOutcome>> results(reps);

  parallel_for(reps, options.threads, [&](std::size_t r) {
    const SimulatedReplicate rep = generate_replicate(spec, static_cast<int>(r));
    auto& row = results[r];
    for (ModelKind kind : kinds) {
      EmConfig config = config_for(options, r, kind);
      Dataset data = rep.data;
      std::vector<int> truth = rep.truth;
      if (options.study == Study::Msnbc) {
        if (kind != ModelKind::CM) {
          data = strip_times(kind == ModelKind::DWM ? *rep.raw : rep.data);
          truth = rep.stream_group;
        }
      } else if (kind != ModelKind::CM) {
        data = strip_times(data);
      }
      const DatasetStats stats = summarize(data);

      if (options.study == Study::Sim3) {
        // Semi-supervised: one fit with as many groups as known classes.
        const int classes = data.max_label() + 1;
        const FitResult f = fit(stats, classes, config);
        KindOutcome k;
        k.log = f.monotonicity;
        k.outcome.selected_groups = f.num_groups;
        k.outcome.ari = evaluate_assignments(data, truth, classify(f.responsibilities),
                                             options.ari_include_labelled);
        row.push_back(std::move(k));
      } else {
        row.push_back(sweep_and_score(stats, config, truth, data, true));
      }
    }
  });

  StudyReport report;
  const bool semi = options.study == Study::Sim3;
  const int g_min = semi ? results.front().front().outcome.selected_groups : options.em.g_min;
  const int g_max = semi ? g_min : options.em.g_max;
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    std::vector<ReplicateOutcome> outcomes;
    for (const auto& row : results) {
      outcomes.push_back(row[k].outcome);
      report.monotonicity.merge(row[k].log);
    }
    report.summaries.push_back(selection_table(kind_label(kinds[k]), outcomes, g_min, g_max));
  }

  std::ostringstream title;
  title << to_string(options.study) << " (" << to_string(spec.kind) << ", N="
        << spec.num_sequences << ", L " << spec.min_length << ".." << spec.max_length
        << ", " << reps << " replicates, seed " << options.seed << ")";
  report.title = title.str();

  std::ostringstream text;
  text << format_selection_table(report.title, report.summaries);
  if (semi) {
    text << "median ARI on " << (options.ari_include_labelled ? "all" : "unlabelled")
         << " sequences:";
    for (const auto& s : report.summaries) text << ' ' << s.model << '=' << median(s.ari);
    text << '\n';
  }
  if (options.study == Study::Msnbc) {
    for (std::size_t r = 0; r < reps; ++r) {
      BicTable table{options.em.g_min, {}};
      for (const auto& k : results[r]) table.rows.push_back(*k.bic);
      text << "BIC, replicate " << r + 1 << ":\n" << table.to_text();
      if (r == 0) {
        report.bic = table;
        report.table_csv = table.to_csv();
      }
    }
  }
  text << "monotonicity: " << report.monotonicity.iterations << " EM iterations, "
       << report.monotonicity.decreases_at_floor << " decreases with the floor binding, "
       << report.monotonicity.decreases_unexplained << " other decreases\n";
  report.table_text = text.str();
  if (report.table_csv.empty()) report.table_csv = selection_table_csv(report.summaries);
  report.ari_csv = ari_plot_csv(to_string(options.study), report.summaries);
  return report;
}

}  // namespace cmm
