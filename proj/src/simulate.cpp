#include "cmm/simulate.hpp"
#include "cmm/parallel.hpp"
#include "scenario_constants_embedded.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cmm {

namespace {

Matrix matrix_from_json(const nlohmann::json& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(rows.at(0).size());
  Matrix out(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) out(i, j) = rows.at(i).at(j).get<double>();
  return out;
}

Vector vector_from_json(const nlohmann::json& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  return out;
}

// The printed diagonals of some shipped generators disagree with their
// off-diagonal sums, so diagonals are always recomputed.
ContinuousMixtureModel continuous_from_json(const nlohmann::json& doc) {
  ContinuousMixtureModel m;
  m.weights = vector_from_json(doc.at("weights"));
  m.initial_probs = matrix_from_json(doc.at("initial_probs"));
  for (const auto& q : doc.at("generators"))
    m.generators.push_back(GeneratorMatrix::from_off_diagonal(matrix_from_json(q)));
  validate(m);
  return m;
}

ScenarioConstants load_constants() {
  const auto doc = nlohmann::json::parse(kScenarioConstantsJson);
  ScenarioConstants c;
  c.version = doc.at("constants_version").get<int>();
  c.sim1 = continuous_from_json(doc.at("sim1"));
  c.sim2 = continuous_from_json(doc.at("sim2"));
  const auto& msnbc = doc.at("msnbc");
  c.msnbc_categories = msnbc.at("categories").get<std::vector<std::string>>();
  for (const auto& rates : msnbc.at("rate_sets")) c.msnbc_rate_sets.push_back(vector_from_json(rates));
  const auto& streams = msnbc.at("stream_model");
  c.msnbc_streams.variant = DiscreteVariant::DWM;
  c.msnbc_streams.weights = vector_from_json(streams.at("weights"));
  c.msnbc_streams.initial_probs = matrix_from_json(streams.at("initial_probs"));
  for (const auto& t : streams.at("transitions"))
    c.msnbc_streams.transitions.push_back(matrix_from_json(t));
  validate(c.msnbc_streams);
  return c;
}

std::discrete_distribution<int> categorical(const auto& weights) {
  std::vector<double> w(weights.begin(), weights.end());
  return std::discrete_distribution<int>(w.begin(), w.end());
}

std::vector<std::discrete_distribution<int>> row_distributions(const Matrix& m) {
  std::vector<std::discrete_distribution<int>> rows;
  for (Eigen::Index j = 0; j < m.rows(); ++j) {
    Vector r = m.row(j).transpose();
    rows.push_back(categorical(std::span<const double>(r.data(), static_cast<std::size_t>(r.size()))));
  }
  return rows;
}

std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

void add_labels(SimulatedReplicate& rep, double fraction, Rng& rng) {
  const std::size_t n = rep.data.size();
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i = 0; i < count; ++i)
    rep.data.sequences[order[i]].label = rep.truth[order[i]];
}

const ContinuousMixtureModel& generating_model(const ScenarioSpec& spec) {
  switch (spec.kind) {
    case Scenario::Sim1Small:
    case Scenario::Sim1Large:
      return scenario_constants().sim1;
    case Scenario::Custom:
      return *spec.custom_model;
    default:
      return scenario_constants().sim2;
  }
}

}  // namespace

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::Sim1Small: return "sim1-small";
    case Scenario::Sim1Large: return "sim1-large";
    case Scenario::Sim2Small: return "sim2-small";
    case Scenario::Sim2Large: return "sim2-large";
    case Scenario::Sim3Small: return "sim3-small";
    case Scenario::Sim3Large: return "sim3-large";
    case Scenario::MsnbcAugment: return "msnbc-augment";
    case Scenario::Custom: return "custom";
  }
  return "?";
}

Scenario parse_scenario(std::string_view name) {
  if (name == "sim3") return Scenario::Sim3Large;
  for (auto s : {Scenario::Sim1Small, Scenario::Sim1Large, Scenario::Sim2Small,
                 Scenario::Sim2Large, Scenario::Sim3Small, Scenario::Sim3Large,
                 Scenario::MsnbcAugment, Scenario::Custom})
    if (to_string(s) == name) return s;
  throw InputError("unknown scenario '" + std::string(name) + "'");
}

ScenarioSpec default_spec(Scenario kind) {
  ScenarioSpec spec;
  spec.kind = kind;
  spec.replicates = 100;
  switch (kind) {
    case Scenario::Sim1Small:
    case Scenario::Sim2Small:
    case Scenario::Sim3Small:
      spec.num_sequences = 50;
      spec.min_length = 4;
      spec.max_length = 25;
      break;
    case Scenario::MsnbcAugment:
      spec.num_sequences = 3000;
      spec.min_length = 30;
      spec.max_length = 70;
      spec.replicates = 1;
      break;
    default:
      spec.num_sequences = 100;
      spec.min_length = 25;
      spec.max_length = 100;
      break;
  }
  if (kind == Scenario::Sim3Small || kind == Scenario::Sim3Large) spec.labelled_fraction = 0.7;
  return spec;
}

void validate(const ScenarioSpec& spec) {
  if (spec.num_sequences < 1) throw InputError("scenario needs at least one sequence");
  if (spec.min_length < 1 || spec.max_length < spec.min_length)
    throw InputError("invalid sequence length range");
  if (!(spec.labelled_fraction >= 0.0 && spec.labelled_fraction <= 1.0))
    throw InputError("labelled fraction must lie in [0, 1]");
  if (spec.replicates < 1) throw InputError("need at least one replicate");
  if (spec.kind == Scenario::Custom) {
    if (!spec.custom_model) throw InputError("custom scenario needs a generating model");
    validate(*spec.custom_model);
  }
}

const ScenarioConstants& scenario_constants() {
  static const ScenarioConstants constants = load_constants();
  return constants;
}

ClickSequence sample_ctmc_path(const Vector& alpha, const GeneratorMatrix& q,
                               int length, Rng& rng) {
  if (length < 1) throw InputError("path length must be positive");
  auto start = categorical(as_span(alpha));
  auto jumps = row_distributions(embedded_transition_probs(q));
  ClickSequence seq;
  int state = start(rng);
  for (int l = 0; l < length; ++l) {
    seq.states.push_back(state);
    seq.times.push_back(std::exponential_distribution<double>(q.exit_rate(state))(rng));
    if (l + 1 < length) state = jumps[static_cast<std::size_t>(state)](rng);
  }
  return seq;
}

ClickSequence sample_dtmc_path(const Vector& alpha, const Matrix& transitions,
                               int length, Rng& rng, bool allow_repeats) {
  if (length < 1) throw InputError("path length must be positive");
  if (!allow_repeats && transitions.diagonal().any())
    throw InputError("a repeat-free path needs a zero diagonal");
  auto start = categorical(as_span(alpha));
  auto steps = row_distributions(transitions);
  ClickSequence seq;
  int state = start(rng);
  for (int l = 0; l < length; ++l) {
    seq.states.push_back(state);
    if (l + 1 < length) state = steps[static_cast<std::size_t>(state)](rng);
  }
  return seq;
}

AugmentedData augment_with_times(const Dataset& data,
                                 const std::vector<Vector>& rate_sets, Rng& rng) {
  if (rate_sets.empty()) throw InputError("need at least one rate set");
  AugmentedData out{data, {}};
  std::uniform_int_distribution<int> pick(0, static_cast<int>(rate_sets.size()) - 1);
  for (auto& seq : out.data.sequences) {
    const int set = pick(rng);
    const Vector& rates = rate_sets[static_cast<std::size_t>(set)];
    seq.times.clear();
    for (int s : seq.states) {
      if (s >= rates.size())
        throw InputError("state " + std::to_string(s + 1) + " has no rate in rate set " +
                         std::to_string(set + 1));
      seq.times.push_back(std::exponential_distribution<double>(rates[s])(rng));
    }
    out.rate_set.push_back(set);
  }
  return out;
}

AugmentedData augment_with_times(const Dataset& data, int num_rate_sets, Rng& rng) {
  const auto& all = scenario_constants().msnbc_rate_sets;
  if (num_rate_sets < 1 || num_rate_sets > static_cast<int>(all.size()))
    throw InputError("between 1 and " + std::to_string(all.size()) + " rate sets are shipped");
  return augment_with_times(data, std::vector<Vector>(all.begin(), all.begin() + num_rate_sets), rng);
}

SimulatedReplicate generate_replicate(const ScenarioSpec& spec, int replicate) {
  validate(spec);
  Rng rng = make_stream(spec.seed, {static_cast<std::uint64_t>(replicate)});
  std::uniform_int_distribution<int> length(spec.min_length, spec.max_length);
  SimulatedReplicate rep;

  if (spec.kind == Scenario::MsnbcAugment) {
    const auto& c = scenario_constants();
    const auto& streams = c.msnbc_streams;
    auto group = categorical(as_span(streams.weights));
    Dataset raw{{}, streams.num_states()};
    for (int i = 0; i < spec.num_sequences; ++i) {
      const int g = group(rng);
      const Vector alpha = streams.initial_probs.row(g).transpose();
      raw.sequences.push_back(sample_dtmc_path(alpha, streams.transitions[static_cast<std::size_t>(g)],
                                               length(rng), rng, true));
      rep.stream_group.push_back(g);
    }
    auto augmented = augment_with_times(collapse_repeats(raw), c.msnbc_rate_sets, rng);
    rep.data = std::move(augmented.data);
    rep.truth = std::move(augmented.rate_set);
    rep.raw = std::move(raw);
  } else {
    const auto& model = generating_model(spec);
    auto group = categorical(as_span(model.weights));
    rep.data.num_states = model.num_states();
    for (int i = 0; i < spec.num_sequences; ++i) {
      const int g = group(rng);
      const Vector alpha = model.initial_probs.row(g).transpose();
      rep.data.sequences.push_back(sample_ctmc_path(
          alpha, model.generators[static_cast<std::size_t>(g)], length(rng), rng));
      rep.truth.push_back(g);
    }
  }

  if (spec.labelled_fraction > 0.0) {
    Rng label_rng = make_stream(spec.seed, {static_cast<std::uint64_t>(replicate), 1});
    add_labels(rep, spec.labelled_fraction, label_rng);
  }
  return rep;
}

std::vector<SimulatedReplicate> generate_scenario(const ScenarioSpec& spec, int threads) {
  validate(spec);
  std::vector<SimulatedReplicate> out(static_cast<std::size_t>(spec.replicates));
  parallel_for(out.size(), threads, [&](std::size_t r) {
    out[r] = generate_replicate(spec, static_cast<int>(r));
  });
  return out;
}

}  // namespace cmm
