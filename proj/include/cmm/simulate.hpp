#pragma once

#include "cmm/markov_continuous.hpp"
#include "cmm/markov_discrete.hpp"
#include "cmm/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cmm {

enum class Scenario {
  Sim1Small,
  Sim1Large,
  Sim2Small,
  Sim2Large,
  Sim3Small,
  Sim3Large,
  MsnbcAugment,
  Custom,
};

std::string_view to_string(Scenario s);
Scenario parse_scenario(std::string_view name);  // "sim3" means sim3-large

struct ScenarioSpec {
  Scenario kind = Scenario::Sim1Large;
  int num_sequences = 100;
  int min_length = 25;
  int max_length = 100;
  double labelled_fraction = 0.0;
  int replicates = 1;
  std::uint64_t seed = 0;
  std::optional<ContinuousMixtureModel> custom_model;  // required for Custom
};

/// Sizes, lengths and labelled fraction used for each shipped scenario.
ScenarioSpec default_spec(Scenario kind);
void validate(const ScenarioSpec& spec);

/// Shipped scenario parameters, loaded from data/scenario_constants.json
/// (embedded at build time).
struct ScenarioConstants {
  int version = 0;
  ContinuousMixtureModel sim1;
  ContinuousMixtureModel sim2;
  std::vector<std::string> msnbc_categories;
  std::vector<Vector> msnbc_rate_sets;  // exponential rate per state
  DiscreteMixtureModel msnbc_streams;    // repeat-allowing stream model
};

const ScenarioConstants& scenario_constants();

/// Path of exactly `length` visits: start ~ alpha, holding times exponential
/// with rate -q_jj, jumps drawn from the embedded chain.
ClickSequence sample_ctmc_path(const Vector& alpha, const GeneratorMatrix& q,
                               int length, Rng& rng);

/// Discrete-time path. With allow_repeats = false the matrix must have a
/// zero diagonal (InputError otherwise).
ClickSequence sample_dtmc_path(const Vector& alpha, const Matrix& transitions,
                               int length, Rng& rng, bool allow_repeats);

struct AugmentedData {
  Dataset data;
  std::vector<int> rate_set;  // hidden rate-set index per sequence
};

/// Adds an exponential holding time to every visit, each sequence using one
/// rate set drawn uniformly from `rate_sets`.
AugmentedData augment_with_times(const Dataset& data,
                                 const std::vector<Vector>& rate_sets, Rng& rng);
/// Same, with the first `num_rate_sets` shipped MSNBC-style rate sets.
AugmentedData augment_with_times(const Dataset& data, int num_rate_sets, Rng& rng);

struct SimulatedReplicate {
  Dataset data;            // what the scenario's models are fitted to
  std::vector<int> truth;  // generating group (rate set for msnbc-augment)
  // msnbc-augment only: the original repeat-allowing streams and the
  // group of the stream model that produced each of them.
  std::optional<Dataset> raw;
  std::vector<int> stream_group;
};

SimulatedReplicate generate_replicate(const ScenarioSpec& spec, int replicate);
std::vector<SimulatedReplicate> generate_scenario(const ScenarioSpec& spec,
                                                  int threads = 1);

}  // namespace cmm
