// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Usage: acceptance <path to cmm binary> <scratch directory>

#include "cmm/em.hpp"
#include "cmm/eval.hpp"
#include "cmm/parallel.hpp"
#include "cmm/simulate.hpp"
#include "cmm/study.hpp"
#include "generators.hpp"
#include "oracles.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace cmm;
using oracle::Real;

namespace {

constexpr std::uint64_t kSeed = 1;
constexpr int kReplicates = 25;

struct Verdict {
  bool pass = false;
  std::string detail;
};

MonotonicityLog g_monotonicity;

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

StudyReport study(Study which) {
  StudyOptions o;
  o.study = which;
  o.large = true;
  o.replicates = which == Study::Msnbc ? 1 : kReplicates;
  o.seed = kSeed;
  o.threads = default_thread_count();
  auto report = run_study(o);
  g_monotonicity.merge(report.monotonicity);
  return report;
}

const EvalSummary& row(const StudyReport& r, const std::string& model) {
  for (const auto& s : r.summaries)
    if (s.model == model) return s;
  throw std::runtime_error("missing row " + model);
}

std::string histogram(const EvalSummary& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.histogram.size(); ++i)
    out += (i ? " " : "") + std::to_string(s.histogram[i]);
  return out + "]";
}

Verdict simulation1() {
  auto r = study(Study::Sim1);
  const auto& cm = row(r, "Continuous");
  const auto& dm = row(r, "Discrete");
  const bool pass = cm.count(2) >= 21 && cm.mean_ari >= 0.95 && dm.count(2) >= 21 &&
                    dm.mean_ari >= 0.95;
  return {pass, "CM G=2 in " + std::to_string(cm.count(2)) + "/25 (need 21), ARI " +
                    fmt(cm.mean_ari) + " (need 0.95); DM G=2 in " + std::to_string(dm.count(2)) +
                    "/25, ARI " + fmt(dm.mean_ari) + " (need 21 and 0.95)"};
}

Verdict simulation2() {
  auto r = study(Study::Sim2);
  const auto& cm = row(r, "Continuous");
  const auto& dm = row(r, "Discrete");
  const int dm_small = dm.count(1) + dm.count(2);
  const bool pass = cm.count(3) >= 19 && cm.mean_ari >= 0.95 && dm_small >= 22 &&
                    dm.mean_ari <= 0.75;
  return {pass, "CM " + histogram(cm) + " G=3 in " + std::to_string(cm.count(3)) +
                    "/25 (need 19), ARI " + fmt(cm.mean_ari) + " (need 0.95); DM " +
                    histogram(dm) + " G<=2 in " + std::to_string(dm_small) +
                    "/25 (need 22), ARI " + fmt(dm.mean_ari) + " (need <= 0.75)"};
}

Verdict simulation3() {
  auto r = study(Study::Sim3);
  const double cm = median(row(r, "Continuous").ari);
  const double dm = median(row(r, "Discrete").ari);
  return {cm >= 0.99 && cm > dm, "median unlabelled ARI CM " + fmt(cm, 4) + " (need 0.99), DM " +
                                     fmt(dm, 4) + " (need CM > DM)"};
}

Verdict msnbc() {
  auto r = study(Study::Msnbc);
  const BicRow* cm = nullptr;
  const BicRow* dwm = nullptr;
  for (const auto& b : r.bic->rows) {
    if (b.model == "CM") cm = &b;
    if (b.model == "DWM") dwm = &b;
  }
  if (!cm || !dwm || !cm->argmax() || !dwm->spread()) return {false, "BIC rows missing"};
  const int best = r.bic->g_min + static_cast<int>(*cm->argmax());
  const double ratio = *cm->spread() / *dwm->spread();
  std::cout << r.bic->to_text();
  return {best == 4 && ratio >= 10.0, "CM BIC max at G=" + std::to_string(best) +
                                          " (need 4); CM/DWM BIC spread " + fmt(*cm->spread(), 1) +
                                          "/" + fmt(*dwm->spread(), 1) + " = " + fmt(ratio, 2) +
                                          " (need 10)"};
}

double relative_error(double got, Real want) {
  const Real diff = std::abs(static_cast<Real>(got) - want);
  const Real scale = std::max(std::abs(static_cast<Real>(got)), std::abs(want));
  return scale == 0 ? 0.0 : static_cast<double>(diff / scale);
}

// Compares one generator row against the numerical maximizer. Off-diagonal
// entries are compared only when the row has outgoing transitions: a row
// seen only as the terminal state determines its total rate, not the split.
double row_error(const GeneratorAggregates& agg, const GeneratorMatrix& q, int j, Real lower) {
  std::vector<Real> n;
  for (Eigen::Index k = 0; k < agg.transitions.cols(); ++k)
    if (k != j) n.push_back(agg.transitions(j, k));
  const auto numeric = oracle::maximize_cll_row(n, agg.terminal[j], agg.time[j], lower);
  Real total = 0;
  for (Real x : numeric) total += x;
  double worst = relative_error(q(j, j), -total);
  if (agg.exits[j] > 0)
    for (int k = 0, m = 0; k < q.num_states(); ++k)
      if (k != j) worst = std::max(worst, relative_error(q(j, k), numeric[m++]));
  return worst;
}

Verdict mstep_oracle() {
  auto rng = make_stream(kSeed, {5});
  double worst_closed = 0, worst_floored = 0;
  int instances = 0, rows = 0;
  for (; instances < 200; ++instances) {
    const int states = gen::uniform_int(rng, 2, 4);
    const int groups = gen::uniform_int(rng, 1, 3);
    auto data = summarize(gen::dataset(rng, gen::uniform_int(rng, 1, 10),
                                       {states, 1, 8, true, false, 0}));
    auto z = gen::responsibilities(rng, data, groups);
    for (int g = 0; g < groups; ++g) {
      auto agg = aggregate_for_group(data, z, g);
      MStepReport report;
      const auto closed = generator_update(agg, 0.0, report);
      const auto floored = generator_update(agg, kDefaultFloor, report);
      for (int j = 0; j < states; ++j) {
        if (agg.exits[j] + agg.terminal[j] < 1e-8) continue;
        ++rows;
        worst_closed = std::max(worst_closed, row_error(agg, closed, j, 0));
        worst_floored = std::max(worst_floored, row_error(agg, floored, j, kDefaultFloor));
      }
    }
  }
  return {worst_closed <= 1e-5 && worst_floored <= 1e-5,
          std::to_string(instances) + " instances, " + std::to_string(rows) +
              " rows; max relative error " + sci(worst_closed) + " unconstrained, " +
              sci(worst_floored) + " with the 1e-6 floor (need 1e-5)"};
}

Verdict monotonicity() {
  const auto& m = g_monotonicity;
  return {m.decreases_unexplained == 0,
          std::to_string(m.iterations) + " EM iterations across criteria 1-4; " +
              std::to_string(m.decreases_at_floor) + " decreases with the floor binding, " +
              std::to_string(m.decreases_unexplained) + " unexplained (need 0); worst relative drop " +
              sci(m.worst_relative_drop)};
}

Verdict estep_stability() {
  auto rng = make_stream(kSeed, {7});
  double worst = 0;
  int engineered = 0, underflowed = 0;
  for (int instance = 0; instance < 50; ++instance) {
    const bool long_paths = instance % 2 == 1;
    const int states = gen::uniform_int(rng, 2, 4);
    const int groups = gen::uniform_int(rng, 2, 3);
    gen::SequenceShape shape{states, long_paths ? 500 : 2, long_paths ? 500 : 10, true, false, 0};
    Dataset d = gen::dataset(rng, gen::uniform_int(rng, 1, 10), shape);
    if (long_paths)
      for (auto& s : d.sequences)
        for (auto& t : s.times) t *= 4.0;
    auto data = summarize(d);
    auto model = std::get<ContinuousMixtureModel>(
        random_initialize(states, groups, ModelKind::CM, rng));
    if (long_paths) {
      ++engineered;
      bool all_zero = true;
      for (std::size_t i = 0; i < data.size(); ++i)
        for (int g = 0; g < groups; ++g)
          all_zero = all_zero && static_cast<double>(oracle::continuous_h(data.stats[i], g, model)) == 0.0;
      underflowed += all_zero;
    }
    const auto z = e_step(data, model).responsibilities;
    const auto direct = oracle::direct_responsibilities(data, model, oracle::continuous_h);
    for (std::size_t i = 0; i < data.size(); ++i)
      for (int g = 0; g < groups; ++g)
        worst = std::max(worst, static_cast<double>(std::abs(
                                    static_cast<Real>(z(g, static_cast<Eigen::Index>(i))) - direct[i][g])));
  }
  return {worst <= 1e-10 && underflowed == engineered,
          "50 instances, max |difference| " + sci(worst) + " (need 1e-10); " +
              std::to_string(underflowed) + "/" + std::to_string(engineered) +
              " L=500 instances underflow every double-precision density to 0"};
}

Verdict unit_invariants() {
  std::vector<std::string> failed;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failed.push_back(what);
  };
  const std::vector<int> a{1, 1, 2, 2};
  expect(adjusted_rand_index(a, a) == 1.0, "ARI identity");
  expect(adjusted_rand_index(a, std::vector<int>{2, 2, 1, 1}) == 1.0, "ARI relabel");
  expect(std::abs(adjusted_rand_index(a, std::vector<int>{1, 2, 1, 2}) + 0.5) < 1e-15, "ARI crossed");
  expect(std::abs(bic(-100, 5, 50) - (-200 - 5 * std::log(50.0))) < 1e-12, "BIC formula");
  expect(std::abs(bic(-100, 5, 50) + 219.560) < 5e-4, "BIC value");
  expect(bic(-7, 0, 9) == -14, "BIC p=0");
  expect(!aitken_should_stop(-210, -205, -203, 0.1), "Aitken continue");
  expect(aitken_should_stop(-210, -205, -203, 10), "Aitken stop");
  expect(aitken_should_stop(-210, -205, -205 + 1e-16, 0.1), "Aitken flat trace");
  expect(free_parameter_count(ModelKind::CM, 2, 5) == 49, "p CM");
  expect(free_parameter_count(ModelKind::DWM, 2, 5) == 49, "p DWM");
  for (auto kind : {ModelKind::CM, ModelKind::DM, ModelKind::DWM})
    expect(free_parameter_count(kind, 1, 1) == 0, "p trivial");
  const auto& sim1 = scenario_constants().sim1;
  const auto p1 = embedded_transition_probs(sim1.generators[0]);
  const auto p2 = embedded_transition_probs(sim1.generators[1]);
  const double row1[] = {0, 0.5, 0.2, 0.2, 0.1};
  const double row4[] = {0.4, 0.4, 0.1, 0, 0.1};
  for (int k = 0; k < 5; ++k) {
    expect(std::abs(p1(0, k) - row1[k]) < 1e-14, "Q1 row 1 embedded");
    expect(std::abs(p2(3, k) - row4[k]) < 1e-14, "Q2 row 4 embedded");
  }
  expect(std::abs(expected_holding_time(sim1.generators[0], 0) - 10.0) < 1e-14, "Q1 holding 1");
  expect(std::abs(expected_holding_time(sim1.generators[0], 1) - 1.0) < 1e-14, "Q1 holding 2");
  for (const auto* model : {&sim1, &scenario_constants().sim2})
    for (const auto& q : model->generators) {
      const auto p = embedded_transition_probs(q);
      for (int j = 0; j < q.num_states(); ++j)
        expect(p(j, j) == 0.0 && std::abs(p.row(j).sum() - 1.0) < 1e-14, "embedded rows");
    }
  std::string detail = failed.empty() ? "ARI, BIC, Aitken, parameter counts, embedded rows of Q1-Q3"
                                      : "failed:";
  for (const auto& f : failed) detail += " " + f;
  return {failed.empty(), detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism(const std::string& cli, const fs::path& work) {
  std::vector<fs::path> dirs{work / "det_a", work / "det_b"};
  for (const auto& d : dirs) {
    fs::remove_all(d);
    const std::string cmd = cli + " replicate sim1 --replicates 2 --seed 7 --out " + d.string() +
                            " >" + (d.string() + ".stdout") + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, "command failed: " + cmd};
  }
  int files = 0;
  bool same = slurp(dirs[0].string() + ".stdout") == slurp(dirs[1].string() + ".stdout");
  for (const auto& entry : fs::directory_iterator(dirs[0])) {
    ++files;
    same = same && slurp(entry.path()) == slurp(dirs[1] / entry.path().filename());
  }
  int other = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(dirs[1])) ++other;
  same = same && files == other && files > 0;
  return {same, std::to_string(files) + " output files and stdout compared byte for byte"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <cmm binary> <scratch directory>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path work = argv[2];
  fs::create_directories(work);

  struct Criterion {
    const char* name;
    std::function<Verdict()> check;
  };
  const std::vector<Criterion> criteria{
      {"simulation 1: both models recover G=2", simulation1},
      {"simulation 2: holding times separate three groups", simulation2},
      {"simulation 3: semi-supervised CM beats DM", simulation3},
      {"msnbc-style augmentation: CM picks G=4, wide BIC spread", msnbc},
      {"generator M-step matches a numerical maximizer", mstep_oracle},
      {"EM monotonicity", monotonicity},
      {"log-domain E-step matches extended precision", estep_stability},
      {"unit invariants", unit_invariants},
      {"replicate output is byte-identical across runs", [&] { return determinism(cli, work); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  [" << i + 1 << "] " << criteria[i].name
              << ": " << v.detail << " (" << fmt(secs, 1) << " s)" << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
