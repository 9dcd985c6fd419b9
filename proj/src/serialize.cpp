#include "cmm/serialize.hpp"

#include <fstream>
#include <sstream>

namespace cmm {

namespace {

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from(const Json& rows, Eigen::Index n, Eigen::Index m) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n)
    throw InputError("matrix has the wrong number of rows");
  Matrix out(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m)
      throw InputError("matrix has the wrong number of columns");
    for (Eigen::Index j = 0; j < m; ++j) out(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return out;
}

void check_header(const Json& doc, std::string_view format) {
  if (!doc.is_object() || doc.value("format", "") != format)
    throw InputError("expected a '" + std::string(format) + "' document");
  if (doc.value("version", 0) != kFormatVersion)
    throw InputError("unsupported " + std::string(format) + " version");
}

Json assignments_json(const Matrix& responsibilities) {
  Json out = Json::array();
  for (int g : classify(responsibilities)) out.push_back(g + 1);
  return out;
}

}  // namespace

Json model_to_json(const MixtureModel& model) {
  Json doc;
  doc["format"] = "cmm-model";
  doc["version"] = kFormatVersion;
  const bool discrete = std::holds_alternative<DiscreteMixtureModel>(model);
  doc["model"] = discrete ? "discrete" : "continuous";
  if (const auto* d = std::get_if<DiscreteMixtureModel>(&model))
    doc["variant"] = d->variant == DiscreteVariant::DM ? "DM" : "DWM";
  doc["groups"] = num_groups(model);
  doc["states"] = num_states(model);
  std::visit(
      [&](const auto& m) {
        doc["weights"] = std::vector<double>(m.weights.data(), m.weights.data() + m.weights.size());
        doc["initial_probs"] = matrix_json(m.initial_probs);
      },
      model);
  Json matrices = Json::array();
  if (const auto* d = std::get_if<DiscreteMixtureModel>(&model))
    for (const auto& t : d->transitions) matrices.push_back(matrix_json(t));
  else
    for (const auto& q : std::get<ContinuousMixtureModel>(model).generators)
      matrices.push_back(matrix_json(q.rates()));
  doc["matrices"] = std::move(matrices);
  return doc;
}

MixtureModel model_from_json(const Json& doc) {
  check_header(doc, "cmm-model");
  try {
    const int groups = doc.at("groups").get<int>();
    const int states = doc.at("states").get<int>();
    if (groups < 1 || states < 1) throw InputError("model needs groups and states");
    const auto w = doc.at("weights").get<std::vector<double>>();
    if (static_cast<int>(w.size()) != groups) throw InputError("weights have the wrong length");
    Vector weights = Eigen::Map<const Vector>(w.data(), groups);
    Matrix initial = matrix_from(doc.at("initial_probs"), groups, states);
    const auto& matrices = doc.at("matrices");
    if (static_cast<int>(matrices.size()) != groups)
      throw InputError("one matrix per group expected");
    const std::string type = doc.at("model").get<std::string>();
    if (type == "continuous") {
      ContinuousMixtureModel m{std::move(weights), std::move(initial), {}};
      for (const auto& q : matrices) m.generators.emplace_back(matrix_from(q, states, states));
      validate(m);
      return m;
    }
    if (type != "discrete") throw InputError("unknown model type '" + type + "'");
    const std::string variant = doc.at("variant").get<std::string>();
    if (variant != "DM" && variant != "DWM") throw InputError("unknown variant '" + variant + "'");
    DiscreteMixtureModel m{std::move(weights), std::move(initial), {},
                           variant == "DM" ? DiscreteVariant::DM : DiscreteVariant::DWM};
    for (const auto& t : matrices) m.transitions.push_back(matrix_from(t, states, states));
    validate(m);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed model document: ") + e.what());
  }
}

Json fit_to_json(const FitResult& fit) {
  Json doc;
  doc["format"] = "cmm-fit";
  doc["version"] = kFormatVersion;
  doc["kind"] = to_string(fit.kind);
  doc["groups"] = fit.num_groups;
  doc["num_sequences"] = fit.responsibilities.cols();
  doc["log_likelihood"] = fit.log_likelihood();
  doc["num_parameters"] = fit.num_parameters;
  doc["bic"] = fit.bic;
  doc["iterations"] = fit.iterations;
  doc["converged"] = fit.converged;
  doc["chosen_start"] = fit.chosen_start;
  doc["failed_starts"] = fit.failed_starts;
  doc["monotonicity"] = {{"iterations", fit.monotonicity.iterations},
                         {"decreases_at_floor", fit.monotonicity.decreases_at_floor},
                         {"decreases_unexplained", fit.monotonicity.decreases_unexplained},
                         {"worst_relative_drop", fit.monotonicity.worst_relative_drop}};
  doc["loglik_trace"] = fit.loglik_trace;
  doc["model"] = model_to_json(fit.model);
  doc["responsibilities"] = matrix_json(fit.responsibilities);
  doc["assignments"] = assignments_json(fit.responsibilities);
  return doc;
}

Json sweep_to_json(const SweepResult& sweep) {
  Json doc;
  doc["format"] = "cmm-sweep";
  doc["version"] = kFormatVersion;
  const auto& best = sweep.best_fit();
  doc["kind"] = to_string(best.kind);
  doc["selected_groups"] = best.num_groups;
  Json table = Json::array();
  for (const auto& e : sweep.entries) {
    Json row;
    row["groups"] = e.groups;
    if (e.fit) {
      row["bic"] = e.fit->bic;
      row["log_likelihood"] = e.fit->log_likelihood();
      row["num_parameters"] = e.fit->num_parameters;
      row["iterations"] = e.fit->iterations;
      row["converged"] = e.fit->converged;
    } else {
      row["failure"] = e.failure;
    }
    table.push_back(std::move(row));
  }
  doc["bic_table"] = std::move(table);
  doc["best"] = fit_to_json(best);
  doc["assignments"] = doc["best"]["assignments"];
  return doc;
}

std::vector<int> assignments_from_json(const Json& doc) {
  if (!doc.contains("assignments")) throw InputError("document carries no assignments");
  return doc.at("assignments").get<std::vector<int>>();
}

std::string dump(const Json& doc) { return doc.dump(1) + "\n"; }

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

}  // namespace cmm
