#pragma once

#include "cmm/em.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace cmm {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

/// Discrete and continuous models share one schema; only discrete models
/// carry a "variant" field. Generators are stored with their diagonal.
Json model_to_json(const MixtureModel& model);
/// Revalidates every invariant; throws InputError.
MixtureModel model_from_json(const Json& doc);

Json fit_to_json(const FitResult& fit);
Json sweep_to_json(const SweepResult& sweep);

/// One-based MAP assignments stored in a fit or sweep document.
std::vector<int> assignments_from_json(const Json& doc);

std::string dump(const Json& doc);
Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace cmm
