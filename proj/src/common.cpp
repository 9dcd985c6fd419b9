#include "cmm/common.hpp"
#include "cmm/parallel.hpp"

#include <cstdlib>
#include <string>

namespace cmm {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::CM: return "CM";
    case ModelKind::DM: return "DM";
    case ModelKind::DWM: return "DWM";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view text) {
  std::string lower(text);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "cm") return ModelKind::CM;
  if (lower == "dm") return ModelKind::DM;
  if (lower == "dwm") return ModelKind::DWM;
  throw InputError("unknown model kind '" + std::string(text) + "' (expected cm, dm or dwm)");
}

int default_thread_count() {
  if (const char* env = std::getenv("CMM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace cmm
