#include "cmm/serialize.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "cmm_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(CMM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

struct Workspace {
  Workspace() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
  ~Workspace() { fs::remove_all(kWork); }
  std::string path(const std::string& name) const { return (kWork / name).string(); }
};

}  // namespace

TEST_CASE("simulate writes datasets, truth files and a manifest deterministically") {
  Workspace w;
  REQUIRE(run("simulate --scenario sim1-small --replicates 2 --seed 7 --out " + w.path("a")) == 0);
  REQUIRE(run("simulate --scenario sim1-small --replicates 2 --seed 7 --out " + w.path("b")) == 0);
  int files = 0;
  for (const auto& entry : fs::directory_iterator(w.path("a"))) {
    ++files;
    CHECK(slurp(entry.path()) == slurp(fs::path(w.path("b")) / entry.path().filename()));
  }
  CHECK(files == 5);
  CHECK(fs::exists(w.path("a/sim1-small_r001.txt")));
  CHECK(fs::exists(w.path("a/sim1-small_r002.truth.csv")));
  auto manifest = cmm::read_json(w.path("a/manifest.json"));
  CHECK(manifest["seed"] == 7);
  CHECK(manifest.contains("constants_version"));
}

TEST_CASE("input errors exit with 3") {
  Workspace w;
  CHECK(run("simulate --scenario nope --out " + w.path("x")) == 3);
  CHECK(run("fit --kind cm") == 3);
  CHECK(run("frobnicate") == 3);

  write(w.path("repeats.txt"), "1,1,2\n2,1,2\n");
  CHECK(run("fit --kind dm --groups 1 --seed 1 --data " + w.path("repeats.txt") +
            " --out " + w.path("f.json")) == 3);
  CHECK(run("fit --kind dm --collapse --groups 1 --seed 1 --data " + w.path("repeats.txt") +
            " --out " + w.path("f.json")) == 0);
  CHECK(run("fit --kind cm --groups 1 --seed 1 --data " + w.path("repeats.txt") +
            " --out " + w.path("f.json")) == 3);
  CHECK(run("fit --kind dwm --groups 1 --seed 1 --data " + w.path("missing.txt")) == 3);
  CHECK(run("sweep --kind dwm --groups 3..1 --seed 1 --data " + w.path("repeats.txt")) == 3);
}

TEST_CASE("fit and sweep produce result documents") {
  Workspace w;
  REQUIRE(run("simulate --scenario sim1-large --replicates 1 --seed 3 --out " + w.path("d")) == 0);
  const auto data = w.path("d/sim1-large_r001.txt");
  REQUIRE(run("fit --kind cm --groups 2 --starts 10 --seed 1 --data " + data + " --out " +
              w.path("fit.json")) == 0);
  auto doc = cmm::read_json(w.path("fit.json"));
  CHECK(doc["format"] == "cmm-fit");
  CHECK(doc["groups"] == 2);
  CHECK(doc["model"]["groups"] == 2);
  CHECK(cmm::assignments_from_json(doc).size() == 100);

  REQUIRE(run("sweep --kind cm --groups 1..3 --starts 10 --seed 1 --data " + data + " --out " +
              w.path("sweep.json")) == 0);
  auto sweep = cmm::read_json(w.path("sweep.json"));
  CHECK(sweep["format"] == "cmm-sweep");
  CHECK(sweep["best"]["groups"] == 2);

  CHECK(run("evaluate --fit " + w.path("fit.json") + " --truth " +
            w.path("d/sim1-large_r001.truth.csv")) == 0);
  CHECK(run("fit --kind dm --groups 2 --starts 4 --seed 1 --data " + data + " --out " +
            w.path("dm.json")) == 0);
}

TEST_CASE("replicate writes tables") {
  Workspace w;
  REQUIRE(run("replicate sim1 --replicates 1 --seed 2 --scale small --out " + w.path("r")) == 0);
  for (const char* name : {"table.txt", "table.csv", "ari.csv", "manifest.json"})
    CHECK(fs::exists(fs::path(w.path("r")) / name));
  CHECK(slurp(w.path("r/table.txt")).find("Continuous") != std::string::npos);
  CHECK(run("replicate sim7 --replicates 1") == 3);
}
