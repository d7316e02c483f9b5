// Criterion 10: every alternative estimator and buffer mode completes a
// 1e4-step run and the runs are distinguishable in their logs. The five
// variants are q-std, bootstrapped, deep-ensemble, td-error-per and
// uniform-her, each applied as a single override on the default configuration.
//
// $UCLAB_C10_DIR may point at finished run directories (<dir>/<variant>);
// each is then validated: config.json carries the override, metrics.csv ends
// with its completion marker, and all five logs differ pairwise. Without the
// variable the five runs are trained here (tens of minutes).

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "acceptance.hpp"
#include "json.hpp"
#include "uclab/config.hpp"
#include "uclab/trainer.hpp"

using namespace uclab;
namespace fs = std::filesystem;

namespace {

struct Variant {
  const char* name;
  const char* override_kv;
  const char* json_key;
  const char* json_value;
};

const Variant kVariants[] = {
    {"q-std", "source=q-std", "source", "q-std"},
    {"bootstrapped", "mode=bootstrapped", "mode", "bootstrapped"},
    {"deep-ensemble", "mode=deep-ensemble", "mode", "deep-ensemble"},
    {"td-error-per", "buffer_mode=td-error-per", "buffer_mode", "td-error-per"},
    {"uniform-her", "buffer_mode=uniform-her", "buffer_mode", "uniform-her"},
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  ACC_REQUIRE_MSG(in.good(), "cannot open %s", p.string().c_str());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_run(const fs::path& dir, const Variant& v) {
  std::ifstream in(dir / "config.json");
  ACC_REQUIRE_MSG(in.good(), "missing %s/config.json", dir.string().c_str());
  const nlohmann::json j = nlohmann::json::parse(in);
  ACC_REQUIRE_MSG(j.at(v.json_key).get<std::string>() == v.json_value,
                  "%s: %s is %s", v.name, v.json_key,
                  j.at(v.json_key).get<std::string>().c_str());
  ACC_REQUIRE(j.at("step_budget").get<long>() == 10000);

  const std::string metrics = slurp(dir / "metrics.csv");
  ACC_REQUIRE_MSG(metrics.find(",done,") != std::string::npos,
                  "%s: no completion marker in metrics.csv", v.name);
  ACC_REQUIRE_MSG(fs::exists(dir / "final.ckpt"), "%s: missing final.ckpt", v.name);
}

}  // namespace

int main() {
  const char* env_dir = std::getenv("UCLAB_C10_DIR");
  fs::path root;
  if (env_dir != nullptr) {
    root = env_dir;
    std::printf("  using finished runs under %s\n", env_dir);
  } else {
    root = fs::temp_directory_path() / "uclab-acceptance-c10";
    fs::create_directories(root);
    std::printf("  UCLAB_C10_DIR not set; training 5 short runs here\n");
    std::fflush(stdout);
  }

  std::vector<std::string> logs;
  for (const Variant& v : kVariants) {
    const fs::path dir = root / v.name;
    if (env_dir == nullptr) {
      RunConfig cfg;
      cfg.step_budget = 10000;
      cfg.out_dir = dir.string();
      apply_override(cfg, v.override_kv);
      cfg.validate();
      std::printf("  running %s...\n", v.name);
      std::fflush(stdout);
      train_run(cfg);
    }
    check_run(dir, v);
    logs.push_back(slurp(dir / "metrics.csv"));
  }

  for (std::size_t a = 0; a < logs.size(); ++a)
    for (std::size_t b = a + 1; b < logs.size(); ++b)
      ACC_REQUIRE_MSG(logs[a] != logs[b], "%s and %s produced identical metrics logs",
                      kVariants[a].name, kVariants[b].name);

  acc_pass(10, "5 variant runs completed 1e4 steps with valid artifacts and pairwise "
               "distinct metrics logs");
  return 0;
}
