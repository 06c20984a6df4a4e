#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "dler/checkpoint.hpp"
#include "dler/config.hpp"
#include "dler/errors.hpp"

using namespace dler;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path dir = fs::temp_directory_path() / "dler_test_config";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  write_file_atomic(p, text);
  return p;
}

std::string config_error(const json& doc) {
  try {
    parse_experiment_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults round-trip through JSON") {
  const json doc = default_config_json();
  const ExperimentConfig cfg = parse_experiment_config(doc);
  CHECK(to_json(cfg) == doc);
  CHECK(cfg.trainer.batch_size == 64);
  CHECK(cfg.trainer.group_size == 8);
  CHECK(cfg.trainer.eps_low == 0.2);
  CHECK(cfg.trainer.eps_high == 0.28);
  CHECK(cfg.trainer.kl_coef == 0.0005);
  CHECK(cfg.trainer.penalty.target_length == 24);
  CHECK(cfg.trainer.max_resample_rounds == 10);
  CHECK(cfg.variants == std::vector<Variant>{Variant::Dler});
}

TEST_CASE("validation names the offending key") {
  json doc = default_config_json();
  doc["trainer"]["eps_high"] = 0.1;
  CHECK(config_error(doc).find("trainer.eps_high: must be >= trainer.eps_low") == 0);

  doc = default_config_json();
  doc["trainer"]["tiers"] = {{"thresholds", {0.7, 0.3}}, {"lengths", {32, 24, 12}}};
  CHECK(config_error(doc) == "trainer.tiers.thresholds: must be strictly ascending");

  doc["trainer"]["tiers"] = {{"thresholds", {0.5}}, {"lengths", {32, 24, 12}}};
  CHECK(config_error(doc) == "trainer.tiers: expected 2 lengths for 1 thresholds, got 3");

  doc = default_config_json();
  doc["trainer"]["bogus"] = 1;
  CHECK(config_error(doc) == "trainer.bogus: unknown key");

  doc = default_config_json();
  doc["trainer"]["batch_size"] = "64";
  CHECK(config_error(doc) == "trainer.batch_size: expected an integer");

  doc = default_config_json();
  doc["variants"] = {"da_dler"};
  CHECK(config_error(doc) == "variant da_dler requires trainer.tiers");

  doc = default_config_json();
  doc["advantage"]["mode"] = "median";
  CHECK_FALSE(config_error(doc).empty());
}

TEST_CASE("dotted overrides") {
  json doc = default_config_json();
  apply_override(doc, "trainer.eps_high=0.3");
  apply_override(doc, "run_id=abc");
  apply_override(doc, "trainer.penalty.target_length=16");
  const auto cfg = parse_experiment_config(doc);
  CHECK(cfg.trainer.eps_high == 0.3);
  CHECK(cfg.run_id == "abc");
  CHECK(cfg.trainer.penalty.target_length == 16);
  CHECK_THROWS_AS(apply_override(doc, "no_equals_sign"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "run_id.x=1"), ConfigError);
}

TEST_CASE("loading reports file and line") {
  const auto p = write_config("bad_value.json",
                              "{\n  \"run_id\": \"x\",\n  \"trainer\": {\n    \"eps_low\": 0.3,\n"
                              "    \"eps_high\": 0.2\n  }\n}\n");
  try {
    load_experiment_config(p);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(p.string() + ":5:") == 0);
  }

  const auto syntax = write_config("syntax.json", "{\n  \"run_id\": \"x\",\n  oops\n}\n");
  try {
    load_experiment_config(syntax);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(syntax.string() + ":3:") == 0);
  }

  CHECK_THROWS_AS(load_experiment_config("/nonexistent/cfg.json"), ConfigError);
}

TEST_CASE("environment seed is only a fallback") {
  const auto no_seed = write_config("no_seed.json", R"({"run_id": "a"})");
  CHECK(load_experiment_config(no_seed, {}, 99).trainer.seed == 99);
  CHECK(load_experiment_config(no_seed).trainer.seed == 7);
  const auto seeded = write_config("seeded.json", R"({"trainer": {"seed": 5}})");
  CHECK(load_experiment_config(seeded, {}, 99).trainer.seed == 5);
  CHECK(load_experiment_config(seeded, {"trainer.seed=6"}, 99).trainer.seed == 6);
}

TEST_CASE("tiers replace rather than merge") {
  const auto p = write_config(
      "tiers.json", R"({"variant": "da_dler", "trainer": {"tiers": {"thresholds": [0.5], "lengths": [24, 12]}}})");
  const auto cfg = load_experiment_config(p);
  REQUIRE(cfg.trainer.tiers.has_value());
  CHECK(cfg.trainer.tiers->lengths == std::vector<int>{24, 12});
  CHECK(cfg.variants == std::vector<Variant>{Variant::DaDler});
}

TEST_CASE("metrics lines round-trip") {
  MetricsRecord m;
  m.step = 3;
  m.mean_response_length = 12.5;
  m.mean_accuracy = 0.75;
  m.mean_token_entropy = 1.25;
  m.zero_reward_group_ratio = 0.125;
  m.all_one_group_ratio = 0.25;
  m.clip_high_token_fraction = 0.01;
  m.resample_rounds_used = 2;
  const json line = metrics_to_json(m, "r");
  CHECK(line["run_id"] == "r");
  CHECK(metrics_from_json(line) == m);
}
