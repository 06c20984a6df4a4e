#include "dler/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "dler/checkpoint.hpp"
#include "dler/errors.hpp"

namespace dler {

using nlohmann::json;

std::string to_string(AdvantageMode mode) {
  return mode == AdvantageMode::Grpo ? "grpo" : "batch_norm";
}

AdvantageMode parse_advantage_mode(const std::string& name) {
  if (name == "grpo") return AdvantageMode::Grpo;
  if (name == "batch_norm") return AdvantageMode::BatchNorm;
  throw ConfigError("advantage.mode: unknown mode '" + name + "' (expected grpo or batch_norm)");
}

json to_json(const TrainerConfig& c) {
  json j = {{"batch_size", c.batch_size},
            {"group_size", c.group_size},
            {"eps_low", c.eps_low},
            {"eps_high", c.eps_high},
            {"lr", c.lr},
            {"kl_coef", c.kl_coef},
            {"max_steps", c.max_steps},
            {"penalty", {{"kind", c.penalty.kind}, {"target_length", c.penalty.target_length}}},
            {"dynamic_sampling", c.dynamic_sampling},
            {"max_resample_rounds", c.max_resample_rounds},
            {"seed", c.seed},
            {"mini_batches", c.mini_batches},
            {"checkpoint_every", c.checkpoint_every}};
  if (c.tiers) {
    j["tiers"] = {{"thresholds", c.tiers->thresholds}, {"lengths", c.tiers->lengths}};
  } else {
    j["tiers"] = nullptr;
  }
  return j;
}

json to_json(const ExperimentConfig& c) {
  std::vector<std::string> variants;
  for (Variant v : c.variants) variants.push_back(to_string(v));
  return {{"run_id", c.run_id},
          {"variants", variants},
          {"output_dir", c.output_dir.string()},
          {"trainer", to_json(c.trainer)},
          {"advantage", {{"mode", to_string(c.trainer.advantage_mode)}, {"eps_std", c.trainer.eps_std}}},
          {"tasks",
           {{"difficulty_range", {c.tasks.difficulty_min, c.tasks.difficulty_max}},
            {"prompts_per_level", c.tasks.prompts_per_level},
            {"init_verbosity_bias", c.tasks.init_verbosity_bias}}},
          {"analysis",
           {{"entropy_histogram", c.analysis.entropy_histogram},
            {"entropy_bins", c.analysis.entropy_bins},
            {"clip_stats", c.analysis.clip_stats},
            {"trace_stats", c.analysis.trace_stats},
            {"eval_samples_per_prompt", c.analysis.eval_samples_per_prompt}}}};
}

json default_config_json() { return to_json(ExperimentConfig{}); }

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key.path=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!node->is_object()) throw ConfigError(key + ": '" + parts[i - 1] + "' is not a section");
    if (i + 1 == parts.size()) {
      (*node)[parts[i]] = value;
    } else {
      node = &(*node)[parts[i]];
      if (node->is_null()) *node = json::object();
    }
  }
}

namespace {

/// Walks one JSON object, typing each member and rejecting unknown keys.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "must be an object");
  }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    const json* v = get(key);
    if (v == nullptr) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw ConfigError("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer()) throw ConfigError("expected an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) throw ConfigError("expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v->is_string()) throw ConfigError("expected a string");
      }
      out = v->get<T>();
    } catch (const ConfigError& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.contains(it.key())) {
        throw ConfigError(path_ + "." + it.key() + ": unknown key");
      }
    }
  }

  std::string child(const std::string& key) const { return path_ + "." + key; }

 private:
  std::string where() const { return path_.empty() ? "config: " : path_ + ": "; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

ExperimentConfig parse_experiment_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be a JSON object");
  ExperimentConfig cfg;
  static const std::set<std::string> kRootKeys = {"run_id",  "variant",   "variants",
                                                  "output_dir", "trainer", "advantage",
                                                  "tasks",   "analysis"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!kRootKeys.contains(it.key())) throw ConfigError(it.key() + ": unknown key");
  }

  if (auto it = doc.find("run_id"); it != doc.end()) {
    if (!it->is_string() || it->get<std::string>().empty()) {
      throw ConfigError("run_id: expected a non-empty string");
    }
    cfg.run_id = it->get<std::string>();
  }
  if (auto it = doc.find("output_dir"); it != doc.end()) {
    if (!it->is_string()) throw ConfigError("output_dir: expected a string");
    cfg.output_dir = it->get<std::string>();
  }
  if (auto it = doc.find("variant"); it != doc.end()) {
    if (!it->is_string()) throw ConfigError("variant: expected a string");
    cfg.variants = {parse_variant(it->get<std::string>())};
  }
  if (auto it = doc.find("variants"); it != doc.end() && !it->is_null()) {
    if (!it->is_array() || it->empty()) throw ConfigError("variants: expected a non-empty array");
    cfg.variants.clear();
    for (const auto& v : *it) {
      if (!v.is_string()) throw ConfigError("variants: entries must be strings");
      cfg.variants.push_back(parse_variant(v.get<std::string>()));
    }
  }

  if (auto it = doc.find("trainer"); it != doc.end()) {
    Section t(*it, "trainer");
    TrainerConfig& c = cfg.trainer;
    t.read("batch_size", c.batch_size);
    t.read("group_size", c.group_size);
    t.read("eps_low", c.eps_low);
    t.read("eps_high", c.eps_high);
    t.read("lr", c.lr);
    t.read("kl_coef", c.kl_coef);
    t.read("max_steps", c.max_steps);
    t.read("dynamic_sampling", c.dynamic_sampling);
    t.read("max_resample_rounds", c.max_resample_rounds);
    t.read("seed", c.seed);
    t.read("mini_batches", c.mini_batches);
    t.read("checkpoint_every", c.checkpoint_every);
    if (const json* p = t.get("penalty"); p != nullptr) {
      Section ps(*p, t.child("penalty"));
      ps.read("kind", c.penalty.kind);
      ps.read("target_length", c.penalty.target_length);
      ps.finish();
    }
    if (const json* tiers = t.get("tiers"); tiers != nullptr && !tiers->is_null()) {
      Section ts(*tiers, t.child("tiers"));
      DifficultyTiers dt;
      ts.read("thresholds", dt.thresholds);
      ts.read("lengths", dt.lengths);
      ts.finish();
      c.tiers = dt;
    } else {
      c.tiers.reset();
    }
    t.finish();
  }

  if (auto it = doc.find("advantage"); it != doc.end()) {
    Section a(*it, "advantage");
    std::string mode = to_string(cfg.trainer.advantage_mode);
    a.read("mode", mode);
    cfg.trainer.advantage_mode = parse_advantage_mode(mode);
    a.read("eps_std", cfg.trainer.eps_std);
    a.finish();
  }

  if (auto it = doc.find("tasks"); it != doc.end()) {
    Section t(*it, "tasks");
    std::vector<int> range{cfg.tasks.difficulty_min, cfg.tasks.difficulty_max};
    t.read("difficulty_range", range);
    if (range.size() != 2) throw ConfigError("tasks.difficulty_range: expected [min, max]");
    cfg.tasks.difficulty_min = range[0];
    cfg.tasks.difficulty_max = range[1];
    t.read("prompts_per_level", cfg.tasks.prompts_per_level);
    t.read("init_verbosity_bias", cfg.tasks.init_verbosity_bias);
    t.finish();
  }

  if (auto it = doc.find("analysis"); it != doc.end()) {
    Section a(*it, "analysis");
    a.read("entropy_histogram", cfg.analysis.entropy_histogram);
    a.read("entropy_bins", cfg.analysis.entropy_bins);
    a.read("clip_stats", cfg.analysis.clip_stats);
    a.read("trace_stats", cfg.analysis.trace_stats);
    a.read("eval_samples_per_prompt", cfg.analysis.eval_samples_per_prompt);
    a.finish();
    if (cfg.analysis.entropy_bins < 1) throw ConfigError("analysis.entropy_bins: must be >= 1");
    if (cfg.analysis.eval_samples_per_prompt < 1) {
      throw ConfigError("analysis.eval_samples_per_prompt: must be >= 1");
    }
  }

  validate(cfg.trainer);
  validate(cfg.tasks, Vocab::standard());
  for (Variant v : cfg.variants) apply_variant(cfg.trainer, v);
  return cfg;
}

namespace {

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

/// Line of the first occurrence of the last component of a dotted key.
std::optional<int> line_of_key(const std::string& text, const std::string& message) {
  const auto colon = message.find(':');
  if (colon == std::string::npos) return std::nullopt;
  std::string key = message.substr(0, colon);
  if (const auto dot = key.rfind('.'); dot != std::string::npos) key = key.substr(dot + 1);
  const auto hit = text.find("\"" + key + "\"");
  if (hit == std::string::npos) return std::nullopt;
  return line_of_offset(text, hit);
}

}  // namespace

ExperimentConfig load_experiment_config(const std::filesystem::path& path,
                                        const std::vector<std::string>& overrides,
                                        std::optional<std::uint64_t> env_seed) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  json user;
  try {
    user = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ":" + std::to_string(line_of_offset(text, e.byte)) + ": " +
                      e.what());
  }
  if (!user.is_object()) throw ConfigError(path.string() + ":1: top level must be a JSON object");

  json doc = default_config_json();
  // A lone "variant" key replaces the default list.
  if (user.contains("variant")) doc.erase("variants");
  // Tiers are replaced wholesale rather than merged.
  doc.merge_patch(user);
  if (user.contains("trainer") && user["trainer"].is_object() &&
      user["trainer"].contains("tiers")) {
    doc["trainer"]["tiers"] = user["trainer"]["tiers"];
  }
  const bool seed_given = user.contains("trainer") && user["trainer"].is_object() &&
                          user["trainer"].contains("seed");
  if (!seed_given && env_seed) doc["trainer"]["seed"] = *env_seed;

  try {
    for (const auto& o : overrides) apply_override(doc, o);
    return parse_experiment_config(doc);
  } catch (const ConfigError& e) {
    const auto line = line_of_key(text, e.what());
    throw ConfigError(path.string() + ":" + (line ? std::to_string(*line) + ":" : "") + " " +
                      e.what());
  }
}

json metrics_to_json(const MetricsRecord& r, const std::string& run_id) {
  json j;
  j["run_id"] = run_id;
  j["step"] = r.step;
  j["mean_response_length"] = r.mean_response_length;
  j["mean_accuracy"] = r.mean_accuracy;
  j["mean_token_entropy"] = r.mean_token_entropy;
  j["zero_reward_group_ratio"] = r.zero_reward_group_ratio;
  j["all_one_group_ratio"] = r.all_one_group_ratio;
  j["clip_high_token_fraction"] = r.clip_high_token_fraction;
  j["clip_low_token_fraction"] = r.clip_low_token_fraction;
  j["resample_rounds_used"] = r.resample_rounds_used;
  return j;
}

MetricsRecord metrics_from_json(const json& j) {
  MetricsRecord r;
  r.step = j.at("step").get<int>();
  r.mean_response_length = j.at("mean_response_length").get<double>();
  r.mean_accuracy = j.at("mean_accuracy").get<double>();
  r.mean_token_entropy = j.at("mean_token_entropy").get<double>();
  r.zero_reward_group_ratio = j.at("zero_reward_group_ratio").get<double>();
  r.all_one_group_ratio = j.at("all_one_group_ratio").get<double>();
  r.clip_high_token_fraction = j.at("clip_high_token_fraction").get<double>();
  r.clip_low_token_fraction = j.at("clip_low_token_fraction").get<double>();
  r.resample_rounds_used = j.at("resample_rounds_used").get<int>();
  return r;
}

}  // namespace dler
