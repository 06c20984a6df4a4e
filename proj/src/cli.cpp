#include "dler/cli.hpp"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "dler/analysis.hpp"
#include "dler/bias_oracle.hpp"
#include "dler/checkpoint.hpp"
#include "dler/config.hpp"
#include "dler/errors.hpp"
#include "dler/merge.hpp"
#include "dler/tasks.hpp"

namespace dler {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Fixed salt so evaluation streams never coincide with training streams.
constexpr std::uint64_t kEvalSalt = 0x45564C5F53414C54ULL;
// Below this many samples the bias ordering is not worth reporting.
constexpr long kMinOrderingSamples = 10'000;

std::string to_text(const json& j) { return j.dump(2) + "\n"; }

std::string format_double(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::optional<std::uint64_t> seed_from_env() {
  const char* raw = std::getenv("DLER_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (errno != 0 || *end != '\0' || raw[0] == '-') {
    throw ConfigError(std::string("DLER_SEED: not an unsigned integer: '") + raw + "'");
  }
  return v;
}

json evaluation_json(const Evaluation& e) {
  json levels = json::array();
  for (const auto& l : e.levels) {
    levels.push_back({{"difficulty", l.difficulty},
                      {"samples", l.samples},
                      {"accuracy", l.accuracy},
                      {"mean_length", l.mean_length}});
  }
  return {{"samples", e.samples},
          {"accuracy", e.accuracy},
          {"mean_length", e.mean_length},
          {"mean_token_entropy", e.mean_token_entropy},
          {"levels", levels}};
}

json clip_json(const ClipStats& stats) {
  auto one = [](const ClipClassStats& c) {
    json j = {{"count", c.count}};
    if (c.count > 0) {
      j["mean_probability"] = c.mean_probability();
      j["mean_entropy"] = c.mean_entropy();
    }
    return j;
  };
  return {{"total", stats.total()},
          {"unclipped", one(stats[ClipClass::Unclipped])},
          {"clipped_high", one(stats[ClipClass::ClippedHigh])},
          {"clipped_low", one(stats[ClipClass::ClippedLow])}};
}

json totals_json(const TraceTotals& t) {
  return {{"responses", t.responses},
          {"step_count", t.step_count},
          {"token_count", t.token_count},
          {"keyword_count", t.keyword_count},
          {"steps_per_response", t.steps_per_response()},
          {"tokens_per_step", t.tokens_per_step()},
          {"keywords_per_response", t.keywords_per_response()}};
}

json trace_json(const TraceStats& s) {
  return {{"overall", totals_json(s.overall)},
          {"correct", totals_json(s.correct)},
          {"incorrect", totals_json(s.incorrect)}};
}

std::string trace_csv(const TraceStats& s) {
  std::string out = "split,responses,step_count,token_count,keyword_count,tokens_per_step\n";
  auto row = [&](const char* name, const TraceTotals& t) {
    out += std::string(name) + "," + std::to_string(t.responses) + "," +
           std::to_string(t.step_count) + "," + std::to_string(t.token_count) + "," +
           std::to_string(t.keyword_count) + "," + format_double(t.tokens_per_step()) + "\n";
  };
  row("overall", s.overall);
  row("correct", s.correct);
  row("incorrect", s.incorrect);
  return out;
}

json histogram_json(const EntropyHistogram& h) {
  return {{"bin_width", h.bin_width}, {"counts", h.counts},     {"mean", h.mean},
          {"median", h.median},       {"skewness", h.skewness}, {"max", h.max},
          {"samples", h.samples},     {"right_skewed", h.right_skewed()}};
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::string output_dir;
  bool overwrite = false;
};

struct FinalSample {
  std::vector<double> entropies;
  std::vector<TraceRecord> traces;
};

FinalSample sample_final(const PolicyParams& params, std::span<const Prompt> pool, int max_len,
                         int per_prompt, std::uint64_t seed) {
  FinalSample out;
  const Rng root(seed);
  for (std::size_t p = 0; p < pool.size(); ++p) {
    const Rng prompt_root = root.split(p);
    for (int s = 0; s < per_prompt; ++s) {
      Rng rng = prompt_root.split(static_cast<std::uint64_t>(s));
      const Rollout ro = sample_rollout(params, pool[p], max_len, rng);
      out.entropies.insert(out.entropies.end(), ro.old_entropies.begin(), ro.old_entropies.end());
      out.traces.push_back({std::to_string(pool[p].id) + ":" + std::to_string(s),
                            render_trace(ro, params.vocab()), verify(pool[p], ro, params.vocab())});
    }
  }
  return out;
}

/// Runs one variant into `dir`. Returns the summary; rethrows step failures
/// after the partial metrics and a failed summary are on disk.
json train_variant(const ExperimentConfig& cfg, Variant variant, const fs::path& dir) {
  fs::create_directories(dir / "reports");
  const TrainerConfig tc = apply_variant(cfg.trainer, variant);
  const TaskSetup setup = make_task_setup(cfg.tasks, tc.seed);
  const int eval_len = tc.tiers ? tc.tiers->lengths.front() : tc.penalty.target_length;
  const std::uint64_t eval_seed = mix64(tc.seed ^ kEvalSalt);
  const int eval_n = cfg.analysis.eval_samples_per_prompt;

  json summary = {{"run_id", cfg.run_id},
                  {"variant", to_string(variant)},
                  {"trainer", to_json(tc)},
                  {"eval_max_len", eval_len}};

  std::vector<MetricsRecord> metrics;
  std::string metrics_text;
  write_file_atomic(dir / "metrics.jsonl", metrics_text);
  RunHooks hooks;
  hooks.on_step = [&](const MetricsRecord& m) {
    metrics.push_back(m);
    metrics_text += metrics_to_json(m, cfg.run_id).dump() + "\n";
    write_file_atomic(dir / "metrics.jsonl", metrics_text);
  };
  hooks.on_checkpoint = [&](int step, const PolicyParams& params) {
    write_checkpoint(dir / ("ckpt_" + std::to_string(step) + ".dlrp"), to_checkpoint(params));
  };

  const Evaluation before = evaluate_policy(setup.initial, setup.pool, eval_len, eval_n, eval_seed);
  summary["initial"] = evaluation_json(before);

  TrainingRun run{{}, setup.initial, {}};
  try {
    run = run_training(tc, variant, setup.pool, setup.initial, hooks);
  } catch (const Error& e) {
    summary["status"] = "failed";
    summary["error"] = e.what();
    summary["steps_completed"] = metrics.size();
    write_file_atomic(dir / "reports" / "metrics.csv", metrics_csv(metrics));
    write_file_atomic(dir / "summary.json", to_text(summary));
    throw;
  }

  const Evaluation after = evaluate_policy(run.final_params, setup.pool, eval_len, eval_n, eval_seed);
  summary["status"] = "completed";
  summary["steps_completed"] = metrics.size();
  summary["final"] = evaluation_json(after);
  summary["final_accuracy"] = after.accuracy;
  summary["final_mean_length"] = after.mean_length;
  summary["length_reduction_percent"] =
      before.mean_length > 0.0 ? 100.0 * (1.0 - after.mean_length / before.mean_length) : 0.0;
  if (!metrics.empty()) {
    summary["step0_metrics"] = metrics_to_json(metrics.front(), cfg.run_id);
    summary["final_metrics"] = metrics_to_json(metrics.back(), cfg.run_id);
  }

  write_file_atomic(dir / "reports" / "metrics.csv", metrics_csv(metrics));
  if (cfg.analysis.clip_stats) {
    write_file_atomic(dir / "reports" / "clip_stats.json", to_text(clip_json(run.clip)));
  }
  if (cfg.analysis.entropy_histogram || cfg.analysis.trace_stats) {
    const FinalSample sample =
        sample_final(run.final_params, setup.pool, eval_len, eval_n, mix64(eval_seed));
    if (cfg.analysis.entropy_histogram && !sample.entropies.empty()) {
      write_file_atomic(dir / "reports" / "entropy_histogram.json",
                        to_text(histogram_json(
                            entropy_histogram(sample.entropies, cfg.analysis.entropy_bins))));
    }
    if (cfg.analysis.trace_stats) {
      const auto stats = trace_stats(sample.traces, default_keywords());
      write_file_atomic(dir / "reports" / "trace_stats.json", to_text(trace_json(stats)));
      write_file_atomic(dir / "reports" / "trace_stats.csv", trace_csv(stats));
    }
  }
  write_file_atomic(dir / "summary.json", to_text(summary));
  return summary;
}

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = load_experiment_config(args.config, args.overrides, seed_from_env());
    if (!args.output_dir.empty()) cfg.output_dir = args.output_dir;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  const fs::path run_dir = cfg.output_dir / cfg.run_id;
  if (fs::exists(run_dir) && !args.overwrite) {
    err << "config error: run directory " << run_dir.string()
        << " already exists (run_id must be unique; pass --overwrite to replace it)\n";
    return kExitConfig;
  }

  try {
    if (fs::exists(run_dir)) fs::remove_all(run_dir);
    fs::create_directories(run_dir);
    write_file_atomic(run_dir / "config.json", to_text(to_json(cfg)));
    json comparison = json::array();
    const bool nested = cfg.variants.size() > 1;
    for (Variant v : cfg.variants) {
      const fs::path dir = nested ? run_dir / to_string(v) : run_dir;
      const json summary = train_variant(cfg, v, dir);
      comparison.push_back({{"variant", to_string(v)},
                            {"final_accuracy", summary["final_accuracy"]},
                            {"final_mean_length", summary["final_mean_length"]},
                            {"length_reduction_percent", summary["length_reduction_percent"]}});
      out << to_string(v) << ": accuracy " << summary["initial"]["accuracy"].get<double>()
          << " -> " << summary["final_accuracy"].get<double>() << ", mean length "
          << summary["initial"]["mean_length"].get<double>() << " -> "
          << summary["final_mean_length"].get<double>() << " ("
          << summary["length_reduction_percent"].get<double>() << "% shorter)\n";
    }
    if (nested) write_file_atomic(run_dir / "comparison.json", to_text(comparison));
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bias-oracle

struct BiasArgs {
  int group_size = 16;
  std::vector<double> sigmas{0.5, 1.0, 2.0};
  std::vector<double> epsilons{0.0, 0.5, 1.0};
  long samples = 1'000'000;
  std::uint64_t seed = 2024;
  double z = 3.0;
  std::string output_dir = "bias_report";
};

int cmd_bias_oracle(const BiasArgs& args, std::ostream& out, std::ostream& err) {
  std::vector<BiasResult> results;
  try {
    if (args.sigmas.empty() || args.epsilons.empty()) {
      throw DomainError("--sigmas and --epsilons must not be empty");
    }
    for (std::size_t k = 1; k < args.sigmas.size(); ++k) {
      if (!(args.sigmas[k] > args.sigmas[k - 1])) {
        throw DomainError("--sigmas must be strictly ascending");
      }
    }
    for (double sigma : args.sigmas) {
      results.push_back(mc_conditional_moments(
          {args.group_size, sigma, args.epsilons, args.samples, args.seed}));
    }
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return kExitConfig;
  }

  bool analytic_ok = true;
  json rows = json::array();
  std::string csv =
      "sigma,epsilon,numerator_mean,numerator_se,numerator_analytic,d2_mean,d2_se,d2_analytic,"
      "advantage_mean,advantage_se,bias_mean,bias_se,skipped_zero_d\n";
  for (const auto& res : results) {
    for (const auto& m : res.moments) {
      const bool num_ok = m.numerator.within(m.analytic_numerator, args.z);
      const bool d2_ok = m.d_squared.within(m.analytic_d_squared, args.z);
      analytic_ok = analytic_ok && num_ok && d2_ok;
      rows.push_back({{"sigma", res.sigma},
                      {"epsilon", m.epsilon},
                      {"numerator", {{"mean", m.numerator.mean},
                                     {"se", m.numerator.standard_error},
                                     {"analytic", m.analytic_numerator},
                                     {"within_bound", num_ok}}},
                      {"d_squared", {{"mean", m.d_squared.mean},
                                     {"se", m.d_squared.standard_error},
                                     {"analytic", m.analytic_d_squared},
                                     {"within_bound", d2_ok}}},
                      {"advantage", {{"mean", m.advantage.mean}, {"se", m.advantage.standard_error}}},
                      {"bias", {{"mean", m.bias.mean}, {"se", m.bias.standard_error}}},
                      {"skipped_zero_d", m.skipped_zero_d}});
      csv += format_double(res.sigma) + "," + format_double(m.epsilon) + "," +
             format_double(m.numerator.mean) + "," + format_double(m.numerator.standard_error) +
             "," + format_double(m.analytic_numerator) + "," + format_double(m.d_squared.mean) +
             "," + format_double(m.d_squared.standard_error) + "," +
             format_double(m.analytic_d_squared) + "," + format_double(m.advantage.mean) + "," +
             format_double(m.advantage.standard_error) + "," + format_double(m.bias.mean) + "," +
             format_double(m.bias.standard_error) + "," + std::to_string(m.skipped_zero_d) + "\n";
    }
  }

  json ordering = json::array();
  const bool precise = args.samples >= kMinOrderingSamples;
  if (args.sigmas.size() > 1) {
    for (std::size_t e = 0; e < args.epsilons.size(); ++e) {
      json entry = {{"epsilon", args.epsilons[e]}};
      if (!precise) {
        entry["status"] = "skipped: insufficient precision";
      } else {
        const BiasCurve curve = curve_from_results(results, e, args.z);
        json pts = json::array();
        for (const auto& p : curve.points) {
          pts.push_back({{"sigma", p.sigma},
                         {"bias", p.bias.mean},
                         {"magnitude", p.magnitude},
                         {"ci_low", p.ci_low},
                         {"ci_high", p.ci_high}});
        }
        entry["points"] = pts;
        entry["magnitude_strictly_increasing"] = curve.strictly_increasing_ci_separated();
        entry["status"] = "checked";
      }
      ordering.push_back(entry);
    }
  }

  const json report = {{"group_size", args.group_size},
                       {"samples", args.samples},
                       {"seed", args.seed},
                       {"z", args.z},
                       {"analytic_checks_passed", analytic_ok},
                       {"moments", rows},
                       {"bias_ordering", ordering}};
  try {
    fs::create_directories(args.output_dir);
    write_file_atomic(fs::path(args.output_dir) / "bias_report.json", to_text(report));
    write_file_atomic(fs::path(args.output_dir) / "bias_report.csv", csv);
  } catch (const std::exception& e) {
    err << "write failed: " << e.what() << "\n";
    return kExitRuntime;
  }

  out << "analytic checks: " << (analytic_ok ? "pass" : "FAIL") << "\n";
  for (const auto& o : ordering) {
    out << "bias ordering at epsilon " << o["epsilon"].get<double>() << ": ";
    if (o["status"] == "checked") {
      out << (o["magnitude_strictly_increasing"].get<bool>() ? "strictly increasing"
                                                              : "not strictly increasing")
          << "\n";
    } else {
      out << o["status"].get<std::string>() << "\n";
    }
  }
  return analytic_ok ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------
// merge

struct MergeArgs {
  std::string base;
  std::string tuned;
  std::string output;
  std::string strategy = "select";
  double top_fraction = kDefaultTopFraction;
  double scale = kDefaultMergeScale;
  double alpha = 0.5;
};

int cmd_merge(const MergeArgs& args, std::ostream& out, std::ostream& err) {
  ParamSnapshot base, tuned;
  try {
    base = read_snapshot(args.base);
  } catch (const Error& e) {
    err << args.base << ": " << e.what() << "\n";
    return kExitRuntime;
  }
  try {
    tuned = read_snapshot(args.tuned);
  } catch (const Error& e) {
    err << args.tuned << ": " << e.what() << "\n";
    return kExitRuntime;
  }
  try {
    const ParamSnapshot merged = args.strategy == "linear"
                                     ? linear_merge(base, tuned, args.alpha)
                                     : select_merge(base, tuned, args.top_fraction, args.scale);
    write_snapshot(args.output, merged);
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "merge failed: " << e.what() << "\n";
    return kExitRuntime;
  }
  out << "wrote " << args.output << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze-trace

struct TraceArgs {
  std::string input;
  std::string output_dir = "trace_report";
  std::vector<std::string> keywords;
};

int cmd_analyze_trace(const TraceArgs& args, std::ostream& out, std::ostream& err) {
  std::vector<TraceRecord> records;
  try {
    const std::string text = read_file(args.input);
    std::istringstream lines(text);
    std::string line;
    int line_no = 0;
    while (std::getline(lines, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const std::string where = args.input + ":" + std::to_string(line_no) + ": ";
      const json j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) throw Error(where + "not a JSON object");
      if (!j.contains("text") || !j["text"].is_string()) throw Error(where + "missing string field 'text'");
      if (!j.contains("correct") || !j["correct"].is_boolean()) {
        throw Error(where + "missing boolean field 'correct'");
      }
      TraceRecord rec;
      if (j.contains("id")) rec.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
      rec.text = j["text"].get<std::string>();
      rec.correct = j["correct"].get<bool>();
      records.push_back(std::move(rec));
    }
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitRuntime;
  }

  const auto& keywords = args.keywords.empty() ? default_keywords() : args.keywords;
  const TraceStats stats = trace_stats(records, keywords);
  try {
    fs::create_directories(args.output_dir);
    write_file_atomic(fs::path(args.output_dir) / "trace_stats.json", to_text(trace_json(stats)));
    write_file_atomic(fs::path(args.output_dir) / "trace_stats.csv", trace_csv(stats));
  } catch (const std::exception& e) {
    err << "write failed: " << e.what() << "\n";
    return kExitRuntime;
  }
  out << "responses " << stats.overall.responses << ", steps " << stats.overall.step_count
      << ", keywords " << stats.overall.keyword_count << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  std::string metrics;
  std::string output;
};

int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err) {
  std::vector<MetricsRecord> records;
  try {
    records = read_metrics_jsonl(read_file(args.metrics), args.metrics);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitRuntime;
  }
  const fs::path dest = args.output.empty()
                            ? fs::path(args.metrics).parent_path() / "reports" / "metrics.csv"
                            : fs::path(args.output);
  try {
    if (dest.has_parent_path()) fs::create_directories(dest.parent_path());
    write_file_atomic(dest, metrics_csv(records));
  } catch (const std::exception& e) {
    err << "write failed: " << e.what() << "\n";
    return kExitRuntime;
  }
  out << "wrote " << records.size() << " rows to " << dest.string() << "\n";
  return kExitOk;
}

}  // namespace

std::string metrics_csv(const std::vector<MetricsRecord>& records) {
  std::string out =
      "step,mean_response_length,mean_accuracy,mean_token_entropy,zero_reward_group_ratio,"
      "all_one_group_ratio\n";
  for (const auto& r : records) {
    out += std::to_string(r.step) + "," + format_double(r.mean_response_length) + "," +
           format_double(r.mean_accuracy) + "," + format_double(r.mean_token_entropy) + "," +
           format_double(r.zero_reward_group_ratio) + "," + format_double(r.all_one_group_ratio) +
           "\n";
  }
  return out;
}

std::vector<MetricsRecord> read_metrics_jsonl(const std::string& text, const std::string& path) {
  std::vector<MetricsRecord> out;
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(line_no) + ": ";
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(where + "not a JSON object");
    try {
      out.push_back(metrics_from_json(j));
    } catch (const json::exception& e) {
      throw Error(where + e.what());
    }
  }
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Length-penalized RL recipes on a tabular reasoning toy"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Run the variants named in a config file");
  train_cmd->add_option("config", train.config, "Experiment config (JSON)")->required();
  train_cmd->add_option("--set", train.overrides, "Override a config key, e.g. trainer.lr=1.5");
  train_cmd->add_option("--output-dir", train.output_dir, "Replaces the config's output_dir");
  train_cmd->add_flag("--overwrite", train.overwrite, "Replace an existing run directory");

  BiasArgs bias;
  auto* bias_cmd = app.add_subcommand("bias-oracle", "Monte Carlo check of the advantage bias");
  bias_cmd->add_option("--group-size,-N", bias.group_size, "Group size N");
  bias_cmd->add_option("--sigmas", bias.sigmas, "Ascending noise levels")->delimiter(',');
  bias_cmd->add_option("--epsilons", bias.epsilons, "Conditioning values")->delimiter(',');
  bias_cmd->add_option("--samples", bias.samples, "Monte Carlo draws per (sigma, epsilon)");
  bias_cmd->add_option("--seed", bias.seed, "Seed");
  bias_cmd->add_option("--z", bias.z, "Standard errors allowed");
  bias_cmd->add_option("--output-dir", bias.output_dir, "Report directory");

  MergeArgs merge;
  auto* merge_cmd = app.add_subcommand("merge", "Merge a tuned checkpoint into its base");
  merge_cmd->add_option("--base", merge.base, "Base checkpoint")->required();
  merge_cmd->add_option("--tuned", merge.tuned, "Tuned checkpoint")->required();
  merge_cmd->add_option("--output,-o", merge.output, "Merged checkpoint")->required();
  merge_cmd->add_option("--strategy", merge.strategy, "select or linear")
      ->check(CLI::IsMember({"select", "linear"}));
  merge_cmd->add_option("--top-fraction", merge.top_fraction, "Fraction of deltas kept");
  merge_cmd->add_option("--scale", merge.scale, "Scale applied to kept deltas");
  merge_cmd->add_option("--alpha", merge.alpha, "Interpolation weight for linear");

  TraceArgs trace;
  auto* trace_cmd = app.add_subcommand("analyze-trace", "Step and keyword statistics of a corpus");
  trace_cmd->add_option("input", trace.input, "JSONL records {id, text, correct}")->required();
  trace_cmd->add_option("--output-dir", trace.output_dir, "Report directory");
  trace_cmd->add_option("--keyword", trace.keywords, "Replaces the default keyword list");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Convert metrics JSONL to CSV");
  report_cmd->add_option("metrics", report.metrics, "metrics.jsonl")->required();
  report_cmd->add_option("--output,-o", report.output, "CSV path (default reports/metrics.csv)");

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (train_cmd->parsed()) return cmd_train(train, out, err);
  if (bias_cmd->parsed()) return cmd_bias_oracle(bias, out, err);
  if (merge_cmd->parsed()) return cmd_merge(merge, out, err);
  if (trace_cmd->parsed()) return cmd_analyze_trace(trace, out, err);
  if (report_cmd->parsed()) return cmd_report(report, out, err);
  return kExitConfig;
}

}  // namespace dler
