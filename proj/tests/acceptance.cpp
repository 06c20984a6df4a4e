// Acceptance checks, one per criterion. `acceptance <n>` runs criterion n and
// exits 0 on PASS; `acceptance all` runs every criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "json.hpp"

#include "dler/advantage.hpp"
#include "dler/analysis.hpp"
#include "dler/bias_oracle.hpp"
#include "dler/checkpoint.hpp"
#include "dler/cli.hpp"
#include "dler/errors.hpp"
#include "dler/merge.hpp"
#include "dler/objective.hpp"
#include "dler/tasks.hpp"
#include "dler/trainer.hpp"
#include "objective_reference.hpp"
#include "support.hpp"

using namespace dler;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and settings.
constexpr double kZ = 3.0;                       // SE multiple for Monte Carlo checks
constexpr long kBiasSamples = 1'000'000;
constexpr double kBiasRuntimeLimitS = 60.0;
constexpr double kAdvantageTol = 1e-9;
constexpr double kSingleGroupTol = 1e-12;
constexpr int kGradInstances = 100;
constexpr double kGradRelTol = 1e-4;
constexpr double kGradStep = 1e-5;
constexpr double kGradBoundaryGap = 1e-3;
constexpr int kSamplingBatches = 1000;
constexpr double kLengthRatioLimit = 0.60;       // final length / step-0 length
constexpr int kSeedsRequired = 2;
constexpr double kTrainRuntimeLimitS = 300.0;
constexpr double kComparableLength = 1.2;        // DLER length <= 1.2 x GRPO length
constexpr double kAccuracyWindow = 0.02;         // DA-DLER within 2 points of DLER
const std::vector<std::uint64_t> kSeeds{7, 8, 9};

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double x, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << x;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path work_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("dler_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path config_path(const std::string& name) { return fs::path(DLER_CONFIG_DIR) / name; }

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (code != kExitOk) std::cerr << err.str();
  return code;
}

json read_json(const fs::path& p) { return json::parse(read_file(p)); }

/// Trains `config` at `seed` and returns the run directory.
fs::path train(const fs::path& config, std::uint64_t seed, const fs::path& out,
               const std::vector<std::string>& extra = {}) {
  const std::string run_id = "seed" + std::to_string(seed);
  std::vector<std::string> args{"train", config.string(), "--output-dir", out.string(), "--set",
                                "trainer.seed=" + std::to_string(seed), "--set",
                                "run_id=" + run_id};
  for (const auto& e : extra) {
    args.push_back("--set");
    args.push_back(e);
  }
  if (cli(args) != kExitOk) throw Error("train failed for seed " + std::to_string(seed));
  return out / run_id;
}

// 1. Conditional moments of the normalized advantage, and the bias ordering.
Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = mc_conditional_moments({16, 1.0, {0.0, 0.5, 1.0}, kBiasSamples, 2024});
  bool moments_ok = true;
  std::string detail;
  for (const auto& m : res.moments) {
    moments_ok = moments_ok && m.numerator.within(m.analytic_numerator, kZ) &&
                 m.d_squared.within(m.analytic_d_squared, kZ);
  }
  const auto alpha_beta = analytic_moments(16, 1.0, 1.0);
  moments_ok = moments_ok && analytic_moments(16, 1.0, 0.0).d_squared == 0.87890625 &&
               alpha_beta.d_squared == 0.87890625 + 0.05859375;
  const auto curve = bias_curve(16, {0.5, 1.0, 2.0}, 0.5, kBiasSamples, 2024, kZ);
  const bool ordered = curve.strictly_increasing_ci_separated();
  const double elapsed = seconds_since(t0);
  detail = "moments within " + fmt(kZ) + " SE: " + (moments_ok ? "yes" : "no") +
           "; |bias| at eps=0.5 for sigma 0.5/1/2:";
  for (const auto& p : curve.points) {
    detail += " " + fmt(p.magnitude) + " [" + fmt(p.ci_low) + ", " + fmt(p.ci_high) + "]";
  }
  detail += "; strictly increasing: " + std::string(ordered ? "yes" : "no");
  detail += "; " + fmt(elapsed, 3) + " s";
  return {moments_ok && ordered && elapsed < kBiasRuntimeLimitS, detail};
}

// 2. Advantage oracles on hand examples. The closed forms are checked
// without the std floor; the default floor is checked separately.
Outcome criterion2() {
  bool ok = true;
  const auto sym = grpo_scalars(std::vector<double>{1, 0, 0, 1}, 0.0);
  ok = ok && sym == std::vector<double>{1, -1, -1, 1};
  for (double a : grpo_scalars(std::vector<double>{1, 0, 0, 1})) {
    ok = ok && std::abs(std::abs(a) - 1.0) <= 1e-7;  // eps_std = 1e-8 shrinks by ~2e-8
  }
  const auto skew = grpo_scalars(std::vector<double>{1, 1, 0, 0, 0, 0, 0, 0}, 0.0);
  for (int i = 0; i < 8; ++i) {
    const double want = i < 2 ? std::sqrt(3.0) : -1.0 / std::sqrt(3.0);
    ok = ok && std::abs(skew[static_cast<std::size_t>(i)] - want) <= kAdvantageTol;
  }
  const Batch two{test::group_with_rewards({1, 0}), test::group_with_rewards({1, 1})};
  const auto bn = batch_norm_advantage(two, 0.0);
  ok = ok && std::abs(bn.scalar(0, 0) - std::sqrt(2.0)) <= kAdvantageTol &&
       std::abs(bn.scalar(0, 1) + std::sqrt(2.0)) <= kAdvantageTol && bn.scalar(1, 0) == 0.0 &&
       bn.scalar(1, 1) == 0.0;
  const bool printed_value = std::abs(bn.scalar(0, 0) - 1.4142136) <= 5e-8;  // 7-decimal rounding

  Rng rng(4);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> r(2 + rng.below(15));
    for (auto& x : r) x = static_cast<double>(rng.below(2));
    const Batch one{test::group_with_rewards(r)};
    const auto a = batch_norm_advantage(one);
    const auto b = grpo_advantage(one);
    for (std::size_t i = 0; i < r.size(); ++i) {
      worst = std::max(worst, std::abs(a.scalar(0, i) - b.scalar(0, i)));
    }
  }
  ok = ok && printed_value && worst <= kSingleGroupTol;
  return {ok, "hand examples exact/within " + fmt(kAdvantageTol) +
                  "; single-group batch-norm vs group max diff " + fmt(worst) + " (<= " +
                  fmt(kSingleGroupTol) + ")"};
}

// 3. Surrogate gradient against central differences of an independently
// written objective, plus zero gradient on the clipped branches.
Outcome criterion3() {
  const ClipRange clip{0.2, 0.28};
  const double kl = 0.05;
  Rng rng(2024);
  int checked = 0;
  double worst = 0.0;
  while (checked < kGradInstances) {
    test::Instance inst = test::random_instance(rng);
    if (test::min_boundary_gap(inst, clip) < kGradBoundaryGap) continue;
    ++checked;
    const auto grad = surrogate_gradient(inst.params, inst.batch, inst.adv, clip, kl, inst.ref);
    worst = std::max(worst, test::fd_relative_error(inst, grad, clip, kl, kGradStep));
  }

  const Vocab v = test::tiny_vocab();
  Rng prng(3);
  const auto params = test::random_params(v, PolicyLayout{1, 1}, prng);
  const Prompt prompt{0, 1, 2};
  bool clipped_zero = true;
  for (auto [ratio, adv] : {std::pair{1.5, 1.0}, std::pair{0.5, -1.0}}) {
    Group g;
    g.prompt = prompt;
    Rollout ro = test::rollout_under(params, prompt, {1, 0, 2});
    for (double& lp : ro.old_logprobs) lp -= std::log(ratio);
    g.rollouts = {ro};
    g.rewards = {0.0};
    const Batch batch{g};
    const auto a = AdvantageSet::broadcast(AdvantageMode::Grpo, batch, {{adv}});
    const auto grad = surrogate_gradient(params, batch, a, clip, 0.0, params);
    clipped_zero = clipped_zero && std::all_of(grad.begin(), grad.end(),
                                               [](double x) { return x == 0.0; });
  }
  return {worst <= kGradRelTol && clipped_zero,
          std::to_string(checked) + " instances, worst relative error " + fmt(worst) + " (<= " +
              fmt(kGradRelTol) + "); clipped tokens give exactly zero gradient: " +
              (clipped_zero ? "yes" : "no")};
}

// 4. Dynamic sampling over seeded batches drawn from perturbed policies.
Outcome criterion4() {
  const TaskSetup setup = make_task_setup({}, 7);
  long full = 0, partial = 0, bad = 0;
  for (int b = 0; b < kSamplingBatches; ++b) {
    Rng rng(static_cast<std::uint64_t>(b));
    PolicyParams params = setup.initial;
    const double spread = 0.5 * static_cast<double>(b % 5);
    for (double& x : params.logits()) x += spread * (2.0 * rng.uniform() - 1.0);
    TrainerConfig c;
    c.batch_size = 16;
    c.max_resample_rounds = b % 4;  // small budgets make partial batches reachable
    try {
      const auto out = collect_batch(params, setup.pool, c, rng);
      ++full;
      if (static_cast<int>(out.batch.size()) != c.batch_size) ++bad;
      for (const auto& g : out.batch) bad += !has_mixed_rewards(g);
    } catch (const PartialBatchError& e) {
      ++partial;
      if (static_cast<int>(e.accepted().size()) >= c.batch_size) ++bad;
      for (const auto& g : e.accepted()) bad += !has_mixed_rewards(g);
    }
  }
  return {bad == 0 && full + partial == kSamplingBatches,
          std::to_string(full) + " full batches, " + std::to_string(partial) +
              " partial-batch errors, " + std::to_string(bad) + " violations"};
}

// 5. Default DLER recipe shortens responses without losing accuracy.
Outcome criterion5() {
  const fs::path dir = work_dir("c5");
  int good = 0;
  bool fast = true;
  std::string detail;
  for (auto seed : kSeeds) {
    const auto t0 = std::chrono::steady_clock::now();
    const json s = read_json(train(config_path("dler_toy.json"), seed, dir) / "summary.json");
    const double elapsed = seconds_since(t0);
    fast = fast && elapsed < kTrainRuntimeLimitS;
    const double l0 = s["initial"]["mean_length"], a0 = s["initial"]["accuracy"];
    const double l1 = s["final_mean_length"], a1 = s["final_accuracy"];
    const bool ok = l1 <= kLengthRatioLimit * l0 && a1 >= a0;
    good += ok;
    detail += "seed " + std::to_string(seed) + ": length " + fmt(l0) + " -> " + fmt(l1) + " (" +
              fmt(100.0 * l1 / l0, 3) + "%), accuracy " + fmt(a0, 3) + " -> " + fmt(a1, 3) +
              ", " + fmt(elapsed, 3) + " s; ";
  }
  detail += std::to_string(good) + "/3 seeds meet length <= " + fmt(100 * kLengthRatioLimit) +
            "% and accuracy >= step 0";
  return {good >= kSeedsRequired && fast, detail};
}

// 6. Ablation trends, seed aggregate.
Outcome criterion6() {
  const fs::path dir = work_dir("c6");
  std::map<std::string, double> acc, len;
  for (auto seed : kSeeds) {
    const fs::path run = train(config_path("ablation.json"), seed, dir / "ablation");
    for (const char* v : {"grpo", "dler", "da_dler"}) {
      const json s = read_json(run / v / "summary.json");
      acc[v] += s["final_accuracy"].get<double>() / 3.0;
      len[v] += s["final_mean_length"].get<double>() / 3.0;
    }
  }
  double h_decoupled = 0.0, h_symmetric = 0.0;
  for (auto seed : kSeeds) {
    const fs::path cfg = config_path("clip_entropy.json");
    h_decoupled += read_json(train(cfg, seed, dir / "decoupled") / "summary.json")["final"]
                       ["mean_token_entropy"].get<double>() / 3.0;
    h_symmetric += read_json(train(cfg, seed, dir / "symmetric", {"trainer.eps_high=0.2"}) /
                             "summary.json")["final"]["mean_token_entropy"].get<double>() / 3.0;
  }
  const bool a = acc["dler"] >= acc["grpo"] && len["dler"] <= kComparableLength * len["grpo"];
  const bool b = h_decoupled >= h_symmetric;
  const bool c = len["da_dler"] <= len["dler"] &&
                 std::abs(acc["da_dler"] - acc["dler"]) <= kAccuracyWindow;
  std::string detail = "(a) " + std::string(a ? "ok" : "no") + ": accuracy dler " +
                       fmt(acc["dler"], 3) + " vs grpo " + fmt(acc["grpo"], 3) + ", length " +
                       fmt(len["dler"]) + " vs " + fmt(len["grpo"]) + "; (b) " +
                       (b ? "ok" : "no") + ": entropy 0.2/0.28 " + fmt(h_decoupled) +
                       " vs 0.2/0.2 " + fmt(h_symmetric) + "; (c) " + (c ? "ok" : "no") +
                       ": da_dler length " + fmt(len["da_dler"]) + " vs " + fmt(len["dler"]) +
                       ", accuracy " + fmt(acc["da_dler"], 3) + " vs " + fmt(acc["dler"], 3);
  return {a && b && c, detail};
}

// 7. Update-selective merge on hand examples, in memory and through the CLI.
Outcome criterion7() {
  const CheckpointData base{kCheckpointVersion, 1, 4, {1, 2, 3, 4}};
  const CheckpointData tuned{kCheckpointVersion, 1, 4, {1.1, 2.0, 3.5, 3.0}};
  bool ok = select_merge(base, tuned, 0.25, 0.7).values == std::vector<double>{1, 2, 3, 3.3};
  ok = ok && select_merge(base, tuned, 1.0, 1.0).values == tuned.values;
  ok = ok && select_merge(tuned, tuned, 0.25, 0.7).values == tuned.values;

  const fs::path dir = work_dir("c7");
  write_checkpoint(dir / "base.dlrp", base);
  write_checkpoint(dir / "tuned.dlrp", tuned);
  ok = ok && cli({"merge", "--base", (dir / "base.dlrp").string(), "--tuned",
                  (dir / "tuned.dlrp").string(), "-o", (dir / "m.dlrp").string(),
                  "--top-fraction", "0.25", "--scale", "0.7"}) == kExitOk;
  ok = ok && read_checkpoint(dir / "m.dlrp").values == std::vector<double>{1, 2, 3, 3.3};
  ok = ok && cli({"merge", "--base", (dir / "base.dlrp").string(), "--tuned",
                  (dir / "base.dlrp").string(), "-o", (dir / "same.dlrp").string()}) == kExitOk;
  ok = ok && read_file(dir / "same.dlrp") == read_file(dir / "base.dlrp");
  return {ok, "hand example, full-fraction and identical-input cases compared exactly"};
}

// 8. pass@k, trace statistics and clip statistics against hand oracles.
Outcome criterion8() {
  long mismatches = 0;
  for (int n = 1; n <= 12; ++n) {
    for (int c = 0; c <= n; ++c) {
      for (int k = 1; k <= n; ++k) {
        long hit = 0, total = 0;
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
          if (__builtin_popcount(mask) != k) continue;
          ++total;
          hit += (mask & ((1u << c) - 1u)) != 0u;
        }
        const double brute = 1.0 - static_cast<double>(total - hit) / static_cast<double>(total);
        mismatches += pass_at_k(n, c, k) != brute;
      }
    }
  }

  const std::vector<TraceRecord> corpus{{"a", "Wait\n\nBut then\n\nDone", true}};
  const auto stats = trace_stats(corpus, default_keywords());
  const bool trace_ok = stats.overall.step_count == 3 && stats.overall.keyword_count == 2 &&
                        stats.overall.token_count == 4;

  // ratios and advantages per token; new probabilities are all 1/4
  const Vocab v = test::tiny_vocab();
  const PolicyParams uniform(v, PolicyLayout{1, 1});
  const double ratio[6] = {1.5, 1.5, 0.5, 0.5, 1.0, 1.3};
  const double adv[6] = {1.0, -1.0, -1.0, 1.0, 1.0, 2.0};
  const ClipClass expect[6] = {ClipClass::ClippedHigh, ClipClass::Unclipped,
                               ClipClass::ClippedLow,  ClipClass::Unclipped,
                               ClipClass::Unclipped,   ClipClass::ClippedHigh};
  Group g;
  g.prompt = {0, 1, 2};
  for (int r = 0; r < 2; ++r) {
    Rollout ro;
    ro.tokens = r == 0 ? std::vector<TokenId>{0, 1, 3} : std::vector<TokenId>{1, 0, 3};
    for (int t = 0; t < 3; ++t) {
      ro.old_logprobs.push_back(std::log(0.25) - std::log(ratio[3 * r + t]));
      ro.old_entropies.push_back(0.1 * (3 * r + t + 1));
    }
    g.rollouts.push_back(ro);
    g.rewards.push_back(0.0);
  }
  const Batch batch{g};
  const AdvantageSet advantages(AdvantageMode::Grpo,
                                {{{adv[0], adv[1], adv[2]}, {adv[3], adv[4], adv[5]}}});
  const auto clip = clip_stats(batch, uniform, advantages, {0.2, 0.28});
  bool clip_ok = clip.total() == 6 && clip[ClipClass::ClippedHigh].count == 2 &&
                 clip[ClipClass::ClippedLow].count == 1 && clip[ClipClass::Unclipped].count == 3;
  for (int t = 0; t < 6; ++t) {
    clip_ok = clip_ok && classify_token(ratio[t], adv[t], {0.2, 0.28}) == expect[t];
  }

  return {mismatches == 0 && trace_ok && clip_ok,
          "pass@k mismatches vs enumeration: " + std::to_string(mismatches) +
              "; trace corpus steps/keywords/tokens " + std::to_string(stats.overall.step_count) +
              "/" + std::to_string(stats.overall.keyword_count) + "/" +
              std::to_string(stats.overall.token_count) + "; clip partition " +
              std::to_string(clip[ClipClass::ClippedHigh].count) + "/" +
              std::to_string(clip[ClipClass::ClippedLow].count) + "/" +
              std::to_string(clip[ClipClass::Unclipped].count)};
}

std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_file(e.path());
  }
  return files;
}

// 9. Every command twice with identical inputs; outputs compared byte for byte.
Outcome criterion9() {
  const fs::path dir = work_dir("c9");
  write_file_atomic(dir / "corpus.jsonl",
                    "{\"id\": \"a\", \"text\": \"Wait\\n\\nBut then\\n\\nDone\", \"correct\": true}\n"
                    "{\"id\": \"b\", \"text\": \"Hmm. Another try\", \"correct\": false}\n");
  auto run_all = [&](const fs::path& out) {
    fs::create_directories(out);
    bool ok = cli({"train", config_path("ablation.json").string(), "--output-dir",
                   (out / "runs").string(), "--set", "trainer.max_steps=6", "--set",
                   "trainer.checkpoint_every=3"}) == kExitOk;
    const fs::path dler = out / "runs" / "ablation" / "dler";
    ok = ok && cli({"bias-oracle", "--samples", "20000", "--output-dir",
                    (out / "bias").string()}) == kExitOk;
    ok = ok && cli({"merge", "--base", (dler / "ckpt_3.dlrp").string(), "--tuned",
                    (dler / "ckpt_6.dlrp").string(), "-o", (out / "merged.dlrp").string()}) ==
                   kExitOk;
    ok = ok && cli({"analyze-trace", (dir / "corpus.jsonl").string(), "--output-dir",
                    (out / "trace").string()}) == kExitOk;
    ok = ok && cli({"report", (dler / "metrics.jsonl").string(), "-o",
                    (out / "report.csv").string()}) == kExitOk;
    return ok;
  };
  // same paths both times: config.json records the output directory
  const fs::path out = dir / "out";
  if (!run_all(out)) return {false, "a command failed"};
  const auto a = snapshot_tree(out);
  fs::remove_all(out);
  if (!run_all(out)) return {false, "a command failed"};
  const auto b = snapshot_tree(out);
  long differing = 0;
  for (const auto& [name, bytes] : a) {
    const auto it = b.find(name);
    differing += it == b.end() || it->second != bytes;
  }
  differing += static_cast<long>(b.size()) - static_cast<long>(a.size());
  const long ckpts = std::count_if(a.begin(), a.end(), [](const auto& kv) {
    return kv.first.ends_with(".dlrp");
  });
  return {differing == 0 && ckpts > 0,
          std::to_string(a.size()) + " files (" + std::to_string(ckpts) +
              " checkpoints) from train, bias-oracle, merge, analyze-trace, report; " +
              std::to_string(differing) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{
      criterion1, criterion2, criterion3, criterion4, criterion5,
      criterion6, criterion7, criterion8, criterion9};
  const std::string which = argc > 1 ? argv[1] : "all";
  bool all_pass = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (which != "all" && which != std::to_string(i + 1)) continue;
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << o.detail
              << std::endl;
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
