// swar: synthetic feature-selection and redundant-action RL experiments.
//
//   swar synth --dataset syn4 --dim 11 --seeds 0,1,2 --out runs/syn4
//   swar rl --env pendulum --agent td3,dyn-swar --redundant 100 --steps 100000 --seeds 0..4

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "swar/error.hpp"
#include "swar/harness.hpp"

using swar::harness::RunConfig;

namespace {

constexpr int kUsageError = 2;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw swar::ContractError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Instance-wise feature selection and action pruning experiments"};
  app.require_subcommand(1);

  // Raw option values; applied over the config file only when given.
  std::string config_path, dataset, env, agents, seeds, out, td_penalty, dyn_penalty, synth_penalty;
  int dim = 0, samples = 0, iterations = 0, redundant = 0, eval_interval = 0, eval_episodes = 0, warmup = 0, hidden = 0,
      batch = 0, selector_epochs = 0, threads = 0, synth_batch = 0;
  std::int64_t steps = 0;
  double lambda_start = 0, lambda_end = 0, pr_start = 0, pr_end = 0, lr = 0, selector_lr = 0, dyn_predictor_lr = 0,
         synth_lr = 0;
  bool timing = false, state_only = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON file; keys mirror these flags")->check(CLI::ExistingFile);
    sub->add_option("--seeds", seeds, "e.g. 0,1,2 or 0..4");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--lambda-start", lambda_start);
    sub->add_option("--lambda-end", lambda_end);
    sub->add_option("--pr-start", pr_start);
    sub->add_option("--pr-end", pr_end);
    sub->add_option("--threads", threads, "worker threads (default SWAR_THREADS or all cores)");
  };

  auto* synth = app.add_subcommand("synth", "IC-INVASE on a synthetic dataset");
  common(synth);
  synth->add_option("--dataset", dataset, "syn1..syn6");
  synth->add_option("--dim", dim, "feature count (>= 11)");
  synth->add_option("--samples", samples, "dataset size, split half train half test");
  synth->add_option("--iterations", iterations, "training iterations");
  synth->add_option("--batch", synth_batch);
  synth->add_option("--lr", synth_lr, "selector and predictor learning rate");
  synth->add_option("--penalty", synth_penalty, "count or proportion");

  auto* rl = app.add_subcommand("rl", "TD3 variants on a redundant-action environment");
  common(rl);
  rl->add_option("--env", env, "pendulum or maze");
  rl->add_option("--agent", agents, "comma list of oracle, td3, td-swar, dyn-swar");
  rl->add_option("--redundant", redundant, "injected action dimensions");
  rl->add_option("--steps", steps, "environment steps");
  rl->add_option("--eval-interval", eval_interval);
  rl->add_option("--eval-episodes", eval_episodes);
  rl->add_option("--warmup", warmup, "uniform random steps before learning");
  rl->add_option("--hidden", hidden, "width of both hidden layers");
  rl->add_option("--batch", batch);
  rl->add_option("--lr", lr);
  rl->add_option("--selector-epochs", selector_epochs);
  rl->add_option("--selector-lr", selector_lr);
  rl->add_option("--dyn-predictor-lr", dyn_predictor_lr);
  rl->add_option("--td-penalty", td_penalty, "count or proportion");
  rl->add_option("--dyn-penalty", dyn_penalty, "count or proportion");
  rl->add_flag("--state-only-selector", state_only, "selector sees the state only");
  rl->add_flag("--timing", timing, "fill wall_ms (outputs no longer byte-reproducible)");

  CLI11_PARSE(app, argc, argv);

  CLI::App* sub = synth->parsed() ? synth : rl;
  auto given = [&](const char* flag) {
    try {
      return sub->get_option(flag)->count() > 0;
    } catch (const CLI::OptionNotFound&) {
      return false;
    }
  };

  RunConfig cfg;
  cfg.mode = synth->parsed() ? swar::harness::Mode::Synth : swar::harness::Mode::RL;
  try {
    if (!config_path.empty()) swar::harness::apply_json_config(cfg, slurp(config_path));

    // the JSON reader doubles as the flag applier so both paths share checks
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    auto set = [&](const char* flag, auto value) {
      if (given(flag)) j[std::string(flag).substr(2)] = value;
    };
    set("--dataset", dataset);
    set("--dim", dim);
    set("--samples", samples);
    set("--iterations", iterations);
    set("--env", env);
    set("--agent", agents);
    set("--redundant", redundant);
    set("--steps", steps);
    set("--eval-interval", eval_interval);
    set("--eval-episodes", eval_episodes);
    set("--warmup", warmup);
    set("--hidden", hidden);
    set("--selector-epochs", selector_epochs);
    set("--selector-lr", selector_lr);
    set("--dyn-predictor-lr", dyn_predictor_lr);
    set("--td-penalty", td_penalty);
    set("--dyn-penalty", dyn_penalty);
    set("--seeds", seeds);
    set("--out", out);
    set("--lambda-start", lambda_start);
    set("--lambda-end", lambda_end);
    set("--pr-start", pr_start);
    set("--pr-end", pr_end);
    set("--threads", threads);
    if (cfg.mode == swar::harness::Mode::Synth) {
      if (given("--batch")) j["synth-batch"] = synth_batch;
      if (given("--lr")) j["synth-lr"] = synth_lr;
      if (given("--penalty")) j["synth-penalty"] = synth_penalty;
    } else {
      set("--batch", batch);
      set("--lr", lr);
      if (given("--state-only-selector")) j["state-only-selector"] = state_only;
      if (given("--timing")) j["timing"] = timing;
    }
    swar::harness::apply_json_config(cfg, j.dump());
    swar::harness::validate(cfg);
  } catch (const swar::ContractError& e) {
    std::cerr << "swar: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (cfg.mode == swar::harness::Mode::Synth) {
      const auto summary = swar::harness::run_synthetic(cfg);
      for (std::size_t i = 0; i < summary.mean.size(); ++i)
        std::printf("iteration %zu: TPR %.1f +- %.1f  FDR %.1f +- %.1f\n", i + 1, summary.mean[i].tpr,
                    summary.std[i].tpr, summary.mean[i].fdr, summary.std[i].fdr);
    } else {
      for (const auto& s : swar::harness::run_rl(cfg))
        std::printf("%-9s AUC %.2f +- %.2f  final %.2f +- %.2f\n", swar::harness::to_string(s.agent).c_str(),
                    s.auc_mean, s.auc_std, s.final_mean, s.final_std);
    }
    std::printf("wrote %s\n", cfg.out.string().c_str());
  } catch (const std::exception& e) {
    std::cerr << "swar: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
