#pragma once

// Experiment runner: multi-seed synthetic selection and RL runs with CSV/JSON
// metrics and SVG plots.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "swar/agents.hpp"
#include "swar/synthetic.hpp"

namespace swar::harness {

enum class Mode { Synth, RL };
enum class AgentKind { Oracle, TD3, TDSWAR, DynSWAR };

std::string to_string(AgentKind kind);
std::optional<AgentKind> parse_agent(const std::string& name);

struct RunConfig {
  Mode mode = Mode::RL;

  // synthetic
  std::string dataset = "syn1";
  int dim = 11;
  int n_samples = 20000;
  int iterations = 10000;
  int synth_batch = 128;
  double synth_lr = 1e-4;

  // rl
  std::string env = "pendulum";
  std::vector<AgentKind> agents{AgentKind::TD3};
  int n_red = 100;
  std::int64_t total_steps = 100000;
  int eval_interval = 2000;
  int eval_episodes = 10;
  int warmup_steps = 25000;
  int hidden = 256;
  int batch_size = 256;
  double lr = 3e-4;
  int selector_epochs = 50;
  double selector_lr = 1e-4;
  double dyn_predictor_lr = 1e-3;
  selection::PenaltyMode td_penalty = selection::PenaltyMode::Count;
  selection::PenaltyMode dyn_penalty = selection::PenaltyMode::Proportion;
  bool state_only_selector = false;

  // curricula (both modes)
  double lambda_start = 0.0;
  std::optional<double> lambda_end;  // unset: 0.1 for synth, 0.2 for rl
  double pr_start = 0.5;
  double pr_end = 0.0;
  selection::PenaltyMode synth_penalty = selection::PenaltyMode::Proportion;

  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::filesystem::path out = "runs";
  bool timing = false;  // fill wall_ms; off keeps outputs byte-reproducible
  int threads = 0;      // 0: SWAR_THREADS or hardware concurrency
};

double effective_lambda_end(const RunConfig& cfg);

/// Applies a JSON object whose keys mirror the CLI flag names
/// ("dataset", "lambda-end", "seeds", ...). Throws ContractError on bad input.
void apply_json_config(RunConfig& cfg, const std::string& json_text);

/// "0,1,2", "0..4" or a mix such as "0..2,7".
std::vector<std::uint64_t> parse_seeds(const std::string& text);

/// Throws ContractError describing the first invalid field.
void validate(const RunConfig& cfg);

struct MetricsRow {
  std::int64_t step = 0;
  std::int64_t episode = 0;
  double eval_return = 0.0;
  std::optional<double> critic_loss;
  std::optional<double> selector_tpr;
  std::optional<double> selector_fdr;
  std::optional<double> lambda;
  std::optional<double> p_r;
  std::optional<double> wall_ms;
};

const std::string& metrics_header();
std::string format_row(const MetricsRow& row);
/// Parses a curve CSV written by run_rl.
std::vector<MetricsRow> read_curve_csv(const std::filesystem::path& path);

/// Trapezoidal area under (step, return) divided by the step span.
double curve_auc(const std::vector<MetricsRow>& rows);
/// Mean return over the last `window` evaluation rows.
double final_window_mean(const std::vector<MetricsRow>& rows, std::size_t window = 5);

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<MetricsRow> rows;
  double auc = 0.0;
  double final_return = 0.0;
  /// Final evaluation-mask rates of the selector, if the agent has one.
  std::optional<synth::Rates> selector_rates;
};

/// One RL run; rows are appended to `csv` (flushed per evaluation) if given.
SeedRun run_rl_seed(const RunConfig& cfg, AgentKind kind, std::uint64_t seed, std::ostream* csv = nullptr);

/// Agent as configured by cfg for an environment spec.
std::unique_ptr<rl::Agent> make_agent(const RunConfig& cfg, AgentKind kind, const envs::EnvSpec& spec, Rng& init_rng);
rl::TD3Config td3_config(const RunConfig& cfg);
rl::DynSelectorConfig dyn_selector_config(const RunConfig& cfg);

struct AgentSummary {
  AgentKind agent;
  std::vector<SeedRun> runs;
  double auc_mean = 0.0, auc_std = 0.0;
  double final_mean = 0.0, final_std = 0.0;
};

/// Writes <out>/<agent>/curve_seed{k}.csv, <out>/summary.json, <out>/curves.svg.
std::vector<AgentSummary> run_rl(const RunConfig& cfg);

struct SynthSeedResult {
  std::uint64_t seed = 0;
  synth::SelectionReport report;
};

struct SynthSummary {
  std::vector<SynthSeedResult> seeds;
  std::vector<synth::Rates> mean;  // per iteration
  std::vector<synth::Rates> std;
};

SynthSummary run_synthetic_seeds(const RunConfig& cfg);
/// Writes <out>/report.json, <out>/probs.csv and <out>/selection.svg.
SynthSummary run_synthetic(const RunConfig& cfg);

/// Worker count: cfg.threads, else SWAR_THREADS, else hardware concurrency.
int worker_count(const RunConfig& cfg);

// --- plotting --------------------------------------------------------------------

struct CurveSeries {
  std::string label;
  std::vector<double> x;
  std::vector<std::vector<double>> runs;  // one y-vector per seed, aligned with x
};

/// Mean line with a +-1 std band per series (no band for a single run).
std::string emit_svg(const std::vector<CurveSeries>& curves, const std::string& title,
                     const std::string& x_label, const std::string& y_label);

}  // namespace swar::harness
