#include "swar/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "swar/error.hpp"

namespace swar::harness {

using json = nlohmann::ordered_json;
using nn::Matrix;
using nn::Vector;

std::string to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::Oracle: return "oracle";
    case AgentKind::TD3: return "td3";
    case AgentKind::TDSWAR: return "td-swar";
    case AgentKind::DynSWAR: return "dyn-swar";
  }
  return "?";
}

std::optional<AgentKind> parse_agent(const std::string& name) {
  for (AgentKind k : {AgentKind::Oracle, AgentKind::TD3, AgentKind::TDSWAR, AgentKind::DynSWAR})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

// --- configuration ---------------------------------------------------------------

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) {
    const auto b = cur.find_first_not_of(" \t");
    const auto e = cur.find_last_not_of(" \t");
    parts.push_back(b == std::string::npos ? std::string{} : cur.substr(b, e - b + 1));
  }
  return parts;
}

std::uint64_t parse_u64(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw ContractError("bad seed '" + s + "'");
  return std::stoull(s);
}

selection::PenaltyMode parse_penalty(const std::string& s) {
  if (s == "count") return selection::PenaltyMode::Count;
  if (s == "proportion") return selection::PenaltyMode::Proportion;
  throw ContractError("penalty mode must be 'count' or 'proportion', got '" + s + "'");
}

std::vector<AgentKind> parse_agent_list(const std::string& text) {
  std::vector<AgentKind> out;
  for (const auto& name : split(text, ',')) {
    const auto k = parse_agent(name);
    if (!k) throw ContractError("unknown agent '" + name + "' (valid: oracle, td3, td-swar, dyn-swar)");
    out.push_back(*k);
  }
  if (out.empty()) throw ContractError("agent list is empty");
  return out;
}

}  // namespace

double effective_lambda_end(const RunConfig& cfg) {
  return cfg.lambda_end.value_or(cfg.mode == Mode::Synth ? 0.1 : 0.2);
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& part : split(text, ',')) {
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      seeds.push_back(parse_u64(part));
      continue;
    }
    const auto lo = parse_u64(part.substr(0, dots));
    const auto hi = parse_u64(part.substr(dots + 2));
    if (hi < lo) throw ContractError("empty seed range '" + part + "'");
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw ContractError("no seeds given");
  return seeds;
}

void apply_json_config(RunConfig& cfg, const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ContractError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ContractError("config: top level must be an object");

  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "dataset") cfg.dataset = v.get<std::string>();
      else if (key == "dim") cfg.dim = v.get<int>();
      else if (key == "samples") cfg.n_samples = v.get<int>();
      else if (key == "iterations") cfg.iterations = v.get<int>();
      else if (key == "synth-batch") cfg.synth_batch = v.get<int>();
      else if (key == "synth-lr") cfg.synth_lr = v.get<double>();
      else if (key == "env") cfg.env = v.get<std::string>();
      else if (key == "agent") {
        if (v.is_array()) {
          std::string joined;
          for (const auto& a : v) joined += (joined.empty() ? "" : ",") + a.get<std::string>();
          cfg.agents = parse_agent_list(joined);
        } else {
          cfg.agents = parse_agent_list(v.get<std::string>());
        }
      } else if (key == "redundant") cfg.n_red = v.get<int>();
      else if (key == "steps") cfg.total_steps = v.get<std::int64_t>();
      else if (key == "eval-interval") cfg.eval_interval = v.get<int>();
      else if (key == "eval-episodes") cfg.eval_episodes = v.get<int>();
      else if (key == "warmup") cfg.warmup_steps = v.get<int>();
      else if (key == "hidden") cfg.hidden = v.get<int>();
      else if (key == "batch") cfg.batch_size = v.get<int>();
      else if (key == "lr") cfg.lr = v.get<double>();
      else if (key == "selector-epochs") cfg.selector_epochs = v.get<int>();
      else if (key == "selector-lr") cfg.selector_lr = v.get<double>();
      else if (key == "dyn-predictor-lr") cfg.dyn_predictor_lr = v.get<double>();
      else if (key == "td-penalty") cfg.td_penalty = parse_penalty(v.get<std::string>());
      else if (key == "dyn-penalty") cfg.dyn_penalty = parse_penalty(v.get<std::string>());
      else if (key == "synth-penalty") cfg.synth_penalty = parse_penalty(v.get<std::string>());
      else if (key == "state-only-selector") cfg.state_only_selector = v.get<bool>();
      else if (key == "lambda-start") cfg.lambda_start = v.get<double>();
      else if (key == "lambda-end") cfg.lambda_end = v.get<double>();
      else if (key == "pr-start") cfg.pr_start = v.get<double>();
      else if (key == "pr-end") cfg.pr_end = v.get<double>();
      else if (key == "seeds") {
        if (v.is_array()) {
          cfg.seeds.clear();
          for (const auto& s : v) cfg.seeds.push_back(s.get<std::uint64_t>());
        } else {
          cfg.seeds = parse_seeds(v.get<std::string>());
        }
      } else if (key == "out") cfg.out = v.get<std::string>();
      else if (key == "timing") cfg.timing = v.get<bool>();
      else if (key == "threads") cfg.threads = v.get<int>();
      else throw ContractError("config: unknown key '" + key + "'");
    } catch (const json::type_error&) {
      throw ContractError("config: wrong type for '" + key + "'");
    }
  }
}

void validate(const RunConfig& cfg) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ContractError(msg);
  };
  require(!cfg.seeds.empty(), "seeds must be non-empty");
  require(cfg.lambda_start >= 0 && effective_lambda_end(cfg) >= 0, "lambda must be non-negative");
  require(cfg.pr_start >= 0 && cfg.pr_start <= 1 && cfg.pr_end >= 0 && cfg.pr_end <= 1, "p_r must lie in [0, 1]");
  if (cfg.mode == Mode::Synth) {
    require(synth::parse_variant(cfg.dataset).has_value(),
            "unknown dataset '" + cfg.dataset + "' (valid: " + synth::valid_variant_names() + ")");
    require(cfg.dim >= 11, "dim must be at least 11");
    require(cfg.n_samples >= 4, "samples must be at least 4");
    require(cfg.iterations > 0 && cfg.synth_batch > 0 && cfg.synth_lr > 0, "iterations, batch and lr must be positive");
    return;
  }
  require(envs::is_known_env(cfg.env), "unknown env '" + cfg.env + "' (valid: pendulum, maze)");
  require(!cfg.agents.empty(), "at least one agent is required");
  require(cfg.n_red >= 0, "redundant must be non-negative");
  require(cfg.total_steps > 0, "steps must be positive");
  require(cfg.eval_interval > 0 && cfg.eval_episodes > 0, "eval interval and episodes must be positive");
  require(cfg.warmup_steps >= 0, "warmup must be non-negative");
  require(cfg.hidden > 0 && cfg.batch_size > 0 && cfg.lr > 0, "hidden, batch and lr must be positive");
  const bool dyn = std::find(cfg.agents.begin(), cfg.agents.end(), AgentKind::DynSWAR) != cfg.agents.end();
  if (dyn) {
    require(cfg.selector_epochs > 0, "selector-epochs must be positive");
    require(cfg.warmup_steps >= dyn_selector_config(cfg).batch_size,
            "dyn-swar needs a warm-up buffer of at least one selector batch");
  }
}

// --- metrics -----------------------------------------------------------------------

const std::string& metrics_header() {
  static const std::string header = "step,episode,return,critic_loss,selector_tpr,selector_fdr,lambda,p_r,wall_ms";
  return header;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string{}; }

std::optional<double> parse_opt(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  return std::stod(cell);
}

}  // namespace

std::string format_row(const MetricsRow& row) {
  std::string s = std::to_string(row.step) + ',' + std::to_string(row.episode) + ',' + fmt(row.eval_return);
  for (const auto* v : {&row.critic_loss, &row.selector_tpr, &row.selector_fdr, &row.lambda, &row.p_r, &row.wall_ms})
    s += ',' + opt(*v);
  return s;
}

std::vector<MetricsRow> read_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_curve_csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != metrics_header())
    throw ContractError("read_curve_csv: unexpected header in " + path.string());
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 9) throw ContractError("read_curve_csv: expected 9 fields in '" + line + "'");
    MetricsRow r;
    r.step = std::stoll(cells[0]);
    r.episode = std::stoll(cells[1]);
    r.eval_return = std::stod(cells[2]);
    r.critic_loss = parse_opt(cells[3]);
    r.selector_tpr = parse_opt(cells[4]);
    r.selector_fdr = parse_opt(cells[5]);
    r.lambda = parse_opt(cells[6]);
    r.p_r = parse_opt(cells[7]);
    r.wall_ms = parse_opt(cells[8]);
    rows.push_back(r);
  }
  return rows;
}

double curve_auc(const std::vector<MetricsRow>& rows) {
  if (rows.empty()) throw ContractError("curve_auc: empty curve");
  if (rows.size() == 1) return rows.front().eval_return;
  double area = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    area += 0.5 * (rows[i].eval_return + rows[i - 1].eval_return) * static_cast<double>(rows[i].step - rows[i - 1].step);
  const auto span = static_cast<double>(rows.back().step - rows.front().step);
  if (span <= 0) throw ContractError("curve_auc: steps must increase");
  return area / span;
}

double final_window_mean(const std::vector<MetricsRow>& rows, std::size_t window) {
  if (rows.empty() || window == 0) throw ContractError("final_window_mean: empty curve or window");
  const std::size_t n = std::min(window, rows.size());
  double sum = 0.0;
  for (std::size_t i = rows.size() - n; i < rows.size(); ++i) sum += rows[i].eval_return;
  return sum / static_cast<double>(n);
}

namespace {

struct MeanStd {
  double mean = 0.0, std = 0.0;
};

// population std, matching the plotted bands
MeanStd mean_std(const std::vector<double>& v) {
  MeanStd m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (double x : v) m.std += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(m.std / static_cast<double>(v.size()));
  return m;
}

// Runs job(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& job) {
  const auto w = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < w; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            job(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

int worker_count(const RunConfig& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  if (const char* env = std::getenv("SWAR_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// --- RL ------------------------------------------------------------------------------

rl::TD3Config td3_config(const RunConfig& cfg) {
  rl::TD3Config t;
  t.batch_size = cfg.batch_size;
  t.lr = cfg.lr;
  t.warmup_steps = cfg.warmup_steps;
  t.hidden = {cfg.hidden, cfg.hidden};
  return t;
}

rl::DynSelectorConfig dyn_selector_config(const RunConfig& cfg) {
  rl::DynSelectorConfig d;
  d.epochs = cfg.selector_epochs;
  d.selector.lr = cfg.selector_lr;
  d.predictor_lr = cfg.dyn_predictor_lr;
  d.curriculum = {cfg.lambda_start, effective_lambda_end(cfg), cfg.pr_start, cfg.pr_end, 1};
  d.penalty_mode = cfg.dyn_penalty;
  d.selector_input = cfg.state_only_selector ? rl::SelectorInput::StateOnly : rl::SelectorInput::StateAction;
  return d;
}

std::unique_ptr<rl::Agent> make_agent(const RunConfig& cfg, AgentKind kind, const envs::EnvSpec& spec, Rng& init_rng) {
  switch (kind) {
    case AgentKind::Oracle:
    case AgentKind::TD3:
      return std::make_unique<rl::TD3Agent>(spec.state_dim, spec.action_low, spec.action_high, td3_config(cfg), init_rng);
    case AgentKind::TDSWAR: {
      rl::TDSWARConfig t;
      t.td3 = td3_config(cfg);
      t.selector.lr = cfg.selector_lr;
      const auto updates = std::max<std::int64_t>(1, cfg.total_steps - cfg.warmup_steps);
      t.curriculum = {cfg.lambda_start, effective_lambda_end(cfg), cfg.pr_start, cfg.pr_end,
                      std::max<std::int64_t>(1, std::llround(0.8 * static_cast<double>(updates)))};
      t.penalty_mode = cfg.td_penalty;
      t.selector_input = cfg.state_only_selector ? rl::SelectorInput::StateOnly : rl::SelectorInput::StateAction;
      return std::make_unique<rl::TDSWARAgent>(spec.state_dim, spec.action_low, spec.action_high, t, init_rng);
    }
    case AgentKind::DynSWAR:
      return std::make_unique<rl::DynSWARAgent>(spec.state_dim, spec.action_low, spec.action_high,
                                                rl::DynSWARConfig{td3_config(cfg), dyn_selector_config(cfg)}, init_rng);
  }
  throw ContractError("make_agent: unknown agent");
}

namespace {

struct EvalResult {
  double mean_return = 0.0;
  std::optional<synth::Rates> rates;
};

EvalResult evaluate(const RunConfig& cfg, const rl::Agent& agent, envs::RedundantWrapper& env, std::uint64_t seed,
                    std::int64_t round) {
  Rng rng = rng_tree(seed, {"eval", std::to_string(round)});
  const auto& spec = env.spec();
  std::vector<Vector> states, actions;
  double total = 0.0;
  for (int ep = 0; ep < cfg.eval_episodes; ++ep) {
    Vector s = env.reset(rng);
    for (int t = 0; t < spec.horizon; ++t) {
      const Vector a = agent.act(s, rl::ActMode::Greedy, rng);
      const auto step = env.step(a);
      states.push_back(s);
      actions.push_back(a);
      total += step.reward;
      s = step.observation;
      if (step.done) break;
    }
  }
  EvalResult out;
  out.mean_return = total / cfg.eval_episodes;

  Matrix S(spec.state_dim, static_cast<Eigen::Index>(states.size()));
  Matrix A(spec.action_dim, static_cast<Eigen::Index>(actions.size()));
  for (std::size_t k = 0; k < states.size(); ++k) {
    S.col(static_cast<Eigen::Index>(k)) = states[k];
    A.col(static_cast<Eigen::Index>(k)) = actions[k];
  }
  if (const auto masks = agent.evaluation_masks(S, A)) {
    const auto truth = env.ground_truth_mask().indices();
    synth::Rates mean;
    for (Eigen::Index k = 0; k < masks->cols(); ++k) {
      const auto r = synth::tpr_fdr(selection::Mask::from_vector(masks->col(k)).indices(), truth);
      mean.tpr += r.tpr;
      mean.fdr += r.fdr;
    }
    mean.tpr /= static_cast<double>(masks->cols());
    mean.fdr /= static_cast<double>(masks->cols());
    out.rates = mean;
  }
  return out;
}

}  // namespace

SeedRun run_rl_seed(const RunConfig& cfg, AgentKind kind, std::uint64_t seed, std::ostream* csv) {
  const int n_red = kind == AgentKind::Oracle ? 0 : cfg.n_red;
  auto env = envs::make_env(cfg.env, n_red);
  auto eval_env = envs::make_env(cfg.env, n_red);
  const auto spec = env->spec();

  Rng env_rng = rng_tree(seed, {"env"});
  Rng init_rng = rng_tree(seed, {"init"});
  Rng act_rng = rng_tree(seed, {"act"});
  Rng buffer_rng = rng_tree(seed, {"buffer"});
  Rng update_rng = rng_tree(seed, {"update"});
  Rng selector_rng = rng_tree(seed, {"selector"});

  auto agent = make_agent(cfg, kind, spec, init_rng);
  rl::ReplayBuffer buffer(spec.state_dim, spec.action_dim, static_cast<std::size_t>(cfg.total_steps));

  const auto t0 = std::chrono::steady_clock::now();
  SeedRun run;
  run.seed = seed;
  std::int64_t episode = 0;
  double loss_sum = 0.0;
  std::int64_t loss_count = 0;
  std::int64_t round = 0;

  auto record = [&](std::int64_t step) {
    const auto ev = evaluate(cfg, *agent, *eval_env, seed, round++);
    MetricsRow row;
    row.step = step;
    row.episode = episode;
    row.eval_return = ev.mean_return;
    if (loss_count > 0) row.critic_loss = loss_sum / static_cast<double>(loss_count);
    if (ev.rates) {
      row.selector_tpr = ev.rates->tpr;
      row.selector_fdr = ev.rates->fdr;
      run.selector_rates = ev.rates;
    }
    if (const auto cv = agent->curriculum(std::max<std::int64_t>(0, step - cfg.warmup_steps))) {
      row.lambda = cv->lambda;
      row.p_r = cv->p_r;
    }
    if (cfg.timing)
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    loss_sum = 0.0;
    loss_count = 0;
    run.rows.push_back(row);
    if (csv) *csv << format_row(row) << '\n' << std::flush;
  };

  if (csv) *csv << metrics_header() << '\n' << std::flush;
  record(0);

  Vector s = env->reset(env_rng);
  for (std::int64_t t = 0; t < cfg.total_steps; ++t) {
    if (t == cfg.warmup_steps) agent->on_warmup_complete(buffer, selector_rng);
    const auto mode = t < cfg.warmup_steps ? rl::ActMode::Warmup : rl::ActMode::Explore;
    const Vector a = agent->act(s, mode, act_rng);
    const auto tr = envs::wrapped_step(*env, a);
    buffer.push(tr);
    s = tr.s_next;
    if (tr.done) {
      s = env->reset(env_rng);
      ++episode;
    }
    if (t >= cfg.warmup_steps) {
      const auto batch = buffer.sample(static_cast<std::size_t>(cfg.batch_size), buffer_rng);
      const auto diag = agent->update(batch, update_rng, t - cfg.warmup_steps);
      if (std::isfinite(diag.critic_loss)) {
        loss_sum += diag.critic_loss;
        ++loss_count;
      }
    }
    if ((t + 1) % cfg.eval_interval == 0) record(t + 1);
  }
  if (run.rows.back().step != cfg.total_steps) record(cfg.total_steps);

  run.auc = curve_auc(run.rows);
  run.final_return = final_window_mean(run.rows);
  return run;
}

namespace {

json per_seed_json(const SeedRun& r) {
  json j;
  j["seed"] = r.seed;
  j["auc"] = r.auc;
  j["final_return"] = r.final_return;
  if (r.selector_rates) {
    j["selector_tpr"] = r.selector_rates->tpr;
    j["selector_fdr"] = r.selector_rates->fdr;
  }
  return j;
}

}  // namespace

std::vector<AgentSummary> run_rl(const RunConfig& cfg) {
  validate(cfg);
  std::filesystem::create_directories(cfg.out);

  struct Job {
    std::size_t agent;
    std::size_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < cfg.agents.size(); ++a)
    for (std::size_t k = 0; k < cfg.seeds.size(); ++k) jobs.push_back({a, k});

  std::vector<AgentSummary> summaries(cfg.agents.size());
  for (std::size_t a = 0; a < cfg.agents.size(); ++a) {
    summaries[a].agent = cfg.agents[a];
    summaries[a].runs.resize(cfg.seeds.size());
    std::filesystem::create_directories(cfg.out / to_string(cfg.agents[a]));
  }

  parallel_for(jobs.size(), worker_count(cfg), [&](std::size_t i) {
    const auto [a, k] = jobs[i];
    const auto seed = cfg.seeds[k];
    const auto path = cfg.out / to_string(cfg.agents[a]) / ("curve_seed" + std::to_string(seed) + ".csv");
    std::ofstream csv(path, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + path.string());
    summaries[a].runs[k] = run_rl_seed(cfg, cfg.agents[a], seed, &csv);
  });

  json root;
  root["env"] = cfg.env;
  root["redundant"] = cfg.n_red;
  root["steps"] = cfg.total_steps;
  root["eval_interval"] = cfg.eval_interval;
  root["seeds"] = cfg.seeds;
  root["agents"] = json::array();
  std::vector<CurveSeries> curves;
  for (auto& s : summaries) {
    std::vector<double> aucs, finals;
    for (const auto& r : s.runs) {
      aucs.push_back(r.auc);
      finals.push_back(r.final_return);
    }
    const auto auc = mean_std(aucs);
    const auto fin = mean_std(finals);
    s.auc_mean = auc.mean;
    s.auc_std = auc.std;
    s.final_mean = fin.mean;
    s.final_std = fin.std;

    json j;
    j["agent"] = to_string(s.agent);
    if (s.agent == AgentKind::Oracle)
      j["note"] = "redundant action dimensions removed; --redundant ignored for stepping";
    j["auc_mean"] = s.auc_mean;
    j["auc_std"] = s.auc_std;
    j["final_mean"] = s.final_mean;
    j["final_std"] = s.final_std;
    j["runs"] = json::array();
    for (const auto& r : s.runs) j["runs"].push_back(per_seed_json(r));
    root["agents"].push_back(j);

    CurveSeries c;
    c.label = to_string(s.agent);
    for (const auto& row : s.runs.front().rows) c.x.push_back(static_cast<double>(row.step));
    for (const auto& r : s.runs) {
      std::vector<double> y;
      for (const auto& row : r.rows) y.push_back(row.eval_return);
      c.runs.push_back(std::move(y));
    }
    curves.push_back(std::move(c));
  }
  write_text(cfg.out / "summary.json", root.dump(2) + "\n");
  write_text(cfg.out / "curves.svg", emit_svg(curves, cfg.env + " (+" + std::to_string(cfg.n_red) + " redundant)",
                                              "environment steps", "evaluation return"));
  return summaries;
}

// --- synthetic -------------------------------------------------------------------------

SynthSummary run_synthetic_seeds(const RunConfig& cfg) {
  validate(cfg);
  const auto variant = *synth::parse_variant(cfg.dataset);
  synth::InvaseConfig icfg;
  icfg.iterations = cfg.iterations;
  icfg.batch_size = cfg.synth_batch;
  icfg.selector_lr = cfg.synth_lr;
  icfg.predictor_lr = cfg.synth_lr;
  icfg.penalty_mode = cfg.synth_penalty;
  const selection::Curriculum curriculum{cfg.lambda_start, effective_lambda_end(cfg), cfg.pr_start, cfg.pr_end, 1};

  SynthSummary out;
  out.seeds.resize(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), worker_count(cfg), [&](std::size_t k) {
    const auto seed = cfg.seeds[k];
    Rng data_rng = rng_tree(seed, {"synth", "data"});
    Rng train_rng = rng_tree(seed, {"synth", "train"});
    const auto data = synth::make_dataset({variant, cfg.dim, cfg.n_samples}, data_rng);
    out.seeds[k] = {seed, synth::train_supervised_invase(data, curriculum, icfg, train_rng)};
  });

  const std::size_t iters = out.seeds.front().report.per_iteration.size();
  for (std::size_t i = 0; i < iters; ++i) {
    std::vector<double> tpr, fdr;
    for (const auto& s : out.seeds) {
      tpr.push_back(s.report.per_iteration[i].tpr);
      fdr.push_back(s.report.per_iteration[i].fdr);
    }
    const auto t = mean_std(tpr);
    const auto f = mean_std(fdr);
    out.mean.push_back({t.mean, f.mean});
    out.std.push_back({t.std, f.std});
  }
  return out;
}

SynthSummary run_synthetic(const RunConfig& cfg) {
  auto summary = run_synthetic_seeds(cfg);
  std::filesystem::create_directories(cfg.out);

  json root;
  root["dataset"] = cfg.dataset;
  root["dim"] = cfg.dim;
  root["samples"] = cfg.n_samples;
  root["iterations"] = cfg.iterations;
  root["curriculum"] = {{"lambda_start", cfg.lambda_start},
                        {"lambda_end", effective_lambda_end(cfg)},
                        {"pr_start", cfg.pr_start},
                        {"pr_end", cfg.pr_end}};
  root["seeds"] = cfg.seeds;
  root["selection"] = json::array();
  for (std::size_t i = 0; i < summary.mean.size(); ++i) {
    root["selection"].push_back({{"iteration", i + 1},
                                 {"tpr_mean", summary.mean[i].tpr},
                                 {"tpr_std", summary.std[i].tpr},
                                 {"fdr_mean", summary.mean[i].fdr},
                                 {"fdr_std", summary.std[i].fdr}});
  }
  root["per_seed"] = json::array();
  for (const auto& s : summary.seeds) {
    json j;
    j["seed"] = s.seed;
    j["tpr"] = json::array();
    j["fdr"] = json::array();
    for (const auto& r : s.report.per_iteration) {
      j["tpr"].push_back(r.tpr);
      j["fdr"].push_back(r.fdr);
    }
    j["final_critic_loss"] = s.report.final_critic_loss;
    j["final_baseline_loss"] = s.report.final_baseline_loss;
    root["per_seed"].push_back(j);
  }
  write_text(cfg.out / "report.json", root.dump(2) + "\n");

  std::ofstream probs(cfg.out / "probs.csv", std::ios::binary);
  if (!probs) throw std::runtime_error("cannot write probs.csv");
  probs << "seed,sample";
  for (int j = 0; j < cfg.dim; ++j) probs << ",p" << (j + 1);
  probs << '\n';
  char buf[32];
  for (const auto& s : summary.seeds) {
    const Matrix& p = s.report.test_probs;
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
      probs << s.seed << ',' << c;
      for (Eigen::Index r = 0; r < p.rows(); ++r) {
        std::snprintf(buf, sizeof buf, ",%.6g", p(r, c));
        probs << buf;
      }
      probs << '\n';
    }
  }

  std::vector<CurveSeries> series(2);
  series[0].label = "TPR";
  series[1].label = "FDR";
  for (std::size_t i = 0; i < summary.mean.size(); ++i)
    for (auto& c : series) c.x.push_back(static_cast<double>(i + 1));
  for (const auto& s : summary.seeds) {
    std::vector<double> tpr, fdr;
    for (const auto& r : s.report.per_iteration) {
      tpr.push_back(r.tpr);
      fdr.push_back(r.fdr);
    }
    series[0].runs.push_back(std::move(tpr));
    series[1].runs.push_back(std::move(fdr));
  }
  write_text(cfg.out / "selection.svg",
             emit_svg(series, cfg.dataset + ", " + std::to_string(cfg.dim) + " features", "selection iteration", "percent"));
  return summary;
}

}  // namespace swar::harness
