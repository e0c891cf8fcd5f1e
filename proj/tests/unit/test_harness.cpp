#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "swar/error.hpp"
#include "swar/harness.hpp"

using namespace swar;
using namespace swar::harness;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("swar_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

RunConfig tiny_rl() {
  RunConfig cfg;
  cfg.mode = Mode::RL;
  cfg.env = "pendulum";
  cfg.n_red = 3;
  cfg.total_steps = 600;
  cfg.warmup_steps = 200;
  cfg.eval_interval = 200;
  cfg.eval_episodes = 2;
  cfg.hidden = 16;
  cfg.batch_size = 16;
  cfg.selector_epochs = 2;
  cfg.seeds = {0, 1};
  cfg.threads = 2;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("seed lists") {
  CHECK(parse_seeds("0,1,2") == std::vector<std::uint64_t>{0, 1, 2});
  CHECK(parse_seeds("0..4") == std::vector<std::uint64_t>{0, 1, 2, 3, 4});
  CHECK(parse_seeds("0..2,7") == std::vector<std::uint64_t>{0, 1, 2, 7});
  CHECK_THROWS_AS(parse_seeds(""), ContractError);
  CHECK_THROWS_AS(parse_seeds("3..1"), ContractError);
  CHECK_THROWS_AS(parse_seeds("a"), ContractError);
}

TEST_CASE("json config mirrors flag names") {
  RunConfig cfg;
  apply_json_config(cfg, R"({"env": "maze", "agent": "oracle,dyn-swar", "redundant": 7, "seeds": "0..2",
                             "lambda-end": 0.3, "pr-start": 0.4, "eval-interval": 500, "steps": 9000})");
  CHECK(cfg.env == "maze");
  CHECK(cfg.agents == std::vector<AgentKind>{AgentKind::Oracle, AgentKind::DynSWAR});
  CHECK(cfg.n_red == 7);
  CHECK(cfg.seeds.size() == 3);
  CHECK(cfg.lambda_end == 0.3);
  CHECK(cfg.pr_start == 0.4);
  CHECK(cfg.eval_interval == 500);
  CHECK(cfg.total_steps == 9000);
  apply_json_config(cfg, R"({"seeds": [4, 9], "agent": ["td3"]})");
  CHECK(cfg.seeds == std::vector<std::uint64_t>{4, 9});
  CHECK_THROWS_AS(apply_json_config(cfg, R"({"bogus": 1})"), ContractError);
  CHECK_THROWS_AS(apply_json_config(cfg, R"({"dim": "eleven"})"), ContractError);
  CHECK_THROWS_AS(apply_json_config(cfg, "[1, 2]"), ContractError);
  CHECK_THROWS_AS(apply_json_config(cfg, R"({"agent": "sac"})"), ContractError);
}

TEST_CASE("lambda endpoint default depends on the mode") {
  RunConfig cfg;
  CHECK(effective_lambda_end(cfg) == 0.2);
  cfg.mode = Mode::Synth;
  CHECK(effective_lambda_end(cfg) == 0.1);
  cfg.lambda_end = 0.3;
  CHECK(effective_lambda_end(cfg) == 0.3);
}

TEST_CASE("validation") {
  RunConfig cfg;
  cfg.mode = Mode::Synth;
  cfg.dataset = "syn9";
  CHECK_THROWS_WITH_AS(validate(cfg), doctest::Contains("syn1, syn2"), ContractError);
  cfg.dataset = "syn2";
  cfg.dim = 5;
  CHECK_THROWS_AS(validate(cfg), ContractError);
  cfg = RunConfig{};
  cfg.seeds.clear();
  CHECK_THROWS_AS(validate(cfg), ContractError);
  cfg = RunConfig{};
  cfg.env = "walker";
  CHECK_THROWS_AS(validate(cfg), ContractError);
  cfg = RunConfig{};
  cfg.agents = {AgentKind::DynSWAR};
  cfg.warmup_steps = 10;
  CHECK_THROWS_AS(validate(cfg), ContractError);
}

TEST_CASE("metrics rows: header, blanks, round trip") {
  CHECK(metrics_header() == "step,episode,return,critic_loss,selector_tpr,selector_fdr,lambda,p_r,wall_ms");
  MetricsRow row;
  row.step = 2000;
  row.episode = 10;
  row.eval_return = -123.25;
  CHECK(format_row(row) == "2000,10,-123.25,,,,,,");
  row.selector_tpr = 100.0;
  row.critic_loss = 0.1;
  const auto path = scratch("row.csv");
  {
    std::ofstream out(path);
    out << metrics_header() << '\n' << format_row(row) << '\n';
  }
  const auto back = read_curve_csv(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].critic_loss == 0.1);
  CHECK(back[0].selector_tpr == 100.0);
  CHECK_FALSE(back[0].selector_fdr.has_value());
  CHECK_FALSE(back[0].wall_ms.has_value());
  std::filesystem::remove(path);
}

TEST_CASE("AUC and final window") {
  std::vector<MetricsRow> rows(3);
  rows[0].step = 0, rows[0].eval_return = 0.0;
  rows[1].step = 10, rows[1].eval_return = 10.0;
  rows[2].step = 20, rows[2].eval_return = 10.0;
  CHECK(curve_auc(rows) == doctest::Approx(7.5));
  CHECK(final_window_mean(rows, 2) == 10.0);
  CHECK(final_window_mean(rows, 10) == doctest::Approx(20.0 / 3));
  CHECK_THROWS_AS(curve_auc({}), ContractError);
}

TEST_CASE("svg: band only with several runs, legend, well-formed") {
  CHECK_THROWS_AS(emit_svg({}, "t", "x", "y"), ContractError);
  CurveSeries one{"td3", {0, 1, 2}, {{1, 2, 3}}};
  const auto single = emit_svg({one}, "t", "steps", "return");
  CHECK(single.find("<polygon") == std::string::npos);
  CurveSeries two{"oracle & co", {0, 1, 2}, {{1, 2, 3}, {2, 3, 5}}};
  const auto both = emit_svg({one, two}, "a < b", "steps", "return");
  CHECK(both.find("<polygon") != std::string::npos);
  CHECK(both.find("oracle &amp; co") != std::string::npos);
  CHECK(both.find("a &lt; b") != std::string::npos);
  // crude well-formedness: every opened element is closed
  std::size_t opens = 0, closes = 0;
  for (std::size_t i = 0; i + 1 < both.size(); ++i) {
    if (both[i] != '<' || both[i + 1] == '?') continue;
    if (both[i + 1] == '/') {
      ++closes;
      continue;
    }
    const auto end = both.find('>', i);
    if (both[end - 1] != '/') ++opens;
  }
  CHECK(opens == closes);
}

TEST_CASE("rl run writes per-agent curves and a summary consistent with them") {
  auto cfg = tiny_rl();
  cfg.agents = {AgentKind::DynSWAR, AgentKind::Oracle, AgentKind::TD3, AgentKind::TDSWAR};
  cfg.out = scratch("rl");
  const auto summaries = run_rl(cfg);
  REQUIRE(summaries.size() == 4);

  const auto summary = nlohmann::json::parse(slurp(cfg.out / "summary.json"));
  const auto& agents = summary.at("agents");
  CHECK(agents[0].at("agent") == "dyn-swar");
  CHECK(agents[1].at("agent") == "oracle");
  CHECK(agents[1].contains("note"));
  CHECK(agents[3].at("agent") == "td-swar");
  CHECK(std::filesystem::exists(cfg.out / "curves.svg"));

  for (std::size_t a = 0; a < summaries.size(); ++a) {
    std::vector<double> aucs;
    for (std::uint64_t seed : cfg.seeds) {
      const auto rows = read_curve_csv(cfg.out / to_string(cfg.agents[a]) / ("curve_seed" + std::to_string(seed) + ".csv"));
      REQUIRE(rows.size() == 4);  // steps 0, 200, 400, 600
      CHECK(rows.back().step == 600);
      for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].step > rows[i - 1].step);
      const bool has_selector = cfg.agents[a] == AgentKind::TDSWAR || cfg.agents[a] == AgentKind::DynSWAR;
      CHECK(rows.back().selector_tpr.has_value() == has_selector);
      CHECK_FALSE(rows.back().wall_ms.has_value());
      aucs.push_back(curve_auc(rows));
    }
    const double mean = (aucs[0] + aucs[1]) / 2;
    CHECK(agents[a].at("auc_mean").get<double>() == doctest::Approx(mean).epsilon(1e-12));
    CHECK(agents[a].at("runs")[1].at("auc").get<double>() == aucs[1]);
  }
}

TEST_CASE("rl run is reproducible and independent of thread count") {
  auto cfg = tiny_rl();
  cfg.agents = {AgentKind::TD3};
  cfg.out = scratch("rl_a");
  run_rl(cfg);
  cfg.threads = 1;
  cfg.out = scratch("rl_b");
  run_rl(cfg);
  CHECK(slurp(std::filesystem::temp_directory_path() / "swar_test_rl_a" / "td3" / "curve_seed1.csv") ==
        slurp(std::filesystem::temp_directory_path() / "swar_test_rl_b" / "td3" / "curve_seed1.csv"));
}

TEST_CASE("oracle ignores the redundancy setting") {
  auto cfg = tiny_rl();
  cfg.seeds = {3};
  cfg.n_red = 0;
  const auto a = run_rl_seed(cfg, AgentKind::Oracle, 3);
  cfg.n_red = 50;
  const auto b = run_rl_seed(cfg, AgentKind::Oracle, 3);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].eval_return == b.rows[i].eval_return);
}

TEST_CASE("synthetic run writes report and probabilities") {
  RunConfig cfg;
  cfg.mode = Mode::Synth;
  cfg.dataset = "syn4";
  cfg.n_samples = 400;
  cfg.iterations = 20;
  cfg.seeds = {0, 1};
  cfg.out = scratch("synth");
  const auto s = run_synthetic(cfg);
  CHECK(s.mean.size() == 4);
  const auto report = nlohmann::json::parse(slurp(cfg.out / "report.json"));
  CHECK(report.at("selection").size() == 4);
  CHECK(report.at("selection")[3].at("iteration") == 4);
  CHECK(report.at("per_seed").size() == 2);
  std::ifstream probs(cfg.out / "probs.csv");
  std::string header;
  std::getline(probs, header);
  CHECK(header.rfind("seed,sample,p1,", 0) == 0);
  std::size_t lines = 0;
  for (std::string l; std::getline(probs, l);) ++lines;
  CHECK(lines == 2 * 200);
  CHECK(std::filesystem::exists(cfg.out / "selection.svg"));
}

TEST_CASE("worker count honours SWAR_THREADS") {
  RunConfig cfg;
  cfg.threads = 3;
  CHECK(worker_count(cfg) == 3);
  cfg.threads = 0;
  setenv("SWAR_THREADS", "2", 1);
  CHECK(worker_count(cfg) == 2);
  unsetenv("SWAR_THREADS");
  CHECK(worker_count(cfg) >= 1);
}
