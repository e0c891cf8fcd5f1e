#include "swar/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

namespace swar::synth {
namespace {

constexpr std::array<std::string_view, 6> kNames{"syn1", "syn2", "syn3", "syn4", "syn5", "syn6"};

double syn1(const Vector& x) { return std::exp(x(0) * x(1)); }

double syn2(const Vector& x) {
  double s = 0.0;
  for (int i = 2; i <= 5; ++i) s += x(i) * x(i);
  return std::exp(s - 4.0);
}

double syn3(const Vector& x) {
  return -10.0 * std::sin(2.0 * x(6)) + 2.0 * std::abs(x(7)) + x(8) + std::exp(-x(9));
}

const std::vector<int> kSyn1Set{0, 1};
const std::vector<int> kSyn2Set{2, 3, 4, 5};
const std::vector<int> kSyn3Set{6, 7, 8, 9};
constexpr int kSwitch = 10;

std::vector<int> with_switch(const std::vector<int>& base) {
  std::vector<int> out = base;
  out.push_back(kSwitch);
  return out;
}

void check_dim(const SynSpec& spec, const Vector& x) {
  if (x.size() < 11 || x.size() != spec.input_dim) {
    throw ContractError("synthetic: feature vector must have input_dim >= 11 entries");
  }
}

}  // namespace

std::string_view to_string(Variant v) { return kNames[static_cast<std::size_t>(v)]; }

std::optional<Variant> parse_variant(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<Variant>(i);
  }
  return std::nullopt;
}

std::string valid_variant_names() {
  std::string out;
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (i) out += ", ";
    out += kNames[i];
  }
  return out;
}

Matrix gen_features(int n, int d, Rng& rng) {
  if (n <= 0 || d <= 0) throw ContractError("gen_features: n and d must be positive");
  Matrix x(d, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < d; ++r) x(r, c) = rng.normal();
  return x;
}

double logit(const SynSpec& spec, const Vector& x) {
  check_dim(spec, x);
  const bool low = x(kSwitch) < 0.0;
  switch (spec.variant) {
    case Variant::Syn1: return syn1(x);
    case Variant::Syn2: return syn2(x);
    case Variant::Syn3: return syn3(x);
    case Variant::Syn4: return low ? syn1(x) : syn2(x);
    case Variant::Syn5: return low ? syn1(x) : syn3(x);
    case Variant::Syn6: return low ? syn2(x) : syn3(x);
  }
  return 0.0;
}

double label_probability(const SynSpec& spec, const Vector& x) { return 1.0 / (1.0 + logit(spec, x)); }

RowVector gen_labels(const SynSpec& spec, const Matrix& x, Rng& rng) {
  RowVector y(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    y(c) = rng.bernoulli(label_probability(spec, x.col(c))) ? 1.0 : 0.0;
  }
  return y;
}

std::vector<int> relevant_set(const SynSpec& spec, const Vector& x) {
  check_dim(spec, x);
  const bool low = x(kSwitch) < 0.0;
  switch (spec.variant) {
    case Variant::Syn1: return kSyn1Set;
    case Variant::Syn2: return kSyn2Set;
    case Variant::Syn3: return kSyn3Set;
    case Variant::Syn4: return with_switch(low ? kSyn1Set : kSyn2Set);
    case Variant::Syn5: return with_switch(low ? kSyn1Set : kSyn3Set);
    case Variant::Syn6: return with_switch(low ? kSyn2Set : kSyn3Set);
  }
  return {};
}

namespace {

void fill_derived(SynDataset& data) {
  const int n = static_cast<int>(data.x.cols());
  data.relevant.clear();
  data.relevant.reserve(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) data.relevant.push_back(relevant_set(data.spec, data.x.col(c)));
  data.train.clear();
  data.test.clear();
  for (int c = 0; c < n; ++c) (c < n / 2 ? data.train : data.test).push_back(c);
}

}  // namespace

SynDataset make_dataset(const SynSpec& spec, Rng& rng) {
  if (spec.input_dim < 11) throw ContractError("make_dataset: input_dim must be >= 11");
  SynDataset data;
  data.spec = spec;
  data.x = gen_features(spec.n_samples, spec.input_dim, rng);
  data.y = gen_labels(spec, data.x, rng);
  fill_derived(data);
  return data;
}

Rates tpr_fdr(const std::vector<int>& selected, const std::vector<int>& relevant) {
  if (relevant.empty()) throw ContractError("tpr_fdr: relevant set is empty");
  std::size_t hits = 0;
  for (int s : selected) {
    for (int r : relevant) {
      if (s == r) {
        ++hits;
        break;
      }
    }
  }
  Rates out;
  out.tpr = 100.0 * static_cast<double>(hits) / static_cast<double>(relevant.size());
  out.fdr = selected.empty() ? 0.0
                             : 100.0 * static_cast<double>(selected.size() - hits) / static_cast<double>(selected.size());
  return out;
}

SelectionReport train_supervised_invase(const SynDataset& data, selection::Curriculum curriculum,
                                        const InvaseConfig& config, Rng& rng) {
  if (data.train.empty() || data.test.empty()) throw ContractError("train_supervised_invase: empty split");
  const int d = static_cast<int>(data.x.rows());
  const int batch = config.batch_size;

  selection::SelectorConfig sel_cfg{config.selector_hidden, config.selector_lr};
  selection::SelectorModel selector(d, d, sel_cfg, rng);

  auto make_predictor = [&](int in) {
    std::vector<int> sizes{in};
    sizes.insert(sizes.end(), config.predictor_hidden.begin(), config.predictor_hidden.end());
    sizes.push_back(1);
    return nn::DenseNet::mlp(std::span<const int>(sizes), nn::Activation::Relu, nn::Activation::Sigmoid, rng);
  };
  nn::DenseNet critic = make_predictor(2 * d);
  nn::DenseNet baseline = make_predictor(d);
  nn::AdamState critic_adam(critic);
  nn::AdamState baseline_adam(baseline);

  curriculum.total_steps = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::llround(config.curriculum_fraction * config.iterations)));

  Matrix xb(d, batch);
  RowVector yb(batch);
  Matrix critic_in(2 * d, batch);
  SelectionReport report;

  for (int it = 0; it < config.iterations; ++it) {
    for (int k = 0; k < batch; ++k) {
      const int idx = data.train[rng.index(data.train.size())];
      xb.col(k) = data.x.col(idx);
      yb(k) = data.y(idx);
    }
    const Matrix probs = selection::select_probs(selector, xb);
    const Matrix masks = selection::sample_masks(probs, rng);
    critic_in.topRows(d) = xb.cwiseProduct(masks);
    critic_in.bottomRows(d) = masks;

    const auto c_trace = critic.trace(critic_in);
    const RowVector l_c = nn::per_sample_bce(c_trace.output(), yb);
    const auto c_loss = nn::bce_loss(c_trace.output(), yb);
    nn::adam_step(critic, critic.backward(c_trace, c_loss.grad), critic_adam, config.predictor_lr);

    const auto b_trace = baseline.trace(xb);
    const RowVector l_b = nn::per_sample_bce(b_trace.output(), yb);
    const auto b_loss = nn::bce_loss(b_trace.output(), yb);
    nn::adam_step(baseline, baseline.backward(b_trace, b_loss.grad), baseline_adam, config.predictor_lr);

    if (!std::isfinite(c_loss.value) || !std::isfinite(b_loss.value)) {
      std::ostringstream msg;
      msg << "train_supervised_invase: non-finite loss at iteration " << it << " (critic " << c_loss.value
          << ", baseline " << b_loss.value << ")";
      throw NumericError(msg.str());
    }

    const auto cv = selection::curriculum_at(curriculum, it);
    const selection::SelectionPenaltyParams pen{cv.lambda, cv.p_r, d, config.penalty_mode};
    RowVector rewards = selection::selector_rewards(l_b, l_c, masks, pen);
    if (config.center_rewards) rewards.array() -= rewards.mean();
    selection::selector_update(selector, xb, masks, rewards, config.selector_lr, config.logit_decay);

    report.final_critic_loss = c_loss.value;
    report.final_baseline_loss = b_loss.value;
  }

  Matrix x_test(d, static_cast<Eigen::Index>(data.test.size()));
  for (std::size_t k = 0; k < data.test.size(); ++k) x_test.col(static_cast<Eigen::Index>(k)) = data.x.col(data.test[k]);
  report.test_probs = selection::select_probs(selector, x_test);

  const auto iter_masks = selection::iterative_select(selector, x_test, config.eval_iterations);
  for (const Matrix& masks : iter_masks) {
    Rates mean;
    for (std::size_t k = 0; k < data.test.size(); ++k) {
      const auto selected = selection::Mask::from_vector(masks.col(static_cast<Eigen::Index>(k))).indices();
      const Rates r = tpr_fdr(selected, data.relevant[static_cast<std::size_t>(data.test[k])]);
      mean.tpr += r.tpr;
      mean.fdr += r.fdr;
    }
    mean.tpr /= static_cast<double>(data.test.size());
    mean.fdr /= static_cast<double>(data.test.size());
    report.per_iteration.push_back(mean);
  }
  return report;
}

void write_dataset_csv(const SynDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_dataset_csv: cannot open " + path.string());
  const Eigen::Index d = data.x.rows();
  for (Eigen::Index r = 0; r < d; ++r) out << 'x' << (r + 1) << ',';
  out << "y\n";
  out.precision(17);
  for (Eigen::Index c = 0; c < data.x.cols(); ++c) {
    for (Eigen::Index r = 0; r < d; ++r) out << data.x(r, c) << ',';
    out << static_cast<int>(data.y(c)) << '\n';
  }
}

SynDataset read_dataset_csv(const SynSpec& spec, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_dataset_csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ContractError("read_dataset_csv: missing header");
  const auto columns = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
  const int d = columns - 1;
  if (d != spec.input_dim) throw ContractError("read_dataset_csv: header width does not match input_dim");

  std::vector<double> values;
  std::vector<double> labels;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    int col = 0;
    while (std::getline(row, cell, ',')) {
      const double v = std::stod(cell);
      if (col < d) values.push_back(v);
      else labels.push_back(v);
      ++col;
    }
    if (col != columns) throw ContractError("read_dataset_csv: ragged row");
  }
  SynDataset data;
  data.spec = spec;
  data.spec.n_samples = static_cast<int>(labels.size());
  data.x = Eigen::Map<Matrix>(values.data(), d, static_cast<Eigen::Index>(labels.size()));
  data.y = Eigen::Map<RowVector>(labels.data(), static_cast<Eigen::Index>(labels.size()));
  fill_derived(data);
  return data;
}

}  // namespace swar::synth
