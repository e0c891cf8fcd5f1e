#pragma once

// Syn1-Syn6 instance-wise selection benchmarks and the supervised
// selector/critic/baseline training loop evaluated by TPR/FDR.
//
// Feature indices are 0-based throughout: "x1" in the dataset definitions is
// column 0 here, and the regime switch "x11" is column 10.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swar/nn.hpp"
#include "swar/rng.hpp"
#include "swar/selector.hpp"

namespace swar::synth {

using nn::Matrix;
using nn::RowVector;
using nn::Vector;

enum class Variant { Syn1, Syn2, Syn3, Syn4, Syn5, Syn6 };

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view name);
/// "syn1, syn2, ..., syn6"
std::string valid_variant_names();

struct SynSpec {
  Variant variant = Variant::Syn1;
  int input_dim = 11;
  int n_samples = 20000;
};

struct SynDataset {
  SynSpec spec;
  Matrix x;      // input_dim x n
  RowVector y;   // n labels in {0, 1}
  std::vector<std::vector<int>> relevant;  // per-sample relevant indices
  std::vector<int> train;
  std::vector<int> test;
};

/// n samples of i.i.d. standard normal features, one sample per column.
Matrix gen_features(int n, int d, Rng& rng);

/// The "logit" term; P(Y = 1 | x) = 1 / (1 + logit).
double logit(const SynSpec& spec, const Vector& x);
double label_probability(const SynSpec& spec, const Vector& x);

RowVector gen_labels(const SynSpec& spec, const Matrix& x, Rng& rng);

/// Ground-truth relevant features; index 10 counts as relevant for Syn4-6.
std::vector<int> relevant_set(const SynSpec& spec, const Vector& x);

/// Features, labels, relevant sets and a 50/50 train/test split.
SynDataset make_dataset(const SynSpec& spec, Rng& rng);

struct Rates {
  double tpr = 0.0;  // percent
  double fdr = 0.0;  // percent
};

/// tpr = 100 |S n R| / |R|; fdr = 100 |S \ R| / |S| (0 when S is empty).
Rates tpr_fdr(const std::vector<int>& selected, const std::vector<int>& relevant);

struct InvaseConfig {
  int iterations = 10000;
  int batch_size = 128;
  std::vector<int> selector_hidden{100, 100};
  std::vector<int> predictor_hidden{200, 200};
  double selector_lr = 1e-4;
  double predictor_lr = 1e-4;
  /// Fraction of iterations over which the curriculum is annealed.
  double curriculum_fraction = 0.8;
  selection::PenaltyMode penalty_mode = selection::PenaltyMode::Proportion;
  /// Subtract the minibatch mean from the selector rewards.
  bool center_rewards = true;
  /// Weight of the squared-logit penalty on the selector output.
  double logit_decay = 1e-3;
  int eval_iterations = 4;
};

struct SelectionReport {
  std::vector<Rates> per_iteration;  // iterations 1..eval_iterations
  double final_critic_loss = 0.0;
  double final_baseline_loss = 0.0;
  Matrix test_probs;  // selector probabilities on the test split, d x n_test
};

/// Jointly trains selector, critic (masked input plus mask) and baseline
/// (full input) with cross-entropy, then reports per-iteration TPR/FDR of
/// the iterated threshold masks on the test split.
/// The curriculum's total_steps is overridden by curriculum_fraction * iterations.
SelectionReport train_supervised_invase(const SynDataset& data, selection::Curriculum curriculum,
                                        const InvaseConfig& config, Rng& rng);

/// Header "x1,...,xd,y", one row per sample.
void write_dataset_csv(const SynDataset& data, const std::filesystem::path& path);
/// Reads a CSV written by write_dataset_csv; relevant sets and the split are
/// rebuilt from `spec` (first half train, second half test).
SynDataset read_dataset_csv(const SynSpec& spec, const std::filesystem::path& path);

}  // namespace swar::synth
