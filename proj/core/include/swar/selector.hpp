#pragma once

// Instance-wise variable selection with a stochastic mask generator trained by
// policy gradient, plus the curriculum schedules and mask algebra around it.

#include <cstdint>
#include <initializer_list>
#include <vector>

#include "swar/nn.hpp"
#include "swar/rng.hpp"

namespace swar::selection {

using nn::Matrix;
using nn::RowVector;
using nn::Vector;

/// Binary selection vector.
class Mask {
 public:
  Mask() = default;
  explicit Mask(std::size_t size, bool value = false) : bits_(size, value ? 1 : 0) {}
  Mask(std::initializer_list<int> bits);
  static Mask from_vector(const Vector& v);  // nonzero -> selected
  static Mask from_indices(std::size_t size, const std::vector<int>& indices);

  std::size_t size() const { return bits_.size(); }
  std::size_t cardinality() const;
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool value) { bits_[i] = value ? 1 : 0; }

  /// Selected positions, ascending (0-based).
  std::vector<int> indices() const;
  Vector to_vector() const;
  Mask complement() const;

  bool operator==(const Mask&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

struct SelectorConfig {
  std::vector<int> hidden{100, 100};
  double lr = 1e-4;
};

/// f_theta(.|x): maps an input vector to per-dimension selection
/// probabilities through a terminal sigmoid.
class SelectorModel {
 public:
  SelectorModel() = default;
  SelectorModel(int input_dim, int output_dim, const SelectorConfig& config, Rng& rng);
  explicit SelectorModel(nn::DenseNet net);

  int input_dim() const { return net_.input_dim(); }
  int output_dim() const { return net_.output_dim(); }

  nn::DenseNet& net() { return net_; }
  const nn::DenseNet& net() const { return net_; }
  nn::AdamState& optimizer() { return adam_; }

  bool operator==(const SelectorModel& other) const { return net_ == other.net_; }

 private:
  nn::DenseNet net_;
  nn::AdamState adam_;
};

/// Selection probabilities clamped to [1e-7, 1 - 1e-7].
Vector select_probs(const SelectorModel& selector, const Vector& x);
/// Column-wise batch version: x is d_in x B, result d_out x B.
Matrix select_probs(const SelectorModel& selector, const Matrix& x);

/// Independent Bernoulli draw per dimension.
Mask sample_mask(const Vector& probs, Rng& rng);
/// Batch version returning a 0/1 matrix shaped like probs.
Matrix sample_masks(const Matrix& probs, Rng& rng);

/// m_i = 1 iff p_i >= tau.
Mask threshold_mask(const Vector& probs, double tau = 0.5);
Matrix threshold_masks(const Matrix& probs, double tau = 0.5);

/// x where selected, z elsewhere.
Vector mask_apply(const Vector& x, const Mask& mask, const Vector& z);
Vector mask_apply(const Vector& x, const Mask& mask);  // z = 0
/// Batch version with 0/1 mask matrix and z = 0.
Matrix mask_apply(const Matrix& x, const Matrix& masks);

/// sum_i m_i ln p_i + (1 - m_i) ln(1 - p_i), with clamped probabilities.
double log_prob(const Vector& probs, const Mask& mask);
RowVector log_probs(const Matrix& probs, const Matrix& masks);

enum class PenaltyMode {
  Count,       // lambda * | |m|_0 - d * p_r |
  Proportion,  // lambda * | |m|_0 / d - p_r |
};

struct SelectionPenaltyParams {
  double lambda = 0.0;
  double p_r = 0.0;
  int d = 0;
  PenaltyMode mode = PenaltyMode::Count;
};

double selection_penalty(double cardinality, const SelectionPenaltyParams& pen);

/// (l_baseline - l_selected) - penalty; larger is better for the sampled mask.
double selector_reward(double l_baseline, double l_selected, const Mask& mask,
                       const SelectionPenaltyParams& pen);
RowVector selector_rewards(const RowVector& l_baseline, const RowVector& l_selected,
                           const Matrix& masks, const SelectionPenaltyParams& pen);

/// One Adam ascent step on reward * log_prob(select_probs(x), mask).
void selector_update(SelectorModel& selector, const Vector& x, const Mask& mask, double reward,
                     double lr);
/// Batch version: ascends mean_i reward_i * log_prob_i, minus
/// logit_decay * mean_i sum_j z_ij^2 on the pre-sigmoid outputs.
void selector_update(SelectorModel& selector, const Matrix& x, const Matrix& masks,
                     const RowVector& rewards, double lr, double logit_decay = 0.0);

struct Curriculum {
  double lambda_start = 0.0;
  double lambda_end = 0.2;
  double pr_start = 0.5;
  double pr_end = 0.0;
  std::int64_t total_steps = 1;

  /// Fixed endpoint values for every step (no annealing).
  static Curriculum fixed(double lambda, double p_r);
};

struct CurriculumValues {
  double lambda;
  double p_r;
};

/// Linear interpolation from start to end over total_steps, clamped.
CurriculumValues curriculum_at(const Curriculum& c, std::int64_t step);

/// Repeatedly thresholds and re-masks: x1 = apply(x, m1, z), m2 from x1, ...
std::vector<Mask> iterative_select(const SelectorModel& selector, const Vector& x, int n_iters,
                                   const Vector& z);
std::vector<Mask> iterative_select(const SelectorModel& selector, const Vector& x, int n_iters);
/// Batch version with z = 0; one d x B mask matrix per iteration.
std::vector<Matrix> iterative_select(const SelectorModel& selector, const Matrix& x, int n_iters);

Mask mask_or(const Mask& a, const Mask& b);

/// m OR r, where r turns on exactly n2 - |m|_0 randomly chosen unselected
/// positions; the result is a superset of m with cardinality n2.
Mask extend_mask(const Mask& m, std::size_t n2, Rng& rng);

}  // namespace swar::selection
