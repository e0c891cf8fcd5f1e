#include "swar/td3.hpp"

namespace swar::rl {

ReplayBuffer::ReplayBuffer(int state_dim, int action_dim, std::size_t capacity)
    : capacity_(capacity),
      s_(state_dim, static_cast<Eigen::Index>(capacity)),
      a_(action_dim, static_cast<Eigen::Index>(capacity)),
      s_next_(state_dim, static_cast<Eigen::Index>(capacity)),
      r_(static_cast<Eigen::Index>(capacity)),
      not_terminal_(static_cast<Eigen::Index>(capacity)) {
  if (capacity == 0) throw ContractError("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::push(const envs::Transition& t) {
  if (t.s.size() != s_.rows() || t.s_next.size() != s_.rows() || t.a.size() != a_.rows()) {
    throw ContractError("ReplayBuffer::push: transition shape does not match buffer");
  }
  const auto c = static_cast<Eigen::Index>(cursor_);
  s_.col(c) = t.s;
  a_.col(c) = t.a;
  s_next_.col(c) = t.s_next;
  r_(c) = t.r;
  not_terminal_(c) = t.terminal ? 0.0 : 1.0;
  cursor_ = (cursor_ + 1) % capacity_;
  if (size_ < capacity_) ++size_;
}

std::size_t ReplayBuffer::slot(std::size_t i) const {
  if (i >= size_) throw ContractError("ReplayBuffer::slot: index out of range");
  const std::size_t oldest = size_ < capacity_ ? 0 : cursor_;
  return (oldest + i) % capacity_;
}

Batch ReplayBuffer::gather(const std::vector<std::size_t>& slots) const {
  const auto n = static_cast<Eigen::Index>(slots.size());
  Batch b;
  b.s.resize(s_.rows(), n);
  b.a.resize(a_.rows(), n);
  b.s_next.resize(s_.rows(), n);
  b.r.resize(n);
  b.not_terminal.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto c = static_cast<Eigen::Index>(slots[static_cast<std::size_t>(k)]);
    b.s.col(k) = s_.col(c);
    b.a.col(k) = a_.col(c);
    b.s_next.col(k) = s_next_.col(c);
    b.r(k) = r_(c);
    b.not_terminal(k) = not_terminal_(c);
  }
  return b;
}

Batch ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (size_ == 0) throw ContractError("ReplayBuffer::sample: buffer is empty");
  std::vector<std::size_t> slots(n);
  for (auto& s : slots) s = rng.index(size_);
  return gather(slots);
}

Batch ReplayBuffer::all() const {
  std::vector<std::size_t> slots(size_);
  for (std::size_t i = 0; i < size_; ++i) slots[i] = slot(i);
  return gather(slots);
}

}  // namespace swar::rl
