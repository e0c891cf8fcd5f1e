#include <cmath>
#include <set>

#include "doctest.h"
#include "swar/error.hpp"
#include "swar/selector.hpp"
#include "swar/synthetic.hpp"

using namespace swar;
using namespace swar::selection;

namespace {

SelectorModel constant_selector(int d, double bias) {
  Rng rng(0);
  SelectorModel s(d, d, {{8}, 1e-3}, rng);
  auto& last = s.net().layers().back();
  last.weight.setZero();
  last.bias.setConstant(bias);
  return s;
}

Mask mask_of(unsigned bits, int d) {
  Mask m(d);
  for (int i = 0; i < d; ++i) m.set(i, (bits >> i) & 1u);
  return m;
}

}  // namespace

TEST_CASE("select_probs saturates and centres") {
  const Vector x = Vector::Random(4);
  CHECK(select_probs(constant_selector(4, 20.0), x).minCoeff() >= 1.0 - 1e-7);
  CHECK(select_probs(constant_selector(4, -20.0), x).maxCoeff() <= 1e-7);
  CHECK(select_probs(constant_selector(4, 0.0), x).isApproxToConstant(0.5));
  CHECK_THROWS_AS(select_probs(constant_selector(4, 0.0), Vector(Vector::Zero(3))), ContractError);
}

TEST_CASE("sample_mask extremes and cardinality band") {
  Rng rng(11);
  CHECK(sample_mask(Vector::Constant(6, 1.0 - 1e-7), rng) == Mask(6, true));
  CHECK(sample_mask(Vector::Constant(6, 1e-7), rng) == Mask(6, false));
  double total = 0.0;
  for (int i = 0; i < 10000; ++i) total += static_cast<double>(sample_mask(Vector::Constant(10, 0.5), rng).cardinality());
  const double mean = total / 10000.0;
  CHECK(mean >= 4.8);
  CHECK(mean <= 5.2);
}

TEST_CASE("sample_mask per-dimension frequencies within 3 sigma") {
  Rng rng(12);
  const Vector p{{0.05, 0.2, 0.5, 0.7, 0.93}};
  Vector freq = Vector::Zero(p.size());
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) freq += sample_mask(p, rng).to_vector();
  freq /= draws;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double sigma = std::sqrt(p(j) * (1 - p(j)) / draws);
    CHECK(std::abs(freq(j) - p(j)) <= 3 * sigma);
  }
}

TEST_CASE("mask_apply") {
  const Vector x{{3.0, -1.0, 2.0}};
  CHECK(mask_apply(x, Mask{1, 0, 1}) == Vector{{3.0, 0.0, 2.0}});
  CHECK(mask_apply(x, Mask{0, 1, 0}, Vector::Constant(3, 9.0)) == Vector{{9.0, -1.0, 9.0}});
  CHECK_THROWS_AS(mask_apply(x, Mask{1, 0}), ContractError);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Vector v = Vector::Random(7), z = Vector::Random(7);
    CHECK(mask_apply(v, Mask(7, true), z) == v);
  }
}

TEST_CASE("log_prob") {
  CHECK(log_prob(Vector{{0.5, 0.5}}, Mask{1, 0}) == doctest::Approx(2 * std::log(0.5)));
  CHECK(log_prob(Vector::Constant(3, 1.0), Mask(3, true)) == doctest::Approx(0.0).epsilon(1e-6));
  const Vector p{{0.2, 0.7, 0.4, 0.9}};
  const double expected = (p.array() * (1 - p.array())).log().sum();
  for (unsigned bits = 0; bits < 16; ++bits) {
    const Mask m = mask_of(bits, 4);
    CHECK(log_prob(p, m) + log_prob(p, m.complement()) == doctest::Approx(expected));
  }
}

TEST_CASE("selector_reward examples") {
  CHECK(selector_reward(1.0, 0.4, Mask(10), {0.0, 0.0, 10}) == doctest::Approx(0.6));
  const Mask five{1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
  CHECK(selector_reward(1.0, 0.4, five, {0.2, 0.5, 10}) == doctest::Approx(0.6));
  CHECK(selector_reward(1.0, 0.4, five, {0.2, 0.0, 10}) == doctest::Approx(-0.4));
  // all-ones over 101 dims at p_r = 0
  CHECK(selection_penalty(101, {0.2, 0.0, 101}) == doctest::Approx(20.2));
  CHECK(selection_penalty(5, {0.2, 0.0, 10, PenaltyMode::Proportion}) == doctest::Approx(0.1));
}

TEST_CASE("selector_update: zero reward, sign contract, bandit convergence") {
  SUBCASE("reward 0 leaves parameters untouched") {
    auto s = constant_selector(3, 0.0);
    const auto before = s;
    selector_update(s, Vector::Random(3), Mask{1, 0, 1}, 0.0, 1e-2);
    CHECK(s == before);
  }
  SUBCASE("sign") {
    for (int d : {1, 10}) {
      for (double reward : {1.0, -1.0}) {
        Rng rng(static_cast<std::uint64_t>(d));
        SelectorModel s(d, d, {{16}, 1e-4}, rng);
        const Vector x = Vector::Random(d);
        const Mask m = sample_mask(select_probs(s, x), rng);
        const double before = log_prob(select_probs(s, x), m);
        selector_update(s, x, m, reward, 1e-4);
        const double after = log_prob(select_probs(s, x), m);
        if (reward > 0) CHECK(after > before);
        else CHECK(after < before);
      }
    }
  }
  SUBCASE("one-dim bandit") {
    const Vector x{{1.0}};
    auto up = constant_selector(1, 0.0);
    auto down = constant_selector(1, 0.0);
    for (int i = 0; i < 500; ++i) {
      selector_update(up, x, Mask{1}, 1.0, 1e-2);
      selector_update(down, x, Mask{0}, 1.0, 1e-2);
    }
    CHECK(select_probs(up, x)(0) > 0.99);
    CHECK(select_probs(down, x)(0) < 0.01);
  }
  SUBCASE("logit decay pulls saturated outputs back toward 1/2") {
    Matrix x = Matrix::Random(2, 8);
    const Matrix masks = Matrix::Ones(2, 8);
    const RowVector zero = RowVector::Zero(8);
    auto hi = constant_selector(2, 6.0);
    auto lo = constant_selector(2, -6.0);
    auto idle = constant_selector(2, 6.0);
    const auto untouched = idle;
    for (int i = 0; i < 200; ++i) {
      selector_update(hi, x, masks, zero, 1e-2, 1e-2);
      selector_update(lo, x, masks, zero, 1e-2, 1e-2);
      selector_update(idle, x, masks, zero, 1e-2, 0.0);
    }
    CHECK(select_probs(hi, x).maxCoeff() < select_probs(untouched, x).minCoeff());
    CHECK(select_probs(lo, x).minCoeff() > 1.0 - select_probs(untouched, x).minCoeff());
    CHECK(idle == untouched);
  }
  SUBCASE("non-finite reward") {
    auto s = constant_selector(2, 0.0);
    CHECK_THROWS_AS(selector_update(s, Vector::Zero(2), Mask{1, 1}, std::nan(""), 1e-3), NumericError);
  }
}

TEST_CASE("curriculum") {
  Curriculum c;
  c.total_steps = 1000;
  CHECK(curriculum_at(c, 0).lambda == 0.0);
  CHECK(curriculum_at(c, 0).p_r == 0.5);
  CHECK(curriculum_at(c, 500).lambda == doctest::Approx(0.1));
  CHECK(curriculum_at(c, 500).p_r == doctest::Approx(0.25));
  CHECK(curriculum_at(c, 1000).lambda == doctest::Approx(0.2));
  CHECK(curriculum_at(c, 5000).p_r == 0.0);
  auto prev = curriculum_at(c, 0);
  for (int step = 1; step <= 1200; ++step) {
    const auto cur = curriculum_at(c, step);
    CHECK(cur.lambda >= prev.lambda);
    CHECK(cur.p_r <= prev.p_r);
    prev = cur;
  }
  const auto f = Curriculum::fixed(0.3, 0.0);
  CHECK(curriculum_at(f, 0).lambda == 0.3);
  CHECK(curriculum_at(f, 77).p_r == 0.0);
}

TEST_CASE("threshold_mask") {
  CHECK(threshold_mask(Vector{{0.6, 0.4}}) == Mask{1, 0});
  CHECK(threshold_mask(Vector{{0.5, 0.3}}, 0.3) == Mask{1, 1});
  CHECK(threshold_mask(Vector{{0.0, 0.2}}, 0.0) == Mask{1, 1});
}

TEST_CASE("iterative_select") {
  Rng rng(6);
  SelectorModel s(5, 5, {{12}, 1e-3}, rng);
  const Vector x = Vector::Random(5);
  const auto one = iterative_select(s, x, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == threshold_mask(select_probs(s, x)));

  const auto all = iterative_select(constant_selector(5, 20.0), x, 4);
  for (const auto& m : all) CHECK(m == Mask(5, true));

  const auto batch = iterative_select(s, Matrix(x), 3);
  const auto single = iterative_select(s, x, 3);
  for (int i = 0; i < 3; ++i) CHECK(Mask::from_vector(batch[i].col(0)) == single[i]);
}

TEST_CASE("mask_or exhaustive vs set union") {
  CHECK(mask_or(Mask{1, 0, 0}, Mask{0, 0, 1}) == Mask{1, 0, 1});
  CHECK_THROWS_AS(mask_or(Mask{1, 0}, Mask{1}), ContractError);
  for (int d = 1; d <= 8; ++d) {
    for (unsigned a = 0; a < (1u << d); ++a) {
      const Mask ma = mask_of(a, d);
      CHECK(mask_or(ma, Mask(d)) == ma);
      CHECK(mask_or(ma, ma) == ma);
      for (unsigned b = 0; b < (1u << d); ++b) CHECK(mask_or(ma, mask_of(b, d)) == mask_of(a | b, d));
    }
  }
}

TEST_CASE("extend_mask exhaustive postconditions") {
  Rng rng(21);
  CHECK_THROWS_AS(extend_mask(Mask{1, 1, 0}, 1, rng), ContractError);
  CHECK_THROWS_AS(extend_mask(Mask{1, 1, 0}, 4, rng), ContractError);
  const auto e = extend_mask(Mask{1, 1, 0, 0}, 3, rng);
  CHECK((e == Mask{1, 1, 1, 0} || e == Mask{1, 1, 0, 1}));
  for (int d = 1; d <= 8; ++d) {
    for (unsigned bits = 0; bits < (1u << d); ++bits) {
      const Mask m = mask_of(bits, d);
      for (std::size_t n2 = m.cardinality(); n2 <= static_cast<std::size_t>(d); ++n2) {
        const Mask out = extend_mask(m, n2, rng);
        CHECK(out.cardinality() == n2);
        CHECK(mask_or(out, m) == out);
      }
      CHECK(extend_mask(m, m.cardinality(), rng) == m);
      CHECK(extend_mask(m, d, rng) == Mask(d, true));
    }
  }
}

TEST_CASE("tpr_fdr exhaustive vs brute-force sets") {
  CHECK(synth::tpr_fdr({0, 1, 4}, {0, 1}).tpr == doctest::Approx(100.0));
  CHECK(synth::tpr_fdr({0, 1, 4}, {0, 1}).fdr == doctest::Approx(100.0 / 3));
  CHECK(synth::tpr_fdr({}, {0}).fdr == 0.0);
  CHECK_THROWS_AS(synth::tpr_fdr({1}, {}), ContractError);
  const int d = 8;
  for (unsigned rel = 1; rel < (1u << d); ++rel) {
    const auto r_idx = mask_of(rel, d).indices();
    for (unsigned sel = 0; sel < (1u << d); ++sel) {
      const auto s_idx = mask_of(sel, d).indices();
      const std::set<int> rs(r_idx.begin(), r_idx.end());
      int hit = 0, miss = 0;
      for (int i : s_idx) (rs.count(i) ? hit : miss)++;
      const double tpr = 100.0 * hit / static_cast<double>(r_idx.size());
      const double fdr = s_idx.empty() ? 0.0 : 100.0 * miss / static_cast<double>(s_idx.size());
      const auto got = synth::tpr_fdr(s_idx, r_idx);
      CHECK(got.tpr == doctest::Approx(tpr));
      CHECK(got.fdr == doctest::Approx(fdr));
    }
  }
}
