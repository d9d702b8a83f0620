#include "gphmm/phmm.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "gphmm/error.hpp"
#include "hmm_oracle.hpp"

using namespace gphmm;

namespace {

using gphmm::testing::enumerate;
using gphmm::testing::normal_pdf;
using gphmm::testing::random_model;
using gphmm::testing::random_obs;

void expect_valid(const CyclicHMM& m) {
  const std::size_t n = m.n_states();
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!CyclicHMM::allowed(n, i, j)) EXPECT_EQ(m.trans(i, j), 0.0);
      row += m.trans(i, j);
    }
    EXPECT_NEAR(row, 1.0, 1e-9);
    EXPECT_GE(m.emit_var()[i], m.var_floor());
  }
}

}  // namespace

TEST(CyclicHMM, ConstructorRejectsMaskViolation) {
  EXPECT_THROW(CyclicHMM(3, {0.5, 0.25, 0.25, 0, 0.5, 0.5, 0.5, 0, 0.5}, {0, 0, 0}, {1, 1, 1},
                         {1, 0, 0}, 1e-6),
               InvalidArgument);
}

TEST(CyclicHMM, ConstructorRejectsBadRows) {
  EXPECT_THROW(CyclicHMM(2, {0.5, 0.6, 0.5, 0.5}, {0, 0}, {1, 1}, {1, 0}, 1e-6), InvalidArgument);
  EXPECT_THROW(CyclicHMM(2, {0.5, 0.5, 0.5, 0.5}, {0, 0}, {1, 1e-9}, {1, 0}, 1e-6), InvalidArgument);
  EXPECT_THROW(CyclicHMM(2, {0.5, 0.5, 0.5, 0.5}, {0, 0}, {1, 1}, {0.5, 0.4}, 1e-6), InvalidArgument);
  EXPECT_THROW(CyclicHMM(0, {}, {}, {}, {}, 1e-6), InvalidArgument);
}

TEST(InitModel, SingleStateUsesGlobalStats) {
  const std::vector<double> a{1, 2, 3}, b{4, 5};
  const std::vector<SequenceView> seqs{a, b};
  const auto m = init_model(1, seqs);
  EXPECT_EQ(m.trans(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(m.emit_mean()[0], 3.0);
  EXPECT_DOUBLE_EQ(m.emit_var()[0], 2.0);
}

TEST(InitModel, TwoStatesUniformOverMask) {
  const std::vector<double> a{1, 2, 3, 4};
  const std::vector<SequenceView> seqs{a};
  const auto m = init_model(2, seqs);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(m.trans(i, j), 0.5);
  EXPECT_EQ(m.init(), (std::vector<double>{1.0, 0.0}));
  EXPECT_DOUBLE_EQ(m.emit_mean()[0], 1.5);
  EXPECT_DOUBLE_EQ(m.emit_mean()[1], 3.5);
  EXPECT_DOUBLE_EQ(m.emit_var()[0], 0.25);
}

TEST(InitModel, SevenStatesHaveFourteenTransitions) {
  std::mt19937_64 rng(1);
  const auto obs = random_obs(500, rng);
  const std::vector<SequenceView> seqs{obs};
  const auto m = init_model(7, seqs);
  int nonzero = 0;
  for (double a : m.transitions()) nonzero += a != 0.0;
  EXPECT_EQ(nonzero, 14);
}

TEST(InitModel, RejectsShortSequences) {
  const std::vector<double> a{1, 2};
  const std::vector<SequenceView> seqs{a};
  EXPECT_THROW(init_model(3, seqs), InvalidArgument);
  EXPECT_THROW(init_model(0, seqs), InvalidArgument);
  EXPECT_THROW(init_model(1, std::span<const SequenceView>{}), InvalidArgument);
}

TEST(InitModel, ConstantDataKeepsPositiveFloor) {
  const std::vector<double> a(20, 4.0);
  const std::vector<SequenceView> seqs{a};
  const auto m = init_model(3, seqs);
  EXPECT_GT(m.var_floor(), 0.0);
  EXPECT_TRUE(std::isfinite(forward_log_likelihood(m, a)));
}

TEST(Forward, SingleStateClosedForm) {
  const CyclicHMM m(1, {1.0}, {0.7}, {1.9}, {1.0}, 1e-6);
  const std::vector<double> o{0.1, -2.0, 3.5, 0.7};
  double expect = 0.0;
  for (double x : o) expect += std::log(normal_pdf(x, 0.7, 1.9));
  EXPECT_NEAR(forward_log_likelihood(m, o), expect, 1e-12);
}

TEST(Forward, RejectsEmpty) {
  const CyclicHMM m(1, {1.0}, {0.0}, {1.0}, {1.0}, 1e-6);
  EXPECT_THROW(forward_log_likelihood(m, {}), InvalidArgument);
  EXPECT_THROW(viterbi(m, {}), InvalidArgument);
}

TEST(Forward, MatchesEnumerationTwoStatesFourSteps) {
  std::mt19937_64 rng(11);
  const auto m = random_model(2, rng);
  const auto o = random_obs(4, rng);
  EXPECT_NEAR(forward_log_likelihood(m, o), std::log(enumerate(m, o).total), 1e-9);
}

TEST(Forward, MatchesEnumerationRandom) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 1 + trial % 3;
    const std::size_t len = 1 + (trial / 3) % 8;
    const auto m = random_model(n, rng, trial % 2 == 0);
    const auto o = random_obs(len, rng);
    const double exact = std::log(enumerate(m, o).total);
    EXPECT_LE(std::abs(forward_log_likelihood(m, o) - exact), 1e-9 * std::max(1.0, std::abs(exact)))
        << "trial " << trial;
  }
}

TEST(Forward, DuplicatedStatesLeaveLikelihoodUnchanged) {
  std::mt19937_64 rng(13);
  const auto o = random_obs(12, rng);
  const CyclicHMM one(1, {1.0}, {0.4}, {1.3}, {1.0}, 1e-6);
  const CyclicHMM two(2, {0.3, 0.7, 0.6, 0.4}, {0.4, 0.4}, {1.3, 1.3}, {0.2, 0.8}, 1e-6);
  EXPECT_NEAR(forward_log_likelihood(one, o), forward_log_likelihood(two, o), 1e-9);
}

TEST(Viterbi, SingleStateAllZero) {
  const CyclicHMM m(1, {1.0}, {0.0}, {1.0}, {1.0}, 1e-6);
  const std::vector<double> o{1, 2, 3, 4, 5};
  EXPECT_EQ(viterbi(m, o).states, std::vector<std::size_t>(5, 0));
}

TEST(Viterbi, ForcedAdvance) {
  const CyclicHMM m(3, {0.5, 0.5, 0, 0, 0.5, 0.5, 0.5, 0, 0.5}, {0, 10, 20}, {1, 1, 1}, {1, 0, 0},
                    1e-6);
  const std::vector<double> o{0, 10, 20};
  EXPECT_EQ(viterbi(m, o).states, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Viterbi, MatchesEnumerationTwoStatesFiveSteps) {
  std::mt19937_64 rng(21);
  const auto m = random_model(2, rng);
  const auto o = random_obs(5, rng);
  EXPECT_EQ(viterbi(m, o).states, enumerate(m, o).argmax);
}

TEST(Viterbi, MatchesEnumerationRandom) {
  std::mt19937_64 rng(22);
  int compared = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 3;
    const std::size_t len = 1 + (trial / 3) % 8;
    const auto m = random_model(n, rng, trial % 2 == 1);
    const auto o = random_obs(len, rng);
    const auto e = enumerate(m, o);
    const auto path = viterbi(m, o);
    const double lp = path_log_probability(m, path.states, o);
    EXPECT_LE(std::abs(lp - std::log(e.best)), 1e-9 * std::max(1.0, std::abs(std::log(e.best))));
    if (e.second < e.best * (1 - 1e-9)) {
      EXPECT_EQ(path.states, e.argmax) << "trial " << trial;
      ++compared;
    }
  }
  EXPECT_GE(compared, 100);
}

TEST(Viterbi, TieGoesToLowerState) {
  // Two identical states: every path has the same probability.
  const CyclicHMM m(2, {0.5, 0.5, 0.5, 0.5}, {0, 0}, {1, 1}, {0.5, 0.5}, 1e-6);
  const std::vector<double> o{0.3, -0.2, 0.1};
  EXPECT_EQ(viterbi(m, o).states, (std::vector<std::size_t>{0, 0, 0}));
}

TEST(Viterbi, PathsRespectMask) {
  std::mt19937_64 rng(23);
  const auto m = random_model(5, rng, false);
  const auto o = random_obs(200, rng);
  const auto p = viterbi(m, o).states;
  EXPECT_EQ(p[0], 0u);
  for (std::size_t t = 1; t < p.size(); ++t) EXPECT_TRUE(CyclicHMM::allowed(5, p[t - 1], p[t]));
}

TEST(BaumWelch, SingleStateOneIteration) {
  const std::vector<double> a{1, 2, 3};
  const std::vector<SequenceView> seqs{a};
  const auto r = baum_welch(init_model(1, seqs), seqs);
  EXPECT_DOUBLE_EQ(r.model.emit_mean()[0], 2.0);
  EXPECT_DOUBLE_EQ(r.model.emit_var()[0], 2.0 / 3.0);
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_TRUE(r.converged);
}

TEST(BaumWelch, SingleStateFromPoorStart) {
  const std::vector<double> a{1, 2, 3};
  const std::vector<SequenceView> seqs{a};
  const CyclicHMM start(1, {1.0}, {-5.0}, {10.0}, {1.0}, 1e-6);
  const auto r = baum_welch(start, seqs, {.max_iters = 1, .tol = 0.0});
  EXPECT_NEAR(r.model.emit_mean()[0], 2.0, 1e-12);
  EXPECT_NEAR(r.model.emit_var()[0], 2.0 / 3.0, 1e-12);
}

TEST(BaumWelch, MonotoneAndMaskPreserved) {
  std::mt19937_64 rng(31);
  for (int run = 0; run < 5; ++run) {
    std::vector<std::vector<double>> data;
    for (int s = 0; s < 3; ++s) data.push_back(random_obs(40, rng));
    const std::vector<SequenceView> seqs(data.begin(), data.end());
    BaumWelchOptions opts;
    opts.max_iters = 50;
    opts.tol = -1.0;
    opts.on_iteration = [](std::size_t, const CyclicHMM& m, double) { expect_valid(m); };
    const auto r = baum_welch(init_model(4, seqs), seqs, opts);
    EXPECT_EQ(r.iterations, 50u);
    ASSERT_EQ(r.log_likelihood.size(), 51u);
    for (std::size_t i = 1; i < r.log_likelihood.size(); ++i) {
      EXPECT_GE(r.log_likelihood[i], r.log_likelihood[i - 1] - 1e-8);
    }
  }
}

TEST(BaumWelch, StopsWhenImprovementBelowTol) {
  std::mt19937_64 rng(32);
  const auto obs = random_obs(60, rng);
  const std::vector<SequenceView> seqs{obs};
  const auto r = baum_welch(init_model(3, seqs), seqs, {.max_iters = 500, .tol = 1e-3});
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.iterations, 500u);
  const auto& ll = r.log_likelihood;
  EXPECT_LT(ll.back() - ll[ll.size() - 2], 1e-3);
}

TEST(BaumWelch, ReseedsEmptyStateWithWarning) {
  // State 2 is unreachable from init=[1,0,0] within two steps, so it gets no occupancy.
  const std::vector<double> a{0.0, 0.1};
  const std::vector<SequenceView> seqs{a};
  const CyclicHMM start(3, {0.9, 0.1, 0, 0, 0.9, 0.1, 0.1, 0, 0.9}, {0, 0.1, 5}, {1, 1, 1}, {1, 0, 0},
                        1e-6);
  const auto r1 = baum_welch(start, seqs, {.max_iters = 1, .tol = 0.0, .seed = 7});
  const auto r2 = baum_welch(start, seqs, {.max_iters = 1, .tol = 0.0, .seed = 7});
  ASSERT_FALSE(r1.warnings.empty());
  EXPECT_NE(r1.warnings[0].find("state 2"), std::string::npos);
  EXPECT_EQ(r1.model, r2.model);
  expect_valid(r1.model);
}

TEST(BaumWelch, Deterministic) {
  std::mt19937_64 rng(33);
  const auto obs = random_obs(100, rng);
  const std::vector<SequenceView> seqs{obs};
  const auto a = baum_welch(init_model(5, seqs), seqs);
  const auto b = baum_welch(init_model(5, seqs), seqs);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.log_likelihood, b.log_likelihood);
}

TEST(PathLogProbability, ForbiddenPathIsMinusInfinity) {
  const CyclicHMM m(3, {0.5, 0.5, 0, 0, 0.5, 0.5, 0.5, 0, 0.5}, {0, 1, 2}, {1, 1, 1}, {1, 0, 0}, 1e-6);
  const std::vector<std::size_t> p{0, 2};
  const std::vector<double> o{0, 2};
  EXPECT_EQ(path_log_probability(m, p, o), -std::numeric_limits<double>::infinity());
}
