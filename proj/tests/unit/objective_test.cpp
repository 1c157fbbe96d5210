#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "driftboost/error.hpp"
#include "driftboost/objective.hpp"
#include "driftboost/random.hpp"

using namespace driftboost;

TEST(LeafWeight, Examples) {
  EXPECT_DOUBLE_EQ(leaf_weight(2.0, 3.0, 1.0), -0.5);
  EXPECT_EQ(leaf_weight(0.0, 5.0, 0.0), 0.0);
  EXPECT_EQ(leaf_weight(0.0, 0.5, 7.0), 0.0);
  EXPECT_THROW(leaf_weight(1.0, 0.0, 0.0), InvalidArgument);
  EXPECT_THROW(leaf_weight(1.0, -2.0, 1.0), InvalidArgument);
}

TEST(LeafWeight, ShrinksWithL2) {
  double previous = std::abs(leaf_weight(4.0, 2.0, 0.0));
  for (double l2 : {1.0, 10.0, 100.0, 1e6, 1e12}) {
    const double w = std::abs(leaf_weight(4.0, 2.0, l2));
    EXPECT_LT(w, previous);
    previous = w;
  }
  EXPECT_LT(previous, 1e-11);
}

TEST(LeafWeight, OptimalAgainstPerturbation) {
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    const double g = rng.uniform(-50.0, 50.0);
    const double h = rng.uniform(1e-3, 50.0);
    const double l2 = rng.uniform(0.0, 10.0);
    const double w = leaf_weight(g, h, l2);
    const double at = leaf_objective(g, h, l2, w);
    ASSERT_LT(at, leaf_objective(g, h, l2, w + 1e-3));
    ASSERT_LT(at, leaf_objective(g, h, l2, w - 1e-3));
  }
}

TEST(StructureScore, Examples) {
  const std::array<LeafSums<double>, 1> one{{{2.0, 3.0}}};
  EXPECT_DOUBLE_EQ(structure_score<double>(one, 1.0, 0.0), -0.5);
  const std::array<LeafSums<double>, 3> zeros{{{0.0, 1.0}, {0.0, 2.0}, {0.0, 3.0}}};
  EXPECT_DOUBLE_EQ(structure_score<double>(zeros, 0.5, 0.7), 3 * 0.7);
  const std::array<LeafSums<double>, 1> bad{{{1.0, 0.0}}};
  EXPECT_THROW(structure_score<double>(bad, 0.0, 0.0), InvalidArgument);
  EXPECT_THROW(structure_score<double>({}, 0.0, 0.0), InvalidArgument);
}

TEST(SplitGain, Examples) {
  EXPECT_DOUBLE_EQ(split_gain(-2.0, 2.0, 2.0, 2.0, 0.0, 0.0), 2.0);
  EXPECT_DOUBLE_EQ(split_gain(0.0, 3.0, 0.0, 4.0, 1.0, 0.25), -0.25);
  EXPECT_THROW(split_gain(1.0, 0.0, 1.0, 1.0, 0.0, 0.0), InvalidArgument);
}

TEST(SplitGain, SymmetricAndMatchesScoreDifference) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double gl = rng.uniform(-20, 20);
    const double gr = rng.uniform(-20, 20);
    const double hl = rng.uniform(0.01, 20);
    const double hr = rng.uniform(0.01, 20);
    const double l2 = rng.uniform(0, 5);
    const double gamma = rng.uniform(0, 2);
    const double gain = split_gain(gl, hl, gr, hr, l2, gamma);
    ASSERT_NEAR(gain, split_gain(gr, hr, gl, hl, l2, gamma), 1e-12 * (1 + std::abs(gain)));
    const std::array<LeafSums<double>, 1> parent{{{gl + gr, hl + hr}}};
    const std::array<LeafSums<double>, 2> children{{{gl, hl}, {gr, hr}}};
    const double delta = structure_score<double>(parent, l2, gamma) - structure_score<double>(children, l2, gamma);
    ASSERT_NEAR(gain, delta, 1e-9);
  }
}

TEST(Objective, LongDoubleAgrees) {
  const long double w = leaf_weight<long double>(2.0L, 3.0L, 1.0L);
  EXPECT_EQ(w, -0.5L);
  EXPECT_EQ(split_gain<long double>(-2, 2, 2, 2, 0, 0), 2.0L);
}
