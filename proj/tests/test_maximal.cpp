#include <gtest/gtest.h>

#include "oscillib/maximal.hpp"
#include "oscillib/random.hpp"

using namespace oscillib;

namespace {

MaximalConfig config(MaximalVariant v, double beta = 0.0) {
  MaximalConfig c;
  c.variant = v;
  c.beta = beta;
  return c;
}

GridFunction line(std::vector<double> v, double h = 1.0) {
  GridGeometry g({v.size()}, h);
  return {g, std::move(v)};
}

GridFunction random_grid(CounterRng& rng, std::vector<std::size_t> shape, double lo = -1.0) {
  GridGeometry g(std::move(shape), rng.uniform(0.5, 1.5));
  std::vector<double> v(g.size());
  for (auto& x : v) x = rng.uniform(lo, 1.0);
  return {g, std::move(v)};
}

/// Independent oracle: direct cell loops, no summed-area table, no windows.
double naive_at(const GridFunction& u, const MaximalConfig& cfg, const Index& cell) {
  const GridGeometry& g = u.geometry();
  const auto n = g.ndim();
  const auto S = static_cast<std::int64_t>(resolved_max_side(cfg, g));
  const bool centred = cfg.variant == MaximalVariant::Centred || cfg.variant == MaximalVariant::DomainCentred;
  double best = 0.0;
  for (std::int64_t s = 1; s <= S; ++s) {
    if (centred && s % 2 == 0) continue;
    CubeSpec anchors;
    anchors.ndim = n;
    anchors.side = centred ? 1 : s;
    for (std::size_t k = 0; k < n; ++k) anchors.anchor[k] = cell[k] - (centred ? (s - 1) / 2 : s - 1);
    for_each_cell(anchors, [&](const Index& a) {
      CubeSpec q;
      q.ndim = n;
      q.anchor = a;
      q.side = s;
      double sum = 0.0;
      bool admissible = true;
      for_each_cell(q, [&](const Index& i) {
        if (cfg.variant == MaximalVariant::DomainCentred) admissible = admissible && cfg.mask->contains(i);
        if (g.contains(i)) sum += std::fabs(u.at(i));
      });
      if (!admissible) return;
      const double beta = cfg.variant == MaximalVariant::Fractional ? cfg.beta : 0.0;
      const double len = static_cast<double>(s) * g.cell_width();
      best = std::max(best, sum * std::pow(len, beta) / std::pow(static_cast<double>(s), static_cast<double>(n)));
    });
  }
  return best;
}

}  // namespace

TEST(SlidingWindowMax, MatchesNaive) {
  CounterRng rng(2);
  std::vector<double> v(40);
  for (auto& x : v) x = rng.uniform();
  for (std::size_t w = 1; w <= v.size(); ++w) {
    const auto out = sliding_window_max(v, w);
    ASSERT_EQ(out.size(), v.size() - w + 1);
    for (std::size_t i = 0; i < out.size(); ++i) {
      EXPECT_EQ(out[i], *std::max_element(v.begin() + static_cast<long>(i), v.begin() + static_cast<long>(i + w)));
    }
  }
  EXPECT_THROW(sliding_window_max(v, 0), std::invalid_argument);
  EXPECT_THROW(sliding_window_max(v, 41), std::invalid_argument);
}

TEST(Maximal, OneDimensionalExamples) {
  const auto u = line({0, 0, 1, 0, 0});
  EXPECT_DOUBLE_EQ(maximal_noncentred(u, {}).at({0}), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(maximal_centred(u, config(MaximalVariant::Centred)).at({0}), 1.0 / 5.0);
  EXPECT_DOUBLE_EQ(maximal_fractional(u, config(MaximalVariant::Fractional, 1.0)).at({0}), 1.0);
  const auto dirac = DiscreteMeasure::dirac(u.geometry(), {2});
  EXPECT_DOUBLE_EQ(maximal_measure(dirac, {}).at({0}), 1.0 / 3.0);
}

TEST(Maximal, SingleCellGrid) {
  const auto u = line({7});
  for (auto v : {MaximalVariant::NonCentred, MaximalVariant::Centred, MaximalVariant::Fractional}) {
    EXPECT_EQ(maximal(u, config(v)).at({0}), 7.0);
    EXPECT_EQ(brute_force_maximal(u, config(v)).at({0}), 7.0);
  }
}

TEST(Maximal, ConstantFieldIsFixed) {
  GridGeometry g({12, 12}, 0.1);
  const GridFunction u(g, std::vector<double>(g.size(), 2.0));
  for (auto v : {MaximalVariant::NonCentred, MaximalVariant::Centred}) {
    const auto M = maximal(u, config(v));
    for (std::size_t i = 0; i < M.size(); ++i) EXPECT_EQ(M[i], 2.0);
  }
}

TEST(Maximal, LebesgueMeasureHasDensityOne) {
  GridGeometry g({9, 7}, 0.3);
  const auto M = maximal_measure(DiscreteMeasure::lebesgue(g), {});
  for (std::size_t i = 0; i < M.size(); ++i) EXPECT_DOUBLE_EQ(M[i], 1.0);
}

TEST(Maximal, FullPowerFractionalIsTotalMass) {
  CounterRng rng(4);
  const auto u = random_grid(rng, {6, 5}, 0.0);
  const auto M = maximal(u, config(MaximalVariant::Fractional, 2.0));
  double total = 0.0;
  for (double v : u.values()) total += v;
  const double h2 = u.geometry().cell_width() * u.geometry().cell_width();
  for (std::size_t i = 0; i < M.size(); ++i) EXPECT_NEAR(M[i], h2 * total, 1e-12);
}

TEST(Maximal, BetaZeroEqualsNonCentred) {
  CounterRng rng(6);
  const auto u = random_grid(rng, {11, 13});
  const auto a = maximal(u, {});
  const auto b = maximal(u, config(MaximalVariant::Fractional, 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(Maximal, FastPathEqualsBruteForceExactly) {
  CounterRng rng(10);
  for (int trial = 0; trial < 30; ++trial) {
    const auto u = random_grid(rng, {8, 8}, 0.0);
    for (auto cfg : {config(MaximalVariant::NonCentred), config(MaximalVariant::Centred),
                     config(MaximalVariant::Fractional, 0.5)}) {
      const auto fast = maximal(u, cfg);
      const auto slow = brute_force_maximal(u, cfg);
      for (std::size_t i = 0; i < fast.size(); ++i) ASSERT_EQ(fast[i], slow[i]) << to_string(cfg.variant);
    }
    std::vector<double> m(u.values().begin(), u.values().end());
    const DiscreteMeasure mu(u.geometry(), m);
    const auto fm = maximal_measure(mu, {});
    const auto sm = brute_force_maximal(mu, {});
    for (std::size_t i = 0; i < fm.size(); ++i) ASSERT_EQ(fm[i], sm[i]);
  }
}

TEST(Maximal, MatchesIndependentLoopOracle) {
  CounterRng rng(12);
  for (const auto& shape : std::vector<std::vector<std::size_t>>{{17}, {6, 7}, {4, 3, 4}}) {
    const auto u = random_grid(rng, shape);
    for (auto cfg : {config(MaximalVariant::NonCentred), config(MaximalVariant::Centred),
                     config(MaximalVariant::Fractional, 0.75)}) {
      const auto M = maximal(u, cfg);
      for (std::size_t lin = 0; lin < u.size(); ++lin) {
        EXPECT_NEAR(M[lin], naive_at(u, cfg, u.geometry().unravel(lin)), 1e-12);
      }
    }
  }
}

TEST(Maximal, ThreadCountDoesNotChangeOutput) {
  CounterRng rng(14);
  const auto u = random_grid(rng, {40, 33});
  for (auto variant : {MaximalVariant::NonCentred, MaximalVariant::Centred}) {
    auto cfg = config(variant);
    const auto one = maximal(u, cfg);
    for (unsigned t : {2u, 5u, 16u}) {
      cfg.threads = t;
      const auto many = maximal(u, cfg);
      for (std::size_t i = 0; i < one.size(); ++i) ASSERT_EQ(one[i], many[i]);
    }
  }
}

TEST(Maximal, ValidationErrors) {
  const auto u = line({1, 2, 3});
  EXPECT_THROW(maximal(u, config(MaximalVariant::Fractional, 1.5)), std::invalid_argument);
  EXPECT_THROW(maximal(u, config(MaximalVariant::Fractional, -0.1)), std::invalid_argument);
  EXPECT_THROW(maximal(u, config(MaximalVariant::DomainCentred)), std::invalid_argument);
  EXPECT_THROW(maximal_centred(u, {}), std::invalid_argument);
  EXPECT_THROW(maximal_noncentred(u, config(MaximalVariant::Centred)), std::invalid_argument);
  GridGeometry big({65, 65}, 1.0);
  EXPECT_THROW(brute_force_maximal(GridFunction(big), {}), std::invalid_argument);
}

TEST(Maximal, DefaultSideBounds) {
  GridGeometry g({5, 9}, 1.0);
  EXPECT_EQ(default_max_side(g, MaximalVariant::NonCentred), 9u);
  EXPECT_EQ(default_max_side(g, MaximalVariant::Fractional), 9u);
  EXPECT_EQ(default_max_side(g, MaximalVariant::Centred), 17u);
}

TEST(DomainCentred, WholeGridMaskAgreesWithCentredAwayFromEdges) {
  CounterRng rng(15);
  const auto u = random_grid(rng, {7, 9});
  const DomainMask all(u.geometry(), std::vector<std::uint8_t>(u.size(), 1));
  MaximalConfig small;
  small.max_side = 3;
  const auto a = maximal_domain_centred(u, all, small);
  auto cfg = config(MaximalVariant::Centred);
  cfg.max_side = 3;
  const auto b = maximal(u, cfg);
  for (std::size_t lin = 0; lin < a.size(); ++lin) {
    const auto i = u.geometry().unravel(lin);
    EXPECT_LE(a[lin], b[lin]);
    // Overhanging cubes are admissible only for the zero-extended operator.
    if (i[0] >= 1 && i[0] <= 5 && i[1] >= 1 && i[1] <= 7) EXPECT_EQ(a[lin], b[lin]);
  }
}

TEST(DomainCentred, BoundedByCentredAndMatchesOracle) {
  CounterRng rng(16);
  for (int trial = 0; trial < 20; ++trial) {
    const auto u = random_grid(rng, {6, 6});
    std::vector<std::uint8_t> cells(u.size(), 0);
    // A random staircase: rows filled from the left, lengths nonincreasing.
    std::int64_t len = 6;
    for (std::size_t r = 0; r < 6; ++r) {
      len = rng.between(1, len);
      for (std::int64_t c = 0; c < len; ++c) cells[r * 6 + static_cast<std::size_t>(c)] = 1;
    }
    const DomainMask mask(u.geometry(), cells);
    auto cfg = config(MaximalVariant::DomainCentred);
    cfg.mask = mask;
    const auto Md = maximal(u, cfg);
    const auto Mc = maximal(u, config(MaximalVariant::Centred));
    const auto Mb = brute_force_maximal(u, cfg);
    for (std::size_t lin = 0; lin < u.size(); ++lin) {
      EXPECT_EQ(Md[lin], Mb[lin]);
      if (!mask[lin]) {
        EXPECT_EQ(Md[lin], 0.0);
        continue;
      }
      EXPECT_LE(Md[lin], Mc[lin]);
      EXPECT_NEAR(Md[lin], naive_at(u, cfg, u.geometry().unravel(lin)), 1e-12);
    }
  }
}

TEST(DomainCentred, PointEvaluationRejectsOutsideCells) {
  GridGeometry g({3, 3}, 1.0);
  const DomainMask mask(g, {1, 1, 1, 0, 0, 1, 0, 0, 1});
  const GridFunction u(g, std::vector<double>(9, 1.0));
  EXPECT_EQ(maximal_domain_centred_at(u, mask, {}, {0, 0}), 1.0);
  EXPECT_THROW(maximal_domain_centred_at(u, mask, {}, {1, 1}), std::invalid_argument);
}

TEST(ScaleSplit, OneDimensionalExample) {
  const auto u = line({0, 0, 1, 0, 0});
  const auto split = scale_split_maximal(u, 1, {});
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(split.local[i], u[i]);
  EXPECT_DOUBLE_EQ(split.far.at({2}), 0.5);
  EXPECT_FALSE(split.far_vacuous);
}

TEST(ScaleSplit, MaxOfPartsIsMaximal) {
  CounterRng rng(18);
  for (auto variant : {MaximalVariant::NonCentred, MaximalVariant::Centred}) {
    const auto u = random_grid(rng, {9, 10});
    const auto M = maximal(u, config(variant));
    for (std::size_t r0 : {1u, 2u, 5u}) {
      const auto split = scale_split_maximal(u, r0, config(variant));
      for (std::size_t i = 0; i < M.size(); ++i) EXPECT_EQ(std::max(split.local[i], split.far[i]), M[i]);
    }
    const auto full = scale_split_maximal(u, resolved_max_side(config(variant), u.geometry()), config(variant));
    EXPECT_TRUE(full.far_vacuous);
    for (std::size_t i = 0; i < M.size(); ++i) {
      EXPECT_EQ(full.local[i], M[i]);
      EXPECT_EQ(full.far[i], 0.0);
    }
  }
  EXPECT_THROW(scale_split_maximal(line({1}), 0, {}), std::invalid_argument);
}
