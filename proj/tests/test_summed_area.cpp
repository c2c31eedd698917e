#include <gtest/gtest.h>

#include "oscillib/random.hpp"
#include "oscillib/summed_area.hpp"

using namespace oscillib;

namespace {

/// Direct summation over the clipped cube.
double naive_sum(const GridGeometry& g, std::span<const double> v, const CubeSpec& q) {
  double s = 0.0;
  for_each_cell(q, [&](const Index& i) {
    if (g.contains(i)) s += v[g.linear(i)];
  });
  return s;
}

GridFunction random_field(CounterRng& rng, std::vector<std::size_t> shape) {
  GridGeometry g(std::move(shape), 1.0);
  std::vector<double> v(g.size());
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return {g, v};
}

CubeSpec random_cube(CounterRng& rng, const GridGeometry& g) {
  CubeSpec q;
  q.ndim = g.ndim();
  q.side = rng.between(1, static_cast<std::int64_t>(g.max_extent()) + 2);
  for (std::size_t k = 0; k < g.ndim(); ++k) {
    q.anchor[k] = rng.between(-q.side - 1, static_cast<std::int64_t>(g.extent(k)) + 1);
  }
  return q;
}

}  // namespace

TEST(SummedArea, OneDimensionalExample) {
  const GridFunction u(GridGeometry({4}, 1.0), {1, 2, 3, 4});
  EXPECT_EQ(cube_sum(SummedAreaTable::of(u), CubeSpec::make({1}, 2)), 5.0);
  EXPECT_EQ(SummedAreaTable::of(u).total(), 10.0);
}

TEST(SummedArea, ZeroFieldGivesZero) {
  const GridFunction u(GridGeometry({4, 4}, 1.0));
  const auto t = SummedAreaTable::of(u);
  CounterRng rng(1);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(t.cube_sum(random_cube(rng, u.geometry())), 0.0);
}

TEST(SummedArea, MatchesNaiveLoopInEveryDimension) {
  CounterRng rng(11);
  for (const auto& shape : std::vector<std::vector<std::size_t>>{{9}, {4, 4}, {5, 3}, {3, 4, 2}, {2, 3, 2, 3}}) {
    const auto u = random_field(rng, shape);
    const auto t = SummedAreaTable::of(u);
    for (int i = 0; i < 50; ++i) {
      const auto q = random_cube(rng, u.geometry());
      EXPECT_NEAR(t.cube_sum(q), naive_sum(u.geometry(), u.values(), q), 1e-12);
    }
  }
}

TEST(SummedArea, SingleCellCubesAreExact) {
  CounterRng rng(5);
  const auto u = random_field(rng, {6, 7});
  const auto t = SummedAreaTable::of(u);
  for (std::size_t lin = 0; lin < u.size(); ++lin) {
    CubeSpec q;
    q.ndim = 2;
    q.anchor = u.geometry().unravel(lin);
    EXPECT_EQ(t.cube_sum(q), u[lin]);
  }
  // A large cube overhanging a corner cell sees just that cell.
  EXPECT_EQ(t.cube_sum(CubeSpec::make({-5, -5}, 6)), u[0]);
}

TEST(SummedArea, AdditiveUnderSplitting) {
  CounterRng rng(8);
  const auto u = random_field(rng, {10});
  const auto t = SummedAreaTable::of(u);
  for (std::int64_t cut = 1; cut < 10; ++cut) {
    EXPECT_NEAR(t.sum({0}, 10), t.sum({0}, cut) + t.sum({cut}, 10 - cut), 1e-12);
  }
  std::vector<double> ints(100);
  for (std::size_t i = 0; i < ints.size(); ++i) ints[i] = static_cast<double>(i % 7);
  const SummedAreaTable it(GridGeometry({10, 10}, 1.0), ints);
  EXPECT_EQ(it.sum({0, 0}, 10), it.sum({0, 0}, 5) + it.sum({0, 5}, 5) + it.sum({5, 0}, 5) + it.sum({5, 5}, 5));
}

TEST(CubeAverage, DividesByFullVolume) {
  const GridFunction u(GridGeometry({5}, 1.0), {0, 0, 1, 0, 0});
  EXPECT_DOUBLE_EQ(cube_average(u, CubeSpec::make({0}, 3)), 1.0 / 3.0);
  EXPECT_EQ(cube_average(u, CubeSpec::make({10}, 3)), 0.0);
  EXPECT_DOUBLE_EQ(cube_average(u, CubeSpec::make({1}, 6)), 1.0 / 6.0);

  const GridFunction c(GridGeometry({6, 6}, 0.1), std::vector<double>(36, 0.75));
  EXPECT_EQ(cube_average(c, CubeSpec::make({1, 1}, 4)), 0.75);
}

TEST(CubeAverage, MonotoneInValues) {
  CounterRng rng(13);
  const auto u = random_field(rng, {6, 6});
  std::vector<double> w(u.values().begin(), u.values().end());
  for (auto& x : w) x += rng.uniform();
  const auto tu = SummedAreaTable::of(u);
  const SummedAreaTable tw(u.geometry(), w);
  for (int i = 0; i < 50; ++i) {
    const auto q = random_cube(rng, u.geometry());
    EXPECT_LE(cube_average(tu, q), cube_average(tw, q) + 1e-12);
  }
}

TEST(CubeMeasure, LebesgueDiracAndNaive) {
  GridGeometry g({8, 8}, 0.25);
  const auto leb = DiscreteMeasure::lebesgue(g);
  EXPECT_DOUBLE_EQ(cube_measure(leb, CubeSpec::make({2, 2}, 3)), std::pow(0.75, 2));
  const auto d = DiscreteMeasure::dirac(g, {3, 4});
  EXPECT_EQ(cube_measure(d, CubeSpec::make({2, 2}, 3)), 1.0);
  EXPECT_EQ(cube_measure(d, CubeSpec::make({0, 0}, 3)), 0.0);

  CounterRng rng(17);
  std::vector<double> m(g.size());
  for (auto& x : m) x = rng.uniform();
  const DiscreteMeasure mu(g, m);
  const auto t = SummedAreaTable::of(mu);
  for (int i = 0; i < 50; ++i) {
    const auto q = random_cube(rng, g);
    const double v = cube_measure(t, q);
    EXPECT_GE(v, 0.0);
    EXPECT_NEAR(v, naive_sum(g, m, q), 1e-12);
    EXPECT_LE(v, cube_measure(t, cube_dilate(q, 3)) + 1e-12);
  }
}
