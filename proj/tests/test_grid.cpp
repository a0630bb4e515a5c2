#include <doctest.h>

#include <array>
#include <cmath>
#include <stdexcept>

#include "ellikernel/grid.hpp"

using namespace ellikernel;

TEST_CASE("build_grid spacing and size") {
  const Grid g1 = build_grid(1, 8, 1.0);
  CHECK(g1.dx() == 0.125);
  CHECK(g1.cell_vol() == 0.125);
  CHECK(g1.size() == 8);

  const Grid g2 = build_grid(2, 16, 2.0);
  CHECK(g2.size() == 256);
  CHECK(g2.dx() == 0.125);
  CHECK(g2.cell_vol() == doctest::Approx(0.015625));
}

TEST_CASE("build_grid rejects bad parameters") {
  CHECK_THROWS_WITH_AS(build_grid(3, 8, 1.0), doctest::Contains("unsupported dimension"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(build_grid(1, 3, 1.0), doctest::Contains("n >= 4"), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(1, 8, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(2, 8, -1.0), std::invalid_argument);
}

TEST_CASE("cell centers and indexing") {
  const Grid g(2, 6, 3.0);
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const auto [i, j] = g.coords(idx);
    CHECK(g.index(i, j) == idx);
    const auto c = g.center(idx);
    CHECK(c[0] == doctest::Approx((i + 0.5) * g.dx()));
    CHECK(c[1] == doctest::Approx((j + 0.5) * g.dx()));
  }
  CHECK(g.shift(g.index(5, 2), 0, 1) == g.index(0, 2));
  CHECK(g.shift(g.index(0, 0), 1, -1) == g.index(0, 5));
}

TEST_CASE("torus_dist examples") {
  const Grid g1(1, 8, 1.0);
  std::array<double, 1> a{0.0625}, b{0.9375};
  CHECK(torus_dist(g1, a, b) == doctest::Approx(0.125));
  CHECK(torus_dist(g1, a, a) == 0.0);

  const Grid g2(2, 8, 1.0);
  std::array<double, 2> o{0.0, 0.0}, h{0.5, 0.5};
  CHECK(torus_dist(g2, o, h) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("torus_dist bounded by L sqrt(d)/2 and consistent with cell distances") {
  for (int d : {1, 2}) {
    const Grid g(d, 9, 2.5);
    const double bound = g.length() * std::sqrt(static_cast<double>(d)) / 2.0;
    for (std::size_t a = 0; a < g.size(); ++a) {
      for (std::size_t b = 0; b < g.size(); ++b) {
        const double dist = torus_dist(g, a, b);
        CHECK(dist <= bound + 1e-12);
        CHECK(dist == doctest::Approx(torus_dist(g, b, a)));
        CHECK(dist * dist == doctest::Approx(static_cast<double>(g.dist2_cells(a, b)) * g.dx() * g.dx()));
      }
    }
  }
}
