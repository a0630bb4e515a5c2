#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ellikernel/discrete_operators.hpp"
#include "ellikernel/krylov.hpp"
#include "ellikernel/semigroup.hpp"
#include "test_helpers.hpp"

using namespace ellikernel;
using testing::random_vector;

namespace {

SemigroupOptions krylov_only() {
  SemigroupOptions o;
  o.dense_threshold = 0;
  return o;
}

GridFunction fourier_mode(const Grid& g, int p, int q) {
  GridFunction v(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto [a, b] = g.coords(i);
    v[static_cast<Eigen::Index>(i)] = std::cos(2.0 * std::numbers::pi * (p * a + q * b) / g.cells_per_axis());
  }
  return v;
}

double lattice_eigenvalue(const Grid& g, int k) {
  return 2.0 / (g.dx() * g.dx()) * (1.0 - std::cos(2.0 * std::numbers::pi * k / g.cells_per_axis()));
}

}  // namespace

TEST_CASE("t = 0 is the identity") {
  const Grid g(1, 16, 8.0);
  const auto H = assemble_H(make_field(g, family::Lognormal{0.5, 0.5}, 1));
  const auto v = random_vector(16, 2);
  CHECK((semigroup_apply(H, 0.0, v) - v).norm() == 0.0);
  CHECK((semigroup_apply(H, 0.0, v, krylov_only()) - v).norm() == 0.0);
  CHECK_THROWS_AS(semigroup_apply(H, -1.0, v), std::invalid_argument);
  CHECK_THROWS_AS(kernel_matrix(H, 0.0), std::invalid_argument);
}

TEST_CASE("Fourier modes of the Laplacian decay by their eigenvalue") {
  for (int d : {1, 2}) {
    const Grid g(d, d == 1 ? 32 : 8, 4.0);
    const auto D = assemble_laplacian(g);
    for (int p : {0, 1, 3}) {
      const int q = d == 2 ? 1 : 0;
      const auto v = fourier_mode(g, p, q);
      const double lam = lattice_eigenvalue(g, p) + (d == 2 ? lattice_eigenvalue(g, q) : 0.0);
      for (double t : {0.01, 0.2, 1.0}) {
        const GridFunction expected = std::exp(-t * lam) * v;
        CHECK((semigroup_apply(D, t, v) - expected).norm() <= 1e-10 * v.norm());
        CHECK((semigroup_apply(D, t, v, krylov_only()) - expected).norm() <= 1e-9 * v.norm());
      }
    }
  }
}

TEST_CASE("constants are preserved and norms contract") {
  for (int d : {1, 2}) {
    const Grid g(d, d == 1 ? 40 : 10, 8.0);
    const auto H = assemble_H(make_field(g, family::Lognormal{0.7, 0.5}, 5));
    const GridFunction one = GridFunction::Ones(static_cast<Eigen::Index>(g.size()));
    for (double t : {0.05, 1.0}) {
      CHECK((semigroup_apply(H, t, one) - one).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK((semigroup_apply(H, t, one, krylov_only()) - one).cwiseAbs().maxCoeff() <= 1e-9);
      for (int k = 0; k < 5; ++k) {
        const auto v = random_vector(g.size(), 10 * k + d);
        CHECK(semigroup_apply(H, t, v).norm() <= v.norm() * (1.0 + 1e-12));
        CHECK(semigroup_apply(H, t, v, krylov_only()).norm() <= v.norm() * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("Krylov path agrees with the dense path") {
  const std::vector<std::pair<Grid, FieldFamily>> cases = {
      {Grid(1, 128, 8.0), family::Lognormal{0.8, 0.4}},
      {Grid(2, 16, 8.0), family::Anisotropic{2.0, 1.0, 0.5}},
      {Grid(2, 16, 8.0), family::Checkerboard{0.25, 4.0, 0}},
      {Grid(1, 64, 8.0), family::DegenerateSine{2.0}},
  };
  for (const auto& [g, fam] : cases) {
    const auto H = assemble_H(make_field(g, fam, 7));
    const SpectralPropagator prop(H);
    for (double t : {0.01, 0.3, 1.0, 5.0}) {
      const auto v = random_vector(g.size(), 99);
      linalg::KrylovStats stats;
      const auto kr = linalg::krylov_expm_apply(H.matrix(), t, v, 1e-9, 64, &stats);
      const auto de = prop.apply(t, v);
      CHECK((kr - de).norm() <= 1e-9 * v.norm());
      CHECK(stats.steps >= 1);
    }
  }
}

TEST_CASE("dense kernel matches the lattice Fourier series") {
  const Grid g(1, 64, 8.0);
  const auto prop = SpectralPropagator(assemble_laplacian(g));
  const int n = 64;
  for (double t : {0.01, 0.1, 1.0}) {
    const auto slice = kernel_matrix(prop, t);
    for (int x = 0; x < n; x += 5) {
      double series = 0.0;
      for (int k = 0; k < n; ++k) {
        series += std::exp(-t * lattice_eigenvalue(g, k)) * std::cos(2.0 * std::numbers::pi * k * x / n);
      }
      series /= n * g.dx();
      CHECK(slice.K(x, 0) == doctest::Approx(series).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("kernel peak against the continuum theta series") {
  // The 3-point lattice kernel at the origin is e^{-z} I_0(z) / dx with z = 2t/dx^2;
  // relative to the Gaussian peak this overshoots by 1/(8z) + O(z^-2).
  const Grid g(1, 256, 8.0);
  const auto prop = SpectralPropagator(assemble_laplacian(g));
  for (double t : {0.05, 0.2, 1.0}) {
    const auto slice = kernel_matrix(prop, t);
    const double z = 2.0 * t / (g.dx() * g.dx());
    const double rel = slice.K(0, 0) / testing::theta_kernel(0.0, t, g.length()) - 1.0;
    CHECK(rel > 0.0);
    CHECK(rel == doctest::Approx(1.0 / (8.0 * z)).epsilon(0.05));
  }
}

TEST_CASE("kernel slices satisfy symmetry, mass and positivity") {
  const std::vector<std::pair<Grid, FieldFamily>> cases = {
      {Grid(1, 64, 8.0), family::Lognormal{0.8, 0.4}},
      {Grid(1, 64, 8.0), family::DegenerateSine{2.0}},
      {Grid(1, 64, 8.0), family::DegeneratePlateau{1.0, 0.0, 2.0}},
      {Grid(2, 24, 8.0), family::Checkerboard{0.25, 4.0, 0}},
  };
  for (const auto& [g, fam] : cases) {
    const SpectralPropagator prop(assemble_H(make_field(g, fam, 3)));
    for (double t : kernel_time_grid(g)) {
      const auto s = kernel_matrix(prop, t);
      CHECK(s.symmetric_ok());
      CHECK(s.mass_ok());
      CHECK(s.positive_ok());
    }
  }
}

TEST_CASE("zero generator has the diagonal kernel") {
  const Grid g(2, 6, 3.0);
  const auto s = kernel_matrix(assemble_H(make_field(g, family::Constant{0.0})), 0.5);
  const Eigen::MatrixXd expected = Eigen::MatrixXd::Identity(36, 36) / g.cell_vol();
  CHECK((s.K - expected).cwiseAbs().maxCoeff() <= 1e-12 / g.cell_vol());
}

TEST_CASE("semigroup property of kernels") {
  const Grid g(1, 48, 8.0);
  const SpectralPropagator prop(assemble_H(make_field(g, family::Checkerboard{0.5, 2.0, 0})));
  for (auto [t, s] : std::vector<std::pair<double, double>>{{0.1, 0.2}, {0.05, 0.95}, {0.3, 0.3}}) {
    const auto Kts = kernel_matrix(prop, t + s).K;
    const Eigen::MatrixXd prod = kernel_matrix(prop, t).K * kernel_matrix(prop, s).K * g.cell_vol();
    CHECK((Kts - prod).cwiseAbs().maxCoeff() <= 1e-7 * Kts.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("spectral inequality h(phi) >= t^-1 (phi, (I - S_t) phi)") {
  for (int d : {1, 2}) {
    const Grid g(d, d == 1 ? 48 : 10, 8.0);
    const auto H = assemble_H(make_field(g, family::Lognormal{0.6, 0.5}, 11));
    const SpectralPropagator prop(H);
    for (int k = 0; k < 5; ++k) {
      const auto phi = random_vector(g.size(), 200 + k);
      const double h = form_h(H, phi).value;
      const double scale = H.norm_bound() * phi.squaredNorm() * g.cell_vol();
      for (double t : {1e-3, 0.1, 1.0}) {
        const double rhs = (phi.squaredNorm() - phi.dot(prop.apply(t, phi))) * g.cell_vol() / t;
        CHECK(h >= rhs - 1e-8 * scale);
      }
    }
  }
}

TEST_CASE("Krylov kernel columns agree with the dense kernel") {
  for (int d : {1, 2}) {
    const Grid g(d, d == 1 ? 24 : 6, 6.0);
    const auto H = assemble_H(make_field(g, family::Lognormal{0.5, 1.0}, 2));
    const auto dense = kernel_matrix(H, 0.4);
    const auto kry = kernel_matrix(H, 0.4, krylov_only());
    CHECK((dense.K - kry.K).cwiseAbs().maxCoeff() <= 1e-8 * dense.K.cwiseAbs().maxCoeff());
    CHECK(kry.mass_ok(1e-8));
  }
}

TEST_CASE("kernel_time_grid") {
  const Grid g(1, 128, 8.0);
  const auto ts = kernel_time_grid(g);
  REQUIRE(ts.size() == 16);
  CHECK(ts.front() == doctest::Approx(4.0 * g.dx() * g.dx()));
  CHECK(ts.back() == doctest::Approx(1.0));
  for (std::size_t i = 1; i < ts.size(); ++i) {
    CHECK(ts[i] > ts[i - 1]);
    if (i > 1) CHECK(ts[i] / ts[i - 1] == doctest::Approx(ts[1] / ts[0]));
  }
  const auto fine = kernel_time_grid(Grid(1, 1024, 8.0));
  CHECK(fine.front() == doctest::Approx(1e-3));
}
