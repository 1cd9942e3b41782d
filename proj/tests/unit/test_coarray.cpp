#include "doctest.h"

#include <numbers>

#include "coprime/coarray.hpp"
#include "coprime/combining.hpp"
#include "coprime/distributions.hpp"
#include "coprime/errors.hpp"
#include "helpers.hpp"

using namespace coprime;

namespace {

constexpr double pi = std::numbers::pi;

// Z = [F_1 r, ..., F_L' r] with F_m = [0_{L' x (L'-m)}, I_{L'}, 0_{L' x (m-1)}], m = 1..L'.
CMatrix smooth_by_selection_matrices(const CVector& r_co) {
  const int Lv = static_cast<int>((r_co.size() + 1) / 2);
  CMatrix F(Lv, Lv * r_co.size());
  F.setZero();
  for (int m = 1; m <= Lv; ++m)
    for (int k = 0; k < Lv; ++k) F(k, (m - 1) * r_co.size() + (Lv - m) + k) = 1.0;
  return F * kron(CMatrix::Identity(Lv, Lv), r_co);
}

CMatrix ula_form(const SourceScene& s, int Lv) {
  CMatrix S(Lv, s.K());
  for (int k = 0; k < s.K(); ++k)
    for (int n = 0; n < Lv; ++n) S(n, k) = std::exp(cplx(0.0, -pi * n * std::sin(s.thetas[k])));
  Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(s.powers.data(), s.K());
  return S * d.cast<cplx>().asDiagonal() * S.adjoint() + s.noise_power * CMatrix::Identity(Lv, Lv);
}

double max_abs_error(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double e = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) e = std::max(e, std::abs(a[k] - b[k]));
  return e;
}

}  // namespace

TEST_CASE("spatial smoothing of a broadside source") {
  const ArrayGeometry g(2, 3);
  const LagIndexMap m = coarray_lag_sets(g);
  const SourceScene s{{0.0}, {1.0}, 1.0};
  const CVector r_co = apply_combiner(selection_combiner(m, 36), nominal_autocorrelation(s, g).r);
  const SmoothedMatrix Z = spatial_smooth(r_co, CombinerKind::Selection);
  CHECK((Z.Z - (CMatrix::Ones(8, 8) + CMatrix::Identity(8, 8))).norm() < 1e-12);
  CHECK_THROWS_AS(spatial_smooth(CVector::Zero(4)), ShapeMismatch);
}

TEST_CASE("smoothing equals the selection-matrix form and is linear") {
  Rng rng(51);
  for (int t = 0; t < 10; ++t) {
    const CVector r1 = testing::random_matrix(15, 1, rng);
    const CVector r2 = testing::random_matrix(15, 1, rng);
    CHECK((spatial_smooth(r1).Z - smooth_by_selection_matrices(r1)).norm() == 0.0);
    const cplx a(0.3, -1.2), b(2.0, 0.5);
    CHECK((spatial_smooth(a * r1 + b * r2).Z - (a * spatial_smooth(r1).Z + b * spatial_smooth(r2).Z)).norm() < 1e-13);
  }
}

TEST_CASE("smoothing nominal data gives the virtual ULA autocorrelation") {
  Rng rng(52);
  for (auto [M, N] : {std::pair{2, 3}, std::pair{2, 5}}) {
    const ArrayGeometry g(M, N);
    const LagIndexMap m = coarray_lag_sets(g);
    const int L2 = g.size() * g.size();
    for (int t = 0; t < 20; ++t) {
      const SourceScene s = testing::random_scene(1 + t % 6, rng);
      const CVector r_co = apply_combiner(averaging_combiner(m, L2), nominal_autocorrelation(s, g).r);
      const CMatrix expected = ula_form(s, g.virtual_size());
      CHECK((spatial_smooth(r_co).Z - expected).norm() < 1e-10);
      CHECK((nominal_coarray_matrix(s, g.virtual_size()) - expected).norm() < 1e-10);
    }
  }
}

TEST_CASE("virtual steering vector and grid") {
  const CVector v = virtual_steering_vector(8, 0.4);
  for (int n = 0; n < 8; ++n) CHECK(std::abs(v(n) - std::exp(cplx(0.0, -pi * n * std::sin(0.4)))) < 1e-13);
  const auto grid = uniform_grid(-1.0, 1.0, 5);
  CHECK(grid == std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0});
}

TEST_CASE("MUSIC on an exact single-source matrix") {
  const SourceScene s{{0.3}, {10.0}, 1.0};
  const CMatrix Z = nominal_coarray_matrix(s, 8);
  const double h = 1e-3;
  std::vector<double> grid;
  for (int k = -200; k <= 200; ++k) grid.push_back(0.3 + k * h);
  const MusicResult res = music_spectrum(Z, 1, grid);
  CHECK(res.spectrum[200] < 1e-8);
  REQUIRE(res.estimates.size() == 1);
  CHECK(std::abs(res.estimates[0] - 0.3) < h / 2);
  CHECK_FALSE(res.too_few_minima);
  for (double p : res.spectrum) {
    CHECK(p >= 0.0);
    CHECK(p <= 8.0 + 1e-12);
  }
}

TEST_CASE("MUSIC spectrum equals L' away from the signal subspace") {
  const SourceScene s{{0.0}, {1.0}, 1.0};
  const CMatrix Z = nominal_coarray_matrix(s, 8);
  // v(asin(2/8)) is orthogonal to v(0) on an 8-element ULA.
  const MusicResult res = music_spectrum(Z, 1, {std::asin(0.25)});
  CHECK(res.spectrum[0] == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("more sources than sensors") {
  const ArrayGeometry g(2, 3);
  Rng rng(53);
  const auto grid = uniform_grid(-pi / 2, pi / 2, 3601);  // 0.05 degree step
  for (int t = 0; t < 10; ++t) {
    const auto thetas = testing::separated_doas(5, -1.3, 1.3, testing::rad(5.0), rng);
    const SourceScene s{thetas, std::vector<double>(5, 10.0), 1.0};
    const MusicResult res = music_spectrum(nominal_coarray_matrix(s, g.virtual_size()), 5, grid);
    REQUIRE(res.estimates.size() == 5);
    CHECK(testing::deg(max_abs_error(res.estimates, thetas)) < 0.5);
  }
}

TEST_CASE("nominal end-to-end recovery with every combiner") {
  Rng rng(54);
  const ArrayGeometry g(2, 3);
  const LagIndexMap m = coarray_lag_sets(g);
  const DoAPrior prior = DoAPrior::uniform(-pi / 2, pi / 2);
  CharacteristicIntegralTable table(prior);
  const auto grid = uniform_grid(-pi / 2, pi / 2, 2001);
  const double step = grid[1] - grid[0];
  for (int K = 1; K <= g.virtual_size() - 1; ++K) {
    const auto thetas = testing::separated_doas(K, -1.2, 1.2, 0.15, rng);
    const SourceScene s{thetas, std::vector<double>(K, 10.0), 1.0};
    const CVector r = nominal_autocorrelation(s, g).r;
    MmseDesignInputs in{g, K, prior, PowerPrior::known_powers(s.powers, 1.0), 10, selection_combiner(m, 36)};
    const Combiner combiners[] = {selection_combiner(m, 36), averaging_combiner(m, 36),
                                  design_mmse_combiner(in, table).solution.combiner};
    for (const auto& E : combiners) {
      const DoaEstimate est = estimate_doas(spatial_smooth(apply_combiner(E, r)).Z, K, grid);
      const double err = max_abs_error(est.thetas, thetas);
      if (E.kind != CombinerKind::Mmse) {
        CHECK_MESSAGE(err < step, "K=" << K << " combiner " << to_string(E.kind));
      } else if (K <= 2) {
        // The MMSE output shrinks noiseless input toward the prior mean, so the
        // signal subspace is only approximate.
        CHECK_MESSAGE(err < testing::rad(1.0), "K=" << K);
      }
    }
  }
}

TEST_CASE("DoA estimation from sampled data") {
  const ArrayGeometry g(2, 3);
  const LagIndexMap m = coarray_lag_sets(g);
  const SourceScene s = equal_power_scene({-0.6, 0.4}, 10.0, 0.0);
  const auto grid = uniform_grid(-pi / 2, pi / 2, 2001);
  const CVector r_hat = sample_autocorrelation(generate_snapshots(s, g, 10000, 17)).r;
  const CMatrix Z_hat = spatial_smooth(apply_combiner(averaging_combiner(m, 36), r_hat)).Z;
  const DoaEstimate est = estimate_doas(Z_hat, 2, grid);
  CHECK(testing::deg(max_abs_error(est.thetas, s.thetas)) < 0.5);

  // Positive scaling leaves the subspace, hence the estimates, unchanged.
  CHECK(estimate_doas(3.7 * Z_hat, 2, grid).thetas == est.thetas);

  const CMatrix Z = nominal_coarray_matrix(s, 8);
  CHECK(estimate_doas(Z, 2, grid).thetas == music_spectrum(Z, 2, grid).estimates);
  CHECK(estimate_doas(Z, 0, grid).thetas.empty());
}

TEST_CASE("too few minima are padded and flagged") {
  // Five grid points hold at most one interior minimum here.
  const SourceScene s{{0.1}, {10.0}, 1.0};
  const CMatrix Z = nominal_coarray_matrix(s, 8);
  const std::vector<double> grid{-0.2, -0.05, 0.1, 0.25, 0.4};
  const DoaEstimate est = estimate_doas(Z, 3, grid);
  CHECK(est.padded);
  CHECK(est.minima_found == 1);
  REQUIRE(est.thetas.size() == 3);
  CHECK(std::count(est.thetas.begin(), est.thetas.end(), 0.1) >= 2);  // grid midpoint
  CHECK(std::is_sorted(est.thetas.begin(), est.thetas.end()));
  CHECK_THROWS_AS(music_spectrum(Z, 8, grid), InvalidArgument);
}
