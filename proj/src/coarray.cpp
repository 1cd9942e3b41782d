#include "coprime/coarray.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "coprime/errors.hpp"

namespace coprime {

SmoothedMatrix spatial_smooth(const CVector& r_co, CombinerKind source) {
  if (r_co.size() < 1 || r_co.size() % 2 == 0) {
    throw ShapeMismatch("spatial smoothing needs an odd-length lag vector, got " +
                        std::to_string(r_co.size()));
  }
  const auto Lv = (r_co.size() + 1) / 2;
  SmoothedMatrix out{CMatrix(Lv, Lv), source};
  for (Eigen::Index m = 0; m < Lv; ++m) out.Z.col(m) = r_co.segment(Lv - 1 - m, Lv);
  return out;
}

CVector virtual_steering_vector(int virtual_size, double theta) {
  CVector v(virtual_size);
  const cplx step = std::polar(1.0, -std::numbers::pi * std::sin(theta));
  cplx cur = 1.0;
  for (int k = 0; k < virtual_size; ++k) {
    v(k) = cur;
    cur *= step;
  }
  return v;
}

CMatrix nominal_coarray_matrix(const SourceScene& scene, int virtual_size) {
  CMatrix Z = CMatrix::Zero(virtual_size, virtual_size);
  for (int k = 0; k < scene.K(); ++k) {
    const CVector s = virtual_steering_vector(virtual_size, scene.thetas[static_cast<std::size_t>(k)]);
    Z.noalias() += scene.powers[static_cast<std::size_t>(k)] * s * s.adjoint();
  }
  Z.diagonal().array() += scene.noise_power;
  return Z;
}

std::vector<double> uniform_grid(double a, double b, int n) {
  if (n < 2) throw InvalidArgument("grid needs at least two points");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return g;
}

namespace {

double parabolic_vertex(double x0, double x1, double x2, double f0, double f1, double f2) {
  const double num = (x1 - x0) * (x1 - x0) * (f1 - f2) - (x1 - x2) * (x1 - x2) * (f1 - f0);
  const double den = (x1 - x0) * (f1 - f2) - (x1 - x2) * (f1 - f0);
  if (den == 0.0 || !std::isfinite(num / den)) return x1;
  return std::clamp(x1 - 0.5 * num / den, x0, x2);
}

}  // namespace

MusicResult music_spectrum(const CMatrix& Z, int K, const std::vector<double>& grid) {
  if (Z.rows() != Z.cols()) throw ShapeMismatch("MUSIC needs a square matrix");
  const auto Lv = static_cast<int>(Z.rows());
  if (K < 0 || K >= Lv) throw InvalidArgument("MUSIC needs 0 <= K < L'");

  MusicResult out;
  out.grid = grid;
  out.spectrum.resize(grid.size());
  const Svd f = svd(Z);
  const CMatrix noise_basis = f.U.rightCols(Lv - K);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const CVector v = virtual_steering_vector(Lv, grid[g]);
    out.spectrum[g] = (noise_basis.adjoint() * v).squaredNorm();
  }
  if (K == 0) return out;

  std::vector<std::size_t> minima;
  for (std::size_t g = 1; g + 1 < grid.size(); ++g) {
    if (out.spectrum[g] < out.spectrum[g - 1] && out.spectrum[g] < out.spectrum[g + 1]) {
      minima.push_back(g);
    }
  }
  out.minima_found = static_cast<int>(minima.size());
  out.too_few_minima = out.minima_found < K;
  std::stable_sort(minima.begin(), minima.end(), [&](std::size_t x, std::size_t y) {
    return out.spectrum[x] < out.spectrum[y];
  });
  minima.resize(std::min(minima.size(), static_cast<std::size_t>(K)));
  for (std::size_t g : minima) {
    out.estimates.push_back(parabolic_vertex(grid[g - 1], grid[g], grid[g + 1], out.spectrum[g - 1],
                                             out.spectrum[g], out.spectrum[g + 1]));
  }
  std::sort(out.estimates.begin(), out.estimates.end());
  return out;
}

DoaEstimate estimate_doas(const CMatrix& Z_hat, int K, const std::vector<double>& grid) {
  DoaEstimate out;
  if (K == 0) return out;
  const MusicResult m = music_spectrum(Z_hat, K, grid);
  out.thetas = m.estimates;
  out.minima_found = m.minima_found;
  if (static_cast<int>(out.thetas.size()) < K) {
    out.padded = true;
    const double mid = 0.5 * (grid.front() + grid.back());
    out.thetas.resize(static_cast<std::size_t>(K), mid);
    std::sort(out.thetas.begin(), out.thetas.end());
  }
  return out;
}

}  // namespace coprime
