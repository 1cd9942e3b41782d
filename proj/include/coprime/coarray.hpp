#pragma once

// Spatial smoothing of the combined lag vector into the virtual-ULA matrix Z
// and MUSIC DoA estimation on it.

#include <vector>

#include "coprime/geometry.hpp"
#include "coprime/numerics.hpp"
#include "coprime/simulation.hpp"

namespace coprime {

struct SmoothedMatrix {
  CMatrix Z;  // L' x L'
  CombinerKind source = CombinerKind::Selection;
};

/// Column m of Z holds lags (-m) ... (L' - 1 - m), i.e. Z(k, m) is the lag
/// k - m entry of r_co. Throws ShapeMismatch unless r_co has odd length.
SmoothedMatrix spatial_smooth(const CVector& r_co, CombinerKind source = CombinerKind::Selection);

/// [1, v(theta), ..., v(theta)^(L'-1)].
CVector virtual_steering_vector(int virtual_size, double theta);

/// S_co diag(d) S_co^H + sigma^2 I on the length-L' virtual ULA.
CMatrix nominal_coarray_matrix(const SourceScene& scene, int virtual_size);

/// n points from a to b inclusive.
std::vector<double> uniform_grid(double a, double b, int n);

struct MusicResult {
  std::vector<double> grid;
  std::vector<double> spectrum;
  std::vector<double> estimates;  // ascending
  int minima_found = 0;
  bool too_few_minima = false;
};

/// P(theta) = ||(I - U U^H) v(theta)||^2 with U the K dominant left singular
/// vectors of Z. Estimates are the K lowest interior strict local minima,
/// each refined by a parabola through its two grid neighbours.
MusicResult music_spectrum(const CMatrix& Z, int K, const std::vector<double>& grid);

struct DoaEstimate {
  std::vector<double> thetas;  // ascending, always K entries
  int minima_found = 0;
  bool padded = false;
};

/// MUSIC estimates, padded with the grid midpoint when fewer than K minima exist.
DoaEstimate estimate_doas(const CMatrix& Z_hat, int K, const std::vector<double>& grid);

}  // namespace coprime
