#pragma once

// Minimum-MSE autocorrelation combining.
//
// With A = [S diag(sqrt(d)), sigma I] the autocorrelation factors as
// R = A A^H, so r = V i and r_hat = V w with V = conj(A) (x) A,
// i = vec(I_{K+L}) and w = vec((1/Q) sum_q x_q x_q^H), x_q ~ CN(0, I).
// The MMSE combiner solves G_E E = H_E E_sel, where
//   H_E = E_Theta{r r^H},  Vtilde_E = E_Theta{V V^H},  G_E = H_E + Vtilde_E / Q,
// and the combined estimate is E^H r_hat.

#include <iosfwd>
#include <vector>

#include "coprime/distributions.hpp"
#include "coprime/geometry.hpp"
#include "coprime/numerics.hpp"
#include "coprime/simulation.hpp"

namespace coprime {

/// Source and noise powers fed to the MMSE design. Only ratios matter.
class PowerPrior {
 public:
  enum class Mode { KnownPowers, KnownRatios, Estimated };

  static PowerPrior known_powers(std::vector<double> d, double sigma2);
  /// ratios = {d2/d1, ..., dK/d1}; noise_ratio = sigma^2 / d1.
  static PowerPrior known_ratios(std::vector<double> ratios, double noise_ratio);
  static PowerPrior estimated(std::vector<double> d, double sigma2);

  Mode mode() const noexcept { return mode_; }
  int K() const noexcept { return static_cast<int>(d_.size()); }
  const std::vector<double>& source_powers() const noexcept { return d_; }
  double noise_power() const noexcept { return sigma2_; }

  /// Scene with these powers at the given DoAs.
  SourceScene scene(std::vector<double> thetas) const;

 private:
  PowerPrior(Mode m, std::vector<double> d, double sigma2);
  Mode mode_;
  std::vector<double> d_;
  double sigma2_;
};

struct MmseDesignInputs {
  ArrayGeometry geometry;
  int K;
  DoAPrior prior;
  PowerPrior power;
  int Q;
  Combiner selection;

  /// Throws InvalidArgument when K >= L', Q < 1 or shapes disagree.
  void validate() const;
};

/// V = conj(A) (x) A, size L^2 x (K+L)^2.
CMatrix build_factor_V(const SourceScene& scene, const ArrayGeometry& g);

/// The same matrix assembled entry by entry from the source/noise index cases.
CMatrix build_factor_V_entrywise(const SourceScene& scene, const ArrayGeometry& g);

/// gamma_j^{(i,m)} = [V]_{i,j} conj([V]_{m,j}) from its closed form.
cplx factor_V_gamma(const SourceScene& scene, const ArrayGeometry& g, int i, int m, int j);

struct WMoments {
  RVector mean;           // i = vec(I_{K+L})
  Eigen::MatrixXd second; // i i^T + I / Q
};

WMoments w_moments(int K, int L, int Q);

/// Dense I(x) over integer arguments [-bound, bound].
class IntegerCharacteristic {
 public:
  IntegerCharacteristic(const CharacteristicIntegralTable& table, int bound);
  cplx operator()(int x) const { return values_[static_cast<std::size_t>(x + bound_)]; }
  int bound() const noexcept { return bound_; }

 private:
  int bound_;
  std::vector<cplx> values_;
};

CMatrix build_H_E(const MmseDesignInputs& in, const CharacteristicIntegralTable& table);
CMatrix build_Vtilde_E(const MmseDesignInputs& in, const CharacteristicIntegralTable& table);
/// Throws ShapeMismatch.
CMatrix build_G_E(const CMatrix& H_E, const CMatrix& Vtilde_E, int Q);

constexpr double kRankTolerance = 1e-10;

struct MmseSolution {
  Combiner combiner;
  std::vector<double> residuals;  // ||G e_i - c_i||_2 per column
  int rank = 0;
  int dimension = 0;
  /// Set when rank < L^2; the minimum-norm least-squares columns are still returned.
  bool rank_deficient() const noexcept { return rank < dimension; }
};

/// Minimum-norm solution of G_E e_i = [H_E E_sel]_{:,i} for every column.
MmseSolution solve_mmse_combiner(const CMatrix& G_E, const CMatrix& H_E, const Combiner& E_sel,
                                 double rank_tol = kRankTolerance);

struct MmseDesign {
  CMatrix H_E;
  CMatrix Vtilde_E;
  CMatrix G_E;
  MmseSolution solution;
};

MmseDesign design_mmse_combiner(const MmseDesignInputs& in, const CharacteristicIntegralTable& table);

/// E^H r_hat, length 2L' - 1. Throws ShapeMismatch.
CVector apply_combiner(const Combiner& E, const CVector& r_hat);

enum class NoiseEstimator {
  SmallestSingularValue,  // sqrt of the smallest eigenvalue of Z Z^H
  SmallestEigenvalue,     // smallest eigenvalue of the Hermitian part of Z
};

/// Capon powers d_k = 1 / (v^H Z^-1 v) at the given DoAs plus a noise-power
/// estimate. Throws SingularMatrix if Z stays singular after regularization.
PowerPrior estimate_powers_capon(const CMatrix& Z_avg, const std::vector<double>& thetas,
                                 NoiseEstimator noise = NoiseEstimator::SmallestSingularValue);

/// Text matrix: L^2 rows, 2L' - 1 columns, entries "re+imj".
void write_combiner(std::ostream& os, const Combiner& E);
/// Throws InvalidArgument on malformed input.
Combiner read_combiner(std::istream& is);

}  // namespace coprime
