#pragma once

// DoA prior distributions, their densities and sampling, and the
// characteristic integral I(x) = E{v(theta)^x} = int f(theta) exp(-i pi x sin theta).

#include <cstdint>
#include <functional>
#include <map>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

#include "coprime/numerics.hpp"
#include "coprime/random.hpp"

namespace coprime {

struct UniformPrior {
  double a;
  double b;
};

struct TruncatedNormalPrior {
  double a;
  double b;
  double mu;
  double sigma2;
};

/// Prior D(a, b) of each DoA, support (a, b) with -pi/2 < a < b <= pi/2.
class DoAPrior {
 public:
  using Kind = std::variant<UniformPrior, TruncatedNormalPrior>;

  /// Throws InvalidArgument on a bad support or variance.
  static DoAPrior uniform(double a, double b);
  static DoAPrior truncated_normal(double a, double b, double mu, double sigma2);

  double lower() const noexcept;
  double upper() const noexcept;
  const Kind& kind() const noexcept { return kind_; }
  bool is_uniform() const noexcept { return std::holds_alternative<UniformPrior>(kind_); }

  /// Zero outside the open support.
  double pdf(double theta) const;

  /// K i.i.d. draws. Truncated normal uses rejection from the parent normal.
  std::vector<double> sample(int K, Rng& rng) const;

  std::string describe() const;

 private:
  explicit DoAPrior(Kind k);
  Kind kind_;
  double norm_ = 1.0;  // truncated normal: erf mass of (a, b)
};

using ComplexIntegrand = std::function<cplx(double)>;

struct QuadratureResult {
  cplx value;
  double error_estimate;
  int subdivisions;
};

/// Adaptive 7/15-point Gauss-Kronrod integration of a complex integrand.
/// Throws QuadratureNonConvergence when abs_tol cannot be met within
/// max_subdivisions intervals.
QuadratureResult integrate_gauss_kronrod(const ComplexIntegrand& f, double a, double b,
                                         double abs_tol, int max_subdivisions = 4000);

constexpr double kCharacteristicTolerance = 1e-10;

/// I(x) by adaptive quadrature to `abs_tol`.
cplx characteristic_integral(const DoAPrior& prior, double x,
                             double abs_tol = kCharacteristicTolerance);

/// Memoized I(x), keyed by x quantized to 1e-12. Concurrent lookups are
/// safe; misses take an exclusive lock to insert.
class CharacteristicIntegralTable {
 public:
  explicit CharacteristicIntegralTable(DoAPrior prior, double abs_tol = kCharacteristicTolerance);

  cplx operator()(double x) const;
  /// Fill all integer arguments in [lo, hi].
  void precompute(int lo, int hi);

  const DoAPrior& prior() const noexcept { return prior_; }
  double tolerance() const noexcept { return tol_; }
  std::size_t cached() const;

 private:
  DoAPrior prior_;
  double tol_;
  mutable std::shared_mutex mutex_;
  mutable std::map<std::int64_t, cplx> cache_;
};

/// Bessel function of the first kind, order zero.
double bessel_j0(double z);

}  // namespace coprime
