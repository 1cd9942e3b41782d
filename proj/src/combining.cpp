#include "coprime/combining.hpp"

#include <algorithm>
#include <cmath>

#include "coprime/coarray.hpp"
#include "coprime/errors.hpp"

namespace coprime {

PowerPrior::PowerPrior(Mode m, std::vector<double> d, double sigma2)
    : mode_(m), d_(std::move(d)), sigma2_(sigma2) {
  for (double x : d_) {
    if (!(x > 0.0) || !std::isfinite(x)) throw InvalidArgument("power prior values must be positive");
  }
  if (!(sigma2_ > 0.0) || !std::isfinite(sigma2_)) {
    throw InvalidArgument("power prior noise value must be positive");
  }
}

PowerPrior PowerPrior::known_powers(std::vector<double> d, double sigma2) {
  return PowerPrior(Mode::KnownPowers, std::move(d), sigma2);
}

PowerPrior PowerPrior::known_ratios(std::vector<double> ratios, double noise_ratio) {
  std::vector<double> d{1.0};
  d.insert(d.end(), ratios.begin(), ratios.end());
  return PowerPrior(Mode::KnownRatios, std::move(d), noise_ratio);
}

PowerPrior PowerPrior::estimated(std::vector<double> d, double sigma2) {
  return PowerPrior(Mode::Estimated, std::move(d), sigma2);
}

SourceScene PowerPrior::scene(std::vector<double> thetas) const {
  if (static_cast<int>(thetas.size()) != K()) {
    throw InvalidArgument("power prior holds " + std::to_string(K()) + " sources, got " +
                          std::to_string(thetas.size()) + " DoAs");
  }
  return SourceScene{std::move(thetas), d_, sigma2_};
}

void MmseDesignInputs::validate() const {
  if (K < 0 || K >= geometry.virtual_size()) {
    throw InvalidArgument("K = " + std::to_string(K) + " must lie in [0, L')");
  }
  if (power.K() != K) throw InvalidArgument("power prior size differs from K");
  if (Q < 1) throw InvalidArgument("sample support Q must be at least 1");
  const int L = geometry.size();
  if (selection.matrix.rows() != L * L || selection.matrix.cols() != geometry.num_lags()) {
    throw ShapeMismatch("selection combiner has the wrong shape");
  }
}

// ---------------------------------------------------------------------------
// Factor V

namespace {

CMatrix factor_A(const SourceScene& scene, const ArrayGeometry& g) {
  const int K = scene.K();
  const int L = g.size();
  CMatrix A = CMatrix::Zero(L, K + L);
  const CMatrix S = steering_matrix(g, scene.thetas);
  for (int k = 0; k < K; ++k) A.col(k) = S.col(k) * std::sqrt(scene.powers[static_cast<std::size_t>(k)]);
  A.rightCols(L).diagonal().setConstant(std::sqrt(scene.noise_power));
  return A;
}

// Column index j of V splits as j = a * (K + L) + b: the conjugated factor
// contributes column a of A, the plain factor column b. Row index i splits
// into (outer, inner) physical elements the same way.
struct ColumnRoles {
  int a;
  int b;
};

ColumnRoles roles(int j, int KL) { return {j / KL, j % KL}; }

}  // namespace

CMatrix build_factor_V(const SourceScene& scene, const ArrayGeometry& g) {
  const CMatrix A = factor_A(scene, g);
  return kron(A.conjugate(), A);
}

CMatrix build_factor_V_entrywise(const SourceScene& scene, const ArrayGeometry& g) {
  const int K = scene.K();
  const int L = g.size();
  const int KL = K + L;
  const double sigma = std::sqrt(scene.noise_power);
  CMatrix V = CMatrix::Zero(L * L, KL * KL);
  for (int i = 0; i < L * L; ++i) {
    const int outer = g.outer(i);
    const int inner = g.inner(i);
    const double p_out = g.outer_position(i);
    const double p_in = g.inner_position(i);
    for (int j = 0; j < KL * KL; ++j) {
      const auto [a, b] = roles(j, KL);
      const auto ua = static_cast<std::size_t>(a);
      const auto ub = static_cast<std::size_t>(b);
      if (a < K && b < K) {
        V(i, j) = std::sqrt(scene.powers[ua] * scene.powers[ub]) *
                  phase_power(scene.thetas[ua], -p_out) * phase_power(scene.thetas[ub], p_in);
      } else if (a >= K && b < K) {
        if (outer == a - K) V(i, j) = sigma * std::sqrt(scene.powers[ub]) * phase_power(scene.thetas[ub], p_in);
      } else if (a < K && b >= K) {
        if (inner == b - K) V(i, j) = sigma * std::sqrt(scene.powers[ua]) * phase_power(scene.thetas[ua], -p_out);
      } else if (outer == a - K && inner == b - K) {
        V(i, j) = scene.noise_power;
      }
    }
  }
  return V;
}

cplx factor_V_gamma(const SourceScene& scene, const ArrayGeometry& g, int i, int m, int j) {
  const int K = scene.K();
  const int KL = K + g.size();
  const auto [a, b] = roles(j, KL);
  const auto ua = static_cast<std::size_t>(a);
  const auto ub = static_cast<std::size_t>(b);
  const double d_out = g.outer_position(i) - g.outer_position(m);
  const double d_in = g.inner_position(i) - g.inner_position(m);
  const double s2 = scene.noise_power;
  if (a < K && b < K) {
    return scene.powers[ua] * scene.powers[ub] * phase_power(scene.thetas[ua], -d_out) *
           phase_power(scene.thetas[ub], d_in);
  }
  if (a >= K && b < K) {
    if (g.outer(i) == a - K && g.outer(m) == a - K) {
      return s2 * scene.powers[ub] * phase_power(scene.thetas[ub], d_in);
    }
    return 0.0;
  }
  if (a < K && b >= K) {
    if (g.inner(i) == b - K && g.inner(m) == b - K) {
      return s2 * scene.powers[ua] * phase_power(scene.thetas[ua], -d_out);
    }
    return 0.0;
  }
  if (g.outer(i) == a - K && g.outer(m) == a - K && g.inner(i) == b - K && g.inner(m) == b - K) {
    return s2 * s2;
  }
  return 0.0;
}

WMoments w_moments(int K, int L, int Q) {
  if (Q < 1) throw InvalidArgument("sample support Q must be at least 1");
  const int KL = K + L;
  RVector mean = RVector::Zero(KL * KL);
  for (int k = 0; k < KL; ++k) mean(k * KL + k) = 1.0;
  Eigen::MatrixXd second = mean * mean.transpose();
  second.diagonal().array() += 1.0 / Q;
  return {std::move(mean), std::move(second)};
}

// ---------------------------------------------------------------------------
// Expectation matrices

IntegerCharacteristic::IntegerCharacteristic(const CharacteristicIntegralTable& table, int bound)
    : bound_(bound), values_(static_cast<std::size_t>(2 * bound + 1)) {
  for (int x = -bound; x <= bound; ++x) values_[static_cast<std::size_t>(x + bound)] = table(x);
}

namespace {

int max_position(const ArrayGeometry& g) {
  return *std::max_element(g.positions().begin(), g.positions().end());
}

}  // namespace

CMatrix build_H_E(const MmseDesignInputs& in, const CharacteristicIntegralTable& table) {
  in.validate();
  const auto& g = in.geometry;
  const int L2 = g.size() * g.size();
  const IntegerCharacteristic I(table, 2 * max_position(g));
  const auto& d = in.power.source_powers();
  double sum_d = 0.0;
  double norm2 = 0.0;
  for (double x : d) {
    sum_d += x;
    norm2 += x * x;
  }
  const double s2 = in.power.noise_power();
  const auto delta = [](int x) { return x == 0 ? 1.0 : 0.0; };

  CMatrix H(L2, L2);
  for (int m = 0; m < L2; ++m) {
    const int wm = g.lag(m);
    for (int i = 0; i < L2; ++i) {
      const int wi = g.lag(i);
      H(i, m) = norm2 * I(wi - wm) + s2 * s2 * delta(wi) * delta(wm) +
                I(wi) * I(-wm) * (sum_d * sum_d - norm2) +
                s2 * sum_d * (delta(wi) * I(-wm) + I(wi) * delta(wm));
    }
  }
  return H;
}

CMatrix build_Vtilde_E(const MmseDesignInputs& in, const CharacteristicIntegralTable& table) {
  in.validate();
  const auto& g = in.geometry;
  const int K = in.K;
  const int L = g.size();
  const int KL = K + L;
  const int L2 = L * L;
  const IntegerCharacteristic I(table, 2 * max_position(g));
  const auto& d = in.power.source_powers();
  const double s2 = in.power.noise_power();

  CMatrix Vt = CMatrix::Zero(L2, L2);
  for (int m = 0; m < L2; ++m) {
    for (int i = 0; i < L2; ++i) {
      const int d_out = g.outer_position(i) - g.outer_position(m);
      const int d_in = g.inner_position(i) - g.inner_position(m);
      const bool same_outer = g.outer(i) == g.outer(m);
      const bool same_inner = g.inner(i) == g.inner(m);
      cplx acc = 0.0;
      for (int j = 0; j < KL * KL; ++j) {
        const auto [a, b] = roles(j, KL);
        if (a < K && b < K) {
          const double dd = d[static_cast<std::size_t>(a)] * d[static_cast<std::size_t>(b)];
          acc += a == b ? dd * I(d_in - d_out) : dd * I(-d_out) * I(d_in);
        } else if (a >= K && b < K) {
          if (same_outer && g.outer(i) == a - K) acc += s2 * d[static_cast<std::size_t>(b)] * I(d_in);
        } else if (a < K && b >= K) {
          if (same_inner && g.inner(i) == b - K) acc += s2 * d[static_cast<std::size_t>(a)] * I(-d_out);
        } else if (same_outer && same_inner && g.outer(i) == a - K && g.inner(i) == b - K) {
          acc += s2 * s2;
        }
      }
      Vt(i, m) = acc;
    }
  }
  return Vt;
}

CMatrix build_G_E(const CMatrix& H_E, const CMatrix& Vtilde_E, int Q) {
  if (H_E.rows() != Vtilde_E.rows() || H_E.cols() != Vtilde_E.cols() || H_E.rows() != H_E.cols()) {
    throw ShapeMismatch("G_E: H_E and Vtilde_E must be square and of equal size");
  }
  if (Q < 1) throw InvalidArgument("sample support Q must be at least 1");
  return H_E + Vtilde_E / static_cast<double>(Q);
}

MmseSolution solve_mmse_combiner(const CMatrix& G_E, const CMatrix& H_E, const Combiner& E_sel,
                                 double rank_tol) {
  if (G_E.rows() != G_E.cols() || H_E.rows() != G_E.rows() || H_E.cols() != G_E.cols() ||
      E_sel.matrix.rows() != G_E.rows()) {
    throw ShapeMismatch("solve_mmse_combiner: incompatible shapes");
  }
  const double scale = std::max(G_E.cwiseAbs().maxCoeff(), 1e-300);
  if (!hermitian_check(G_E, 1e-8 * scale)) throw InvalidArgument("G_E is not Hermitian");

  const CMatrix C = H_E * E_sel.matrix;
  const Svd factor = svd(G_E);
  MmseSolution out;
  out.combiner.matrix = min_norm_lstsq(factor, C, rank_tol);
  out.combiner.kind = CombinerKind::Mmse;
  out.rank = numerical_rank(factor.singular, rank_tol);
  out.dimension = static_cast<int>(G_E.rows());
  const CMatrix residual = G_E * out.combiner.matrix - C;
  out.residuals.reserve(static_cast<std::size_t>(C.cols()));
  for (Eigen::Index c = 0; c < C.cols(); ++c) out.residuals.push_back(residual.col(c).norm());
  return out;
}

MmseDesign design_mmse_combiner(const MmseDesignInputs& in, const CharacteristicIntegralTable& table) {
  MmseDesign out;
  out.H_E = build_H_E(in, table);
  out.Vtilde_E = build_Vtilde_E(in, table);
  out.G_E = build_G_E(out.H_E, out.Vtilde_E, in.Q);
  out.solution = solve_mmse_combiner(out.G_E, out.H_E, in.selection);
  return out;
}

CVector apply_combiner(const Combiner& E, const CVector& r_hat) {
  if (E.matrix.rows() != r_hat.size()) {
    throw ShapeMismatch("combiner expects length " + std::to_string(E.matrix.rows()) +
                        ", got " + std::to_string(r_hat.size()));
  }
  return E.matrix.adjoint() * r_hat;
}

// ---------------------------------------------------------------------------
// Capon power estimation

PowerPrior estimate_powers_capon(const CMatrix& Z_avg, const std::vector<double>& thetas,
                                 NoiseEstimator noise) {
  if (Z_avg.rows() != Z_avg.cols() || Z_avg.rows() == 0) {
    throw ShapeMismatch("Capon estimation needs a square matrix");
  }
  const auto Lv = static_cast<int>(Z_avg.rows());
  const Svd f = svd(Z_avg);
  const double smax = f.singular(0);
  const double smin = f.singular(Lv - 1);
  const double mean_diag = std::abs(Z_avg.trace().real()) / Lv;

  CMatrix Z = Z_avg;
  if (!(smin > 0.0) || smax / smin > 1e12) Z.diagonal().array() += 1e-8 * mean_diag;
  Eigen::FullPivLU<CMatrix> lu(Z);
  if (!lu.isInvertible()) throw SingularMatrix("Capon: coarray matrix is singular after loading");

  // Indefinite estimates can yield non-positive Capon values; floor them.
  const double floor = std::max(1e-6 * mean_diag, 1e-300);
  std::vector<double> d;
  d.reserve(thetas.size());
  for (double t : thetas) {
    const CVector v = virtual_steering_vector(Lv, t);
    const cplx q = v.dot(lu.solve(v));  // v^H Z^-1 v
    const double dk = (1.0 / q).real();
    if (!std::isfinite(dk)) throw SingularMatrix("Capon: non-finite power estimate");
    d.push_back(std::max(dk, floor));
  }

  double sigma2 = 0.0;
  if (noise == NoiseEstimator::SmallestSingularValue) {
    sigma2 = smin;
  } else {
    const CMatrix herm = 0.5 * (Z_avg + Z_avg.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
    sigma2 = es.eigenvalues()(0);
  }
  return PowerPrior::estimated(std::move(d), std::max(sigma2, floor));
}

}  // namespace coprime
