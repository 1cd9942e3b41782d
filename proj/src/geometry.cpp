#include "coprime/geometry.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>

#include "coprime/errors.hpp"

namespace coprime {

ArrayGeometry::ArrayGeometry(int M, int N) : M_(M), N_(N) {
  if (M < 1 || N < 1) {
    throw InvalidArgument("coprime pair must be positive, got (" + std::to_string(M) + ", " +
                          std::to_string(N) + ")");
  }
  if (std::gcd(M, N) != 1) {
    throw NotCoprime("(" + std::to_string(M) + ", " + std::to_string(N) + ") share factor " +
                     std::to_string(std::gcd(M, N)));
  }
  if (M >= N) {
    throw OrderViolation("coprime pair requires M < N, got (" + std::to_string(M) + ", " +
                         std::to_string(N) + ")");
  }
  for (int i = 1; i <= N; ++i) positions_.push_back((i - 1) * M);
  for (int i = 1; i <= 2 * M - 1; ++i) positions_.push_back(i * N);
  std::sort(positions_.begin(), positions_.end());
}

ArrayGeometry make_coprime_array(int M, int N) { return ArrayGeometry(M, N); }

LagIndexMap::LagIndexMap(int max_lag, std::vector<std::vector<int>> sets,
                         LagConvention convention)
    : max_lag_(max_lag), sets_(std::move(sets)), convention_(convention) {
  if (static_cast<int>(sets_.size()) != 2 * max_lag_ + 1) {
    throw ShapeMismatch("lag map needs " + std::to_string(2 * max_lag_ + 1) + " sets");
  }
}

std::span<const int> LagIndexMap::indices(int lag) const {
  if (lag < -max_lag_ || lag > max_lag_) {
    throw LagOutOfRange("lag " + std::to_string(lag) + " outside [" + std::to_string(-max_lag_) +
                        ", " + std::to_string(max_lag_) + "]");
  }
  return sets_[static_cast<std::size_t>(lag + max_lag_)];
}

int LagIndexMap::total_indices() const noexcept {
  int total = 0;
  for (const auto& s : sets_) total += static_cast<int>(s.size());
  return total;
}

LagIndexMap coarray_lag_sets(const ArrayGeometry& g) {
  const int L = g.size();
  const int max_lag = g.max_lag();
  std::vector<std::vector<int>> sets(static_cast<std::size_t>(2 * max_lag + 1));
  for (int j = 0; j < L * L; ++j) {
    const int n = g.lag(j);
    if (n < -max_lag || n > max_lag) continue;
    sets[static_cast<std::size_t>(n + max_lag)].push_back(j);
  }
  return LagIndexMap(max_lag, std::move(sets), LagConvention::InnerMinusOuter);
}

std::string to_string(CombinerKind kind) {
  switch (kind) {
    case CombinerKind::Selection: return "selection";
    case CombinerKind::Averaging: return "averaging";
    case CombinerKind::Mmse: return "mmse";
  }
  return "unknown";
}

CombinerKind combiner_kind_from_string(const std::string& name) {
  if (name == "selection" || name == "sel") return CombinerKind::Selection;
  if (name == "averaging" || name == "avg") return CombinerKind::Averaging;
  if (name == "mmse") return CombinerKind::Mmse;
  throw InvalidArgument("unknown combiner '" + name + "'");
}

Combiner selection_combiner(const LagIndexMap& lags, int index_count, SelectionPicker picker) {
  Combiner E{CMatrix::Zero(index_count, lags.num_lags()), CombinerKind::Selection, {}};
  E.picked.reserve(static_cast<std::size_t>(lags.num_lags()));
  for (int col = 0; col < lags.num_lags(); ++col) {
    const auto set = lags.indices(lags.lag_of_column(col));
    const int j = picker == SelectionPicker::Smallest ? *std::min_element(set.begin(), set.end())
                                                      : *std::max_element(set.begin(), set.end());
    E.matrix(j, col) = 1.0;
    E.picked.push_back(j);
  }
  return E;
}

Combiner averaging_combiner(const LagIndexMap& lags, int index_count) {
  Combiner E{CMatrix::Zero(index_count, lags.num_lags()), CombinerKind::Averaging, {}};
  for (int col = 0; col < lags.num_lags(); ++col) {
    const auto set = lags.indices(lags.lag_of_column(col));
    const double w = 1.0 / static_cast<double>(set.size());
    for (int j : set) E.matrix(j, col) = w;
  }
  return E;
}

cplx phase_power(double theta, double n) {
  return std::polar(1.0, -std::numbers::pi * n * std::sin(theta));
}

CVector steering_vector(const ArrayGeometry& g, double theta) {
  CVector s(g.size());
  for (int l = 0; l < g.size(); ++l) s(l) = phase_power(theta, g.position(l));
  return s;
}

CMatrix steering_matrix(const ArrayGeometry& g, std::span<const double> thetas) {
  CMatrix S(g.size(), static_cast<Eigen::Index>(thetas.size()));
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    S.col(static_cast<Eigen::Index>(k)) = steering_vector(g, thetas[k]);
  }
  return S;
}

}  // namespace coprime
