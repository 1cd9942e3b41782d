#pragma once

// Coprime array geometry, difference-coarray lag sets and the selection and
// averaging combiners.
//
// Index conventions (0-based throughout):
//   A length-L^2 vector indexed by j is a Kronecker product x (x) y with the
//   first operand supplying the block index, so j = outer * L + inner. For
//   vec(R) that means outer = column and inner = row.
//   The lag of index j is p[inner] - p[outer]; with a(theta) = conj(s) (x) s
//   this gives [a(theta)]_j = v(theta)^lag for v(theta) = exp(-i pi sin theta).

#include <span>
#include <string>
#include <vector>

#include "coprime/numerics.hpp"

namespace coprime {

class ArrayGeometry {
 public:
  /// Throws NotCoprime or OrderViolation.
  ArrayGeometry(int M, int N);

  int M() const noexcept { return M_; }
  int N() const noexcept { return N_; }
  /// Physical element count L = 2M + N - 1.
  int size() const noexcept { return static_cast<int>(positions_.size()); }
  /// Virtual ULA length L' = MN + M.
  int virtual_size() const noexcept { return M_ * N_ + M_; }
  int max_lag() const noexcept { return virtual_size() - 1; }
  /// 2L' - 1.
  int num_lags() const noexcept { return 2 * virtual_size() - 1; }

  std::span<const int> positions() const noexcept { return positions_; }
  int position(int l) const { return positions_.at(static_cast<std::size_t>(l)); }

  // Helpers over the L^2 Kronecker index.
  int outer(int j) const noexcept { return j / size(); }
  int inner(int j) const noexcept { return j % size(); }
  int outer_position(int j) const noexcept { return positions_[static_cast<std::size_t>(outer(j))]; }
  int inner_position(int j) const noexcept { return positions_[static_cast<std::size_t>(inner(j))]; }
  int lag(int j) const noexcept { return inner_position(j) - outer_position(j); }

  bool operator==(const ArrayGeometry&) const = default;

 private:
  int M_;
  int N_;
  std::vector<int> positions_;
};

ArrayGeometry make_coprime_array(int M, int N);

/// Sign convention of the lag attached to a Kronecker index.
enum class LagConvention {
  InnerMinusOuter,  // n = p[inner] - p[outer]
};

/// Lag sets J_n for n in [1 - L', L' - 1]. Indices whose difference lies
/// outside that range belong to no set.
class LagIndexMap {
 public:
  LagIndexMap(int max_lag, std::vector<std::vector<int>> sets, LagConvention convention);

  int max_lag() const noexcept { return max_lag_; }
  int num_lags() const noexcept { return 2 * max_lag_ + 1; }
  LagConvention convention() const noexcept { return convention_; }

  /// Throws LagOutOfRange.
  std::span<const int> indices(int lag) const;
  int cardinality(int lag) const { return static_cast<int>(indices(lag).size()); }
  /// Column of the combiner that corresponds to `lag`.
  int column(int lag) const { return lag + max_lag_; }
  int lag_of_column(int column) const { return column - max_lag_; }
  /// Sum of |J_n| over all lags.
  int total_indices() const noexcept;

 private:
  int max_lag_;
  std::vector<std::vector<int>> sets_;
  LagConvention convention_;
};

LagIndexMap coarray_lag_sets(const ArrayGeometry& g);

enum class CombinerKind { Selection, Averaging, Mmse };

std::string to_string(CombinerKind kind);
/// Throws InvalidArgument on unknown names.
CombinerKind combiner_kind_from_string(const std::string& name);

/// An L^2 x (2L' - 1) linear combiner. The combined estimate is E^H r.
struct Combiner {
  CMatrix matrix;
  CombinerKind kind = CombinerKind::Selection;
  /// Selection only: the index picked for each column.
  std::vector<int> picked;
};

enum class SelectionPicker { Smallest, Largest };

Combiner selection_combiner(const LagIndexMap& lags, int index_count,
                            SelectionPicker picker = SelectionPicker::Smallest);
Combiner averaging_combiner(const LagIndexMap& lags, int index_count);

/// Physical steering vector s(theta), entry l = exp(-i pi p_l sin theta).
CVector steering_vector(const ArrayGeometry& g, double theta);

/// [s(theta_1), ..., s(theta_K)].
CMatrix steering_matrix(const ArrayGeometry& g, std::span<const double> thetas);

/// v(theta)^n = exp(-i pi n sin theta).
cplx phase_power(double theta, double n);

}  // namespace coprime
