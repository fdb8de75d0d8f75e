#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gbpf/marginal.hpp"
#include "gbpf/support_set.hpp"

namespace gbpf {

// Cell index: bit k holds l_{k+1}. Labels spell l_1 l_2 ... l_n left to right.
std::string cell_label(std::size_t index, std::size_t axes);
std::size_t cell_index(std::string_view label);

// prod_k p_k^{l_k} (1 - p_k)^{1 - l_k}
double cell_probability(const std::vector<double>& probs, std::size_t index);

class Partition {
 public:
  // Validates masses against the probabilities (1e-8) and pairwise overlaps.
  static Partition from_cells(Marginal marginal, std::vector<double> probs, std::vector<SupportSet> cells);

  const Marginal& marginal() const noexcept { return marginal_; }
  std::size_t axes() const noexcept { return probs_.size(); }
  std::size_t size() const noexcept { return cells_.size(); }
  const std::vector<double>& probs() const noexcept { return probs_; }
  const std::vector<SupportSet>& cells() const noexcept { return cells_; }
  const SupportSet& cell(std::size_t index) const { return cells_.at(index); }
  // Exact masses of the cells as integrated.
  const std::vector<double>& masses() const noexcept { return masses_; }
  // First-moment integrals of x over each cell.
  const std::vector<Eigen::VectorXd>& means() const noexcept { return means_; }
  // E[X | X in cell]
  Eigen::VectorXd conditional_mean(std::size_t index) const { return means_.at(index) / masses_.at(index); }

 private:
  Partition(Marginal marginal, std::vector<double> probs, std::vector<SupportSet> cells);

  Marginal marginal_;
  std::vector<double> probs_;
  std::vector<SupportSet> cells_;
  std::vector<double> masses_;
  std::vector<Eigen::VectorXd> means_;
};

struct UserCells {
  std::vector<SupportSet> cells;  // indexed by cell index
};

// Cells mirrored about `center` for a law symmetric about it. Axes in
// `mean_axes` (1-based) are split first, each split taking the innermost
// window of the right half; later axes take the lowest window of the full cell.
struct SymmetricNested {
  double center = 0.0;
  std::vector<std::size_t> mean_axes;
};

// Axes in `mean_axes` split by balanced subsets (mass and first moment both in
// proportion p); later axes take the lowest window.
struct BalancedNested {
  std::vector<std::size_t> mean_axes;
};

using PartitionMode = std::variant<UserCells, SymmetricNested, BalancedNested>;

Partition build_partition(const Marginal& m, std::vector<double> probs, const PartitionMode& mode);

// A1 inside A with mass(A1) = p mass(A) and, when `component` is set,
// integral of x over A1 = p times that over A. Found by bisection on the start
// of a sliding window of fixed mass. Discrete laws with integer sets search
// contiguous runs and throw NotRepresentable when none fits.
SupportSet find_balanced_subset(const Marginal& m, const SupportSet& a, double p,
                                std::optional<std::size_t> component = 0);

// The sub-window of `a` covering the mass range [u0, u1], measured from the
// lowest point of `a`.
IntervalUnion mass_window(const Distribution1D& law, const IntervalUnion& a, double u0, double u1);

// Merged cell for a pattern on a subset of axes (1-based): the union of all
// cells agreeing with `pattern` on those axes.
struct MergedCellMean {
  std::vector<std::size_t> axes;
  std::vector<int> pattern;
  Eigen::VectorXd integral;  // integral of x over the merged cell
  Eigen::VectorXd target;    // mu times the product of the axis probabilities
};

std::vector<MergedCellMean> merged_cell_means(const Partition& partition, const std::vector<std::size_t>& axes);

}  // namespace gbpf
