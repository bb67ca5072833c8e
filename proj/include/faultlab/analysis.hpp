#pragma once

#include "faultlab/campaign.hpp"
#include "faultlab/events.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace faultlab {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<double> column(std::size_t c) const;
  void set_column(std::size_t c, std::span<const double> values);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Benign and SDC records with complete event vectors. Columns are the events
/// measured in every such record, in catalog order.
struct FeatureMatrix {
  Matrix values;
  std::vector<EventKind> columns;
  std::vector<OutcomeClass> labels;
  std::vector<std::uint32_t> fault_ids;
};

FeatureMatrix build_feature_matrix(std::span<const CampaignRecord> records);

/// Per column: subtract the mean, divide by the population standard deviation.
/// Constant columns become zeros; their indices are appended to
/// `constant_columns` when given. Throws TooFewRows for fewer than 2 rows.
Matrix z_normalize(const Matrix& m, std::vector<std::size_t>* constant_columns = nullptr);

/// Rank-based inverse-normal transform per column: x -> Phi^-1(rank / (n + 1)),
/// with average ranks for ties. Throws TooFewRows for fewer than 2 rows.
Matrix gaussianize(const Matrix& m);

/// Standard normal quantile (Wichura's AS241, PPND16; relative accuracy about
/// 1e-16). Requires 0 < p < 1.
double inverse_normal_cdf(double p);

struct PcaResult {
  std::vector<std::vector<double>> components;  // k unit vectors of length cols
  std::vector<double> eigenvalues;              // k, descending
  std::vector<double> explained_variance_ratio;
  Matrix projections;                           // rows x k
  std::vector<double> mean;                     // column means removed before projecting
  std::size_t numerical_rank = 0;
};

/// Principal components of the column covariance (population normalization),
/// from a cyclic Jacobi eigendecomposition. Components are sorted by
/// descending eigenvalue (index order among ties) and signed so their
/// largest-magnitude coordinate is positive. Throws DegenerateCovariance when
/// k exceeds the numerical rank (eigenvalues >= 1e-12 * trace).
PcaResult pca(const Matrix& m, std::size_t k);

/// Symmetric eigendecomposition used by pca(). Eigenvectors are the columns
/// of `vectors`, in the same (unsorted) order as `values`.
struct SymmetricEigen {
  std::vector<double> values;
  Matrix vectors;
};
SymmetricEigen jacobi_eigen(const Matrix& symmetric);

struct Histogram {
  std::vector<double> edges;  // num_bins + 1
  std::vector<std::uint64_t> counts;

  /// Bin of `value` under these edges; values outside clamp to the end bins.
  std::size_t bin_of(double value) const;
};

/// Equal-width bins over [min, max], max included in the last bin. A
/// zero-width range puts everything in the first bin. Throws EmptyInput.
Histogram histogram(std::span<const double> values, std::size_t num_bins);

struct ClassCycleStats {
  std::uint64_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population
};

struct BreakdownRow {
  std::string benchmark;
  LocationClass location = LocationClass::Register;
  std::uint64_t total = 0;
  std::uint64_t benign = 0, sdc = 0, other = 0;
  double benign_pct = 0.0, sdc_pct = 0.0, other_pct = 0.0;  // one decimal, sum exactly 100.0
  ClassCycleStats benign_cycles, sdc_cycles, other_cycles;
};

struct BreakdownReport {
  std::vector<BreakdownRow> rows;  // sorted by (benchmark, location)
};

/// Outcome percentages per (benchmark, location). Rounds to one decimal with
/// the largest-remainder method so each row sums to 100.0. Throws EmptyInput.
BreakdownReport summarize(std::span<const CampaignRecord> records);

}  // namespace faultlab
