#include "faultlab/analysis.hpp"

#include "faultlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace faultlab {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  Matrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw Error(ErrorCode::EmptyInput, "ragged rows");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void Matrix::set_column(std::size_t c, std::span<const double> values) {
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
}

FeatureMatrix build_feature_matrix(std::span<const CampaignRecord> records) {
  FeatureMatrix fm;
  std::vector<const CampaignRecord*> kept;
  std::bitset<kEventCount> common;
  common.set();
  for (const auto& rec : records) {
    if (rec.outcome.cls == OutcomeClass::Other || !rec.events_complete) continue;
    kept.push_back(&rec);
    common &= rec.events.present;
  }
  if (kept.empty()) common.reset();
  for (auto kind : kEventCatalog)
    if (common.test(event_index(kind))) fm.columns.push_back(kind);

  fm.values = Matrix(kept.size(), fm.columns.size());
  for (std::size_t r = 0; r < kept.size(); ++r) {
    for (std::size_t c = 0; c < fm.columns.size(); ++c)
      fm.values(r, c) = static_cast<double>(kept[r]->events[fm.columns[c]]);
    fm.labels.push_back(kept[r]->outcome.cls);
    fm.fault_ids.push_back(kept[r]->fault.id);
  }
  return fm;
}

Matrix z_normalize(const Matrix& m, std::vector<std::size_t>* constant_columns) {
  if (m.rows() < 2) throw Error(ErrorCode::TooFewRows, "z-normalization needs at least 2 rows");
  Matrix out(m.rows(), m.cols());
  const auto n = static_cast<double>(m.rows());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    auto col = m.column(c);
    const double mean = std::accumulate(col.begin(), col.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / n);
    // Exactly-constant input is the only zero-spread case; anything else is
    // scaled, however small.
    const bool constant = std::all_of(col.begin(), col.end(), [&](double v) { return v == col.front(); });
    if (constant || sd == 0.0) {
      if (constant_columns) constant_columns->push_back(c);
      for (auto& v : col) v = 0.0;
    } else {
      for (auto& v : col) v = (v - mean) / sd;
    }
    out.set_column(c, col);
  }
  return out;
}

double inverse_normal_cdf(double p) {
  // Wichura, Algorithm AS 241 (PPND16), Applied Statistics 37(3), 1988.
  static constexpr double a[8] = {3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
                                  1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
                                  3.3430575583588128105e4, 2.5090809287301226727e3};
  static constexpr double b[8] = {1.0,
                                  4.2313330701600911252e1, 6.8718700749205790830e2, 5.3941960214247511077e3,
                                  2.1213794301586595867e4, 3.9307895800092710610e4, 2.8729085735721942674e4,
                                  5.2264952788528545610e3};
  static constexpr double c[8] = {1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
                                  3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
                                  2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double d[8] = {1.0,
                                  2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
                                  1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                  1.05075007164441684324e-9};
  static constexpr double e[8] = {6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
                                  2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                  2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[8] = {1.0,
                                  5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
                                  7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                  2.04426310338993978564e-15};
  auto poly = [](const double* k, double x) {
    double r = k[7];
    for (int i = 6; i >= 0; --i) r = r * x + k[i];
    return r;
  };

  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * poly(a, r) / poly(b, r);
  }
  double r = q < 0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = poly(c, r) / poly(d, r);
  } else {
    r -= 5.0;
    x = poly(e, r) / poly(f, r);
  }
  return q < 0 ? -x : x;
}

Matrix gaussianize(const Matrix& m) {
  if (m.rows() < 2) throw Error(ErrorCode::TooFewRows, "gaussianization needs at least 2 rows");
  const std::size_t n = m.rows();
  Matrix out(n, m.cols());
  std::vector<std::size_t> order(n);
  std::vector<double> ranks(n);
  for (std::size_t c = 0; c < m.cols(); ++c) {
    const auto col = m.column(c);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return col[x] < col[y]; });
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j + 1 < n && col[order[j + 1]] == col[order[i]]) ++j;
      const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;  // 1-based
      for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
      i = j + 1;
    }
    for (std::size_t r = 0; r < n; ++r) out(r, c) = inverse_normal_cdf(ranks[r] / static_cast<double>(n + 1));
  }
  return out;
}

SymmetricEigen jacobi_eigen(const Matrix& symmetric) {
  const std::size_t n = symmetric.rows();
  Matrix a = symmetric;
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) scale += a(i, j) * a(i, j);
  scale = std::sqrt(scale);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (std::sqrt(off) <= 1e-15 * scale || off == 0.0) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = cs * akp - sn * akq;
          a(k, q) = sn * akp + cs * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = cs * apk - sn * aqk;
          a(q, k) = sn * apk + cs * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = cs * vkp - sn * vkq;
          v(k, q) = sn * vkp + cs * vkq;
        }
      }
    }
  }
  SymmetricEigen out;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = a(i, i);
  out.vectors = std::move(v);
  return out;
}

PcaResult pca(const Matrix& m, std::size_t k) {
  const std::size_t n = m.rows(), p = m.cols();
  PcaResult res;
  res.mean.assign(p, 0.0);
  if (k == 0) {
    res.projections = Matrix(n, 0);
    return res;
  }
  if (n == 0 || k > p) throw Error(ErrorCode::DegenerateCovariance, "k exceeds the number of features");

  for (std::size_t c = 0; c < p; ++c) {
    for (std::size_t r = 0; r < n; ++r) res.mean[c] += m(r, c);
    res.mean[c] /= static_cast<double>(n);
  }
  Matrix cov(p, p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < n; ++r) s += (m(r, i) - res.mean[i]) * (m(r, j) - res.mean[j]);
      cov(i, j) = cov(j, i) = s / static_cast<double>(n);
    }

  auto eig = jacobi_eigen(cov);
  double trace = 0.0;
  for (std::size_t i = 0; i < p; ++i) trace += cov(i, i);

  // Descending eigenvalue; near-equal values keep index order. Insertion sort
  // because the tolerance comparison is not a strict weak ordering.
  const double tie_tol = 1e-12 * std::max(trace, 0.0);
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 1; i < p; ++i) {
    for (std::size_t j = i; j > 0; --j) {
      const double lo = eig.values[order[j - 1]], hi = eig.values[order[j]];
      if (hi > lo + tie_tol) std::swap(order[j - 1], order[j]);
      else break;
    }
  }

  for (double lambda : eig.values)
    if (trace > 0.0 && lambda >= 1e-12 * trace) ++res.numerical_rank;
  if (k > res.numerical_rank)
    throw Error(ErrorCode::DegenerateCovariance, "requested " + std::to_string(k) + " components but numerical rank is " +
                                                     std::to_string(res.numerical_rank));

  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t idx = order[i];
    std::vector<double> vec(p);
    for (std::size_t r = 0; r < p; ++r) vec[r] = eig.vectors(r, idx);
    double norm = 0.0;
    for (double x : vec) norm += x * x;
    norm = std::sqrt(norm);
    std::size_t big = 0;
    for (std::size_t r = 0; r < p; ++r) {
      vec[r] /= norm;
      if (std::fabs(vec[r]) > std::fabs(vec[big]) + 1e-12) big = r;
    }
    if (vec[big] < 0)
      for (auto& x : vec) x = -x;
    res.components.push_back(std::move(vec));
    res.eigenvalues.push_back(std::max(eig.values[idx], 0.0));
    res.explained_variance_ratio.push_back(res.eigenvalues.back() / trace);
  }

  res.projections = Matrix(n, k);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t i = 0; i < k; ++i) {
      double s = 0.0;
      for (std::size_t c = 0; c < p; ++c) s += (m(r, c) - res.mean[c]) * res.components[i][c];
      res.projections(r, i) = s;
    }
  return res;
}

std::size_t Histogram::bin_of(double value) const {
  const std::size_t bins = counts.size();
  const double lo = edges.front(), hi = edges.back();
  if (!(hi > lo) || value <= lo) return 0;
  if (value >= hi) return bins - 1;
  auto idx = static_cast<std::size_t>((value - lo) / (hi - lo) * static_cast<double>(bins));
  return std::min(idx, bins - 1);
}

Histogram histogram(std::span<const double> values, std::size_t num_bins) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "histogram of no values");
  if (num_bins < 1) throw Error(ErrorCode::EmptyInput, "histogram needs at least one bin");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  Histogram h;
  h.edges.resize(num_bins + 1);
  const double width = (*mx - *mn) / static_cast<double>(num_bins);
  for (std::size_t i = 0; i <= num_bins; ++i) h.edges[i] = *mn + width * static_cast<double>(i);
  h.edges.back() = *mx;
  h.counts.assign(num_bins, 0);
  for (double v : values) ++h.counts[h.bin_of(v)];
  return h;
}

namespace {

ClassCycleStats cycle_stats(const std::vector<double>& cycles) {
  ClassCycleStats s;
  s.count = cycles.size();
  if (cycles.empty()) return s;
  s.mean = std::accumulate(cycles.begin(), cycles.end(), 0.0) / static_cast<double>(cycles.size());
  double ss = 0.0;
  for (double c : cycles) ss += (c - s.mean) * (c - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(cycles.size()));
  return s;
}

// Percentages in tenths of a percent summing to exactly 1000.
std::array<double, 3> largest_remainder(const std::array<std::uint64_t, 3>& counts, std::uint64_t total) {
  std::array<std::uint64_t, 3> tenths{};
  std::array<std::pair<std::uint64_t, std::size_t>, 3> rem{};
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const std::uint64_t scaled = counts[i] * 1000;
    tenths[i] = scaled / total;
    rem[i] = {scaled % total, i};
    assigned += tenths[i];
  }
  std::stable_sort(rem.begin(), rem.end(), [](auto& a, auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < 1000; ++i, ++assigned) ++tenths[rem[i].second];
  return {tenths[0] / 10.0, tenths[1] / 10.0, tenths[2] / 10.0};
}

}  // namespace

BreakdownReport summarize(std::span<const CampaignRecord> records) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no records to summarize");
  struct Acc {
    std::array<std::uint64_t, 3> counts{};
    std::array<std::vector<double>, 3> cycles;
  };
  std::map<std::pair<std::string, LocationClass>, Acc> groups;
  for (const auto& rec : records) {
    auto& acc = groups[{rec.fault.benchmark, rec.fault.target.location}];
    const auto cls = static_cast<std::size_t>(rec.outcome.cls);
    ++acc.counts[cls];
    if (!rec.repetitions.empty()) acc.cycles[cls].push_back(static_cast<double>(rec.repetitions.front().cycles));
  }
  BreakdownReport report;
  for (const auto& [key, acc] : groups) {
    BreakdownRow row;
    row.benchmark = key.first;
    row.location = key.second;
    row.benign = acc.counts[0];
    row.sdc = acc.counts[1];
    row.other = acc.counts[2];
    row.total = row.benign + row.sdc + row.other;
    const auto pct = largest_remainder(acc.counts, row.total);
    row.benign_pct = pct[0];
    row.sdc_pct = pct[1];
    row.other_pct = pct[2];
    row.benign_cycles = cycle_stats(acc.cycles[0]);
    row.sdc_cycles = cycle_stats(acc.cycles[1]);
    row.other_cycles = cycle_stats(acc.cycles[2]);
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace faultlab
