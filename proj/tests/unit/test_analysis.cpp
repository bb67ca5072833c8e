#include <doctest.h>

#include "faultlab/analysis.hpp"
#include "faultlab/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace faultlab;

namespace {

double column_mean(const Matrix& m, std::size_t c) {
  double s = 0;
  for (std::size_t r = 0; r < m.rows(); ++r) s += m(r, c);
  return s / double(m.rows());
}

double column_std(const Matrix& m, std::size_t c) {
  const double mu = column_mean(m, c);
  double s = 0;
  for (std::size_t r = 0; r < m.rows(); ++r) s += (m(r, c) - mu) * (m(r, c) - mu);
  return std::sqrt(s / double(m.rows()));
}

Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = n(rng) * double(c + 1) + double(r % 3);
  return m;
}

CampaignRecord record(OutcomeClass cls, std::uint64_t cycles, std::string bench = "qsort",
                      LocationClass loc = LocationClass::Register) {
  CampaignRecord r;
  r.fault.benchmark = std::move(bench);
  r.fault.target.location = loc;
  r.outcome.cls = cls;
  r.repetitions.push_back({{}, StopReason::halted(), cycles, 0});
  return r;
}

}  // namespace

TEST_CASE("z-normalization") {
  const auto z = z_normalize(Matrix::from_rows({{1, 5}, {2, 5}, {3, 5}}));
  CHECK(z(0, 0) == doctest::Approx(-1.224744871391589).epsilon(1e-12));
  CHECK(z(1, 0) == doctest::Approx(0.0));
  CHECK(z(2, 0) == doctest::Approx(1.224744871391589).epsilon(1e-12));
  for (std::size_t r = 0; r < 3; ++r) CHECK(z(r, 1) == 0.0);
  std::vector<std::size_t> constant;
  z_normalize(Matrix::from_rows({{1, 5}, {2, 5}}), &constant);
  CHECK(constant == std::vector<std::size_t>{1});
  CHECK_THROWS_AS(z_normalize(Matrix::from_rows({{1, 2}})), Error);
}

TEST_CASE("z-normalization moments and idempotence") {
  std::mt19937_64 rng(5);
  const auto m = random_matrix(rng, 50, 5);
  const auto z = z_normalize(m);
  const auto zz = z_normalize(z);
  for (std::size_t c = 0; c < 5; ++c) {
    CHECK(std::abs(column_mean(z, c)) < 1e-9);
    CHECK(std::abs(column_std(z, c) - 1.0) < 1e-9);
    for (std::size_t r = 0; r < 50; ++r) CHECK(std::abs(zz(r, c) - z(r, c)) < 1e-9);
  }
}

TEST_CASE("inverse normal cdf") {
  CHECK(inverse_normal_cdf(0.5) == 0.0);
  CHECK(inverse_normal_cdf(0.75) == doctest::Approx(0.6744897501960817).epsilon(1e-14));
  CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(inverse_normal_cdf(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-13));
  // Symmetry.
  for (double p : {0.001, 0.01, 0.2, 0.4999})
    CHECK(inverse_normal_cdf(p) == doctest::Approx(-inverse_normal_cdf(1 - p)).epsilon(1e-12));
}

TEST_CASE("gaussianization") {
  const auto g = gaussianize(Matrix::from_rows({{10, 7}, {20, 7}, {30, 7}}));
  CHECK(std::abs(g(0, 0) + 0.6744897501960817) < 1e-7);
  CHECK(std::abs(g(1, 0)) < 1e-12);
  CHECK(std::abs(g(2, 0) - 0.6744897501960817) < 1e-7);
  for (std::size_t r = 0; r < 3; ++r) CHECK(g(r, 1) == 0.0);
  // Ties take the average rank: ranks 1, 2.5, 2.5, 4 over n=4.
  const auto t = gaussianize(Matrix::from_rows({{1}, {2}, {2}, {3}}));
  CHECK(t(1, 0) == 0.0);
  CHECK(t(0, 0) == doctest::Approx(inverse_normal_cdf(0.2)));
}

TEST_CASE("gaussianization is rank invariant") {
  std::mt19937_64 rng(11);
  const auto m = random_matrix(rng, 40, 3);
  Matrix warped = m;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) warped(r, c) = std::exp(m(r, c)) * 3.0 + 1.0;
  const auto a = gaussianize(m);
  const auto b = gaussianize(warped);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) CHECK(a(r, c) == b(r, c));
}

TEST_CASE("pca on points along y = x") {
  const auto res = pca(Matrix::from_rows({{1, 1}, {2, 2}, {3, 3}, {4, 4}}), 1);
  REQUIRE(res.components.size() == 1);
  CHECK(res.components[0][0] == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(res.components[0][1] == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(res.explained_variance_ratio[0] == doctest::Approx(1.0));
  CHECK(res.numerical_rank == 1);
  CHECK_THROWS_AS(pca(Matrix::from_rows({{1, 1}, {2, 2}, {3, 3}}), 2), Error);
}

TEST_CASE("pca with k = 0") {
  const auto res = pca(Matrix::from_rows({{1, 2}, {3, 5}}), 0);
  CHECK(res.components.empty());
  CHECK(res.projections.cols() == 0);
}

TEST_CASE("pca on an isotropic cloud orders ties by index") {
  const auto res = pca(Matrix::from_rows({{1, 0}, {-1, 0}, {0, 1}, {0, -1}}), 2);
  CHECK(res.eigenvalues[0] == doctest::Approx(res.eigenvalues[1]));
  CHECK(std::abs(res.components[0][0]) == doctest::Approx(1.0));
  CHECK(std::abs(res.components[1][1]) == doctest::Approx(1.0));
}

TEST_CASE("pca agrees with a brute-force eigensolver") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = random_matrix(rng, 6, 4);
    const auto res = pca(m, 4);
    Eigen::MatrixXd x(6, 4);
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 4; ++c) x(r, c) = m(r, c);
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered / 6.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    for (int k = 0; k < 4; ++k) {
      const int j = 3 - k;  // Eigen sorts ascending
      CHECK(std::abs(res.eigenvalues[k] - solver.eigenvalues()(j)) < 1e-6);
      const double dot = [&] {
        double s = 0;
        for (int c = 0; c < 4; ++c) s += res.components[k][c] * solver.eigenvectors()(c, j);
        return s;
      }();
      CHECK(std::abs(std::abs(dot) - 1.0) < 1e-6);
      for (int c = 0; c < 4; ++c)
        CHECK(std::abs(std::abs(res.components[k][c]) - std::abs(solver.eigenvectors()(c, j))) < 1e-6);
    }
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        double s = 0;
        for (int c = 0; c < 4; ++c) s += res.components[a][c] * res.components[b][c];
        CHECK(std::abs(s - (a == b ? 1.0 : 0.0)) < 1e-9);
      }
    double total = 0;
    for (double r : res.explained_variance_ratio) total += r;
    CHECK(total <= 1.0 + 1e-9);
    // Full-rank projections reconstruct the centered data.
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 4; ++c) {
        double v = res.mean[c];
        for (int k = 0; k < 4; ++k) v += res.projections(r, k) * res.components[k][c];
        CHECK(std::abs(v - m(r, c)) < 1e-6);
      }
  }
}

TEST_CASE("pca sign convention") {
  std::mt19937_64 rng(3);
  const auto res = pca(random_matrix(rng, 20, 3), 3);
  for (const auto& comp : res.components) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < comp.size(); ++c)
      if (std::abs(comp[c]) > std::abs(comp[best])) best = c;
    CHECK(comp[best] > 0);
  }
}

TEST_CASE("histogram") {
  std::vector<double> grid(10);
  for (int i = 0; i < 10; ++i) grid[i] = i;
  const auto h = histogram(grid, 10);
  REQUIRE(h.counts.size() == 10);
  for (auto c : h.counts) CHECK(c == 1);
  CHECK(h.edges.front() == 0.0);
  CHECK(h.edges.back() == 9.0);

  const double one[] = {4.0};
  const auto single = histogram(one, 5);
  std::uint64_t total = 0, occupied = 0;
  for (auto c : single.counts) {
    total += c;
    occupied += c > 0;
  }
  CHECK(total == 1);
  CHECK(occupied == 1);
  CHECK_THROWS_AS(histogram(std::vector<double>{}, 3), Error);
}

TEST_CASE("breakdown percentages") {
  std::vector<CampaignRecord> recs;
  for (int i = 0; i < 89; ++i) recs.push_back(record(OutcomeClass::Other, 10));
  for (int i = 0; i < 11; ++i) recs.push_back(record(OutcomeClass::Benign, 100 + i));
  auto b = summarize(recs);
  REQUIRE(b.rows.size() == 1);
  CHECK(b.rows[0].other_pct == doctest::Approx(89.0));
  CHECK(b.rows[0].benign_pct == doctest::Approx(11.0));
  CHECK(b.rows[0].benign_cycles.mean == doctest::Approx(105.0));

  recs.clear();
  for (int i = 0; i < 3; ++i) recs.push_back(record(OutcomeClass::Benign, 1, "hash", LocationClass::Memory));
  recs.push_back(record(OutcomeClass::SDC, 1, "hash", LocationClass::Memory));
  recs.push_back(record(OutcomeClass::Other, 1, "hash", LocationClass::Memory));
  recs.push_back(record(OutcomeClass::Other, 1, "hash", LocationClass::Memory));
  b = summarize(recs);
  const auto& row = b.rows[0];
  CHECK(std::abs(row.benign_pct + row.sdc_pct + row.other_pct - 100.0) < 1e-9);

  recs.assign(5, record(OutcomeClass::Benign, 7));
  b = summarize(recs);
  CHECK(b.rows[0].benign_pct == 100.0);
  CHECK(b.rows[0].sdc_pct == 0.0);
  CHECK_THROWS_AS(summarize(std::vector<CampaignRecord>{}), Error);
}

TEST_CASE("feature matrix keeps complete Benign and SDC rows") {
  std::vector<CampaignRecord> recs;
  for (int i = 0; i < 4; ++i) {
    auto r = record(i == 3 ? OutcomeClass::Other : OutcomeClass::Benign, 10);
    r.fault.id = static_cast<std::uint32_t>(i);
    if (i < 3) {
      EventCounts c{};
      c.fill(static_cast<std::uint64_t>(i));
      r.events = EventVector::complete(c);
      r.events_complete = true;
    }
    recs.push_back(r);
  }
  const auto fm = build_feature_matrix(recs);
  CHECK(fm.values.rows() == 3);
  CHECK(fm.values.cols() == kEventCount);
  CHECK(fm.fault_ids == std::vector<std::uint32_t>{0, 1, 2});
  CHECK(fm.columns.front() == EventKind::Cycles);
}
