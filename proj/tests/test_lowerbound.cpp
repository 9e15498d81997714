#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "shiftlearn/errors.hpp"
#include "shiftlearn/lowerbound.hpp"

using namespace shiftlearn;

namespace {

// Midpoint rule for int |f(x + k v) - f(x)| over the padded support.
double shift_l1(const CheckerboardDensity& f, std::span<const double> v, double kappa, std::size_t per_unit) {
  const std::size_t d = f.dim();
  const double T = static_cast<double>(f.T()) + 1.0;
  const Box box{Point(d, -T), Point(d, T)};
  const std::size_t n = static_cast<std::size_t>(2.0 * T) * per_unit;
  std::vector<double> y(d);
  double sum = 0.0;
  for_each_grid_point(box, n, [&](std::span<const double> x) {
    for (std::size_t i = 0; i < d; ++i) y[i] = x[i] + kappa * v[i];
    sum += std::abs(f.eval(y) - f.eval(x));
  });
  return sum * std::pow(2.0 * T / static_cast<double>(n), static_cast<double>(d));
}

double l1_cells(const CheckerboardDensity& u, const CheckerboardDensity& v) {
  double s = 0.0;
  for (std::size_t a = 0; a < u.cells(); ++a) s += std::abs(u.cell_value(a) - v.cell_value(a));
  return s;
}

double kl_oracle(const CheckerboardDensity& u, const CheckerboardDensity& v) {
  double s = 0.0;
  for (std::size_t a = 0; a < u.cells(); ++a) s += u.cell_value(a) * std::log(u.cell_value(a) / v.cell_value(a));
  return s;
}

} // namespace

TEST_CASE("checkerboard normalizer and evaluation") {
  const CheckerboardDensity f(1, 2, {1, 1, 0, 0});
  CHECK(f.normalizer() == 10);
  CHECK(f.eval(std::vector<double>{-1.5}) == doctest::Approx(0.3));
  CHECK(f.eval(std::vector<double>{1.5}) == doctest::Approx(0.2));
  CHECK(f.eval(std::vector<double>{5.0}) == 0.0);
  CHECK(f.eval(std::vector<double>{2.0}) == 0.0);
  CHECK(f.eval(std::vector<double>{-2.0}) == doctest::Approx(0.3));
  CHECK(checkerboard_T(0.5) == 2);
  CHECK(checkerboard_T(0.1) == 10);
  CHECK(checkerboard_T(0.3) == 4);
  CHECK_THROWS_AS(CheckerboardDensity(1, 2, {1, 0, 1}), ParameterError);
  CHECK_THROWS_AS(CheckerboardDensity(1, 2, {1, 0, 2, 0}), ParameterError);

  const CheckerboardDensity g(2, 2, std::vector<std::uint8_t>(16, 1));
  CHECK(g.normalizer() == 16 * 3);
  CHECK(g.cell_of(std::vector<double>{-2.0, -2.0}) == 0);
  CHECK(g.cell_of(std::vector<double>{-2.0, -1.0}) == 1);
  CHECK(g.cell_of(std::vector<double>{-1.0, -2.0}) == 4);
}

TEST_CASE("family construction") {
  const auto small = build_family(0.5, 1, 3, Stream(1));
  REQUIRE(small.size() == 3);
  for (const auto& f : small) {
    CHECK(f.T() == 2);
    CHECK(f.weight() == 2);
    CHECK(f.normalizer() == 10);
  }
  const auto fam = build_family(0.1, 1, 16, Stream(2));
  REQUIRE(fam.size() == 16);
  CHECK(fam[0].normalizer() == 210);
  CHECK_FALSE(family_size_within_bound(20, 16));
  CHECK(family_size_within_bound(20, 5));
  for (std::size_t i = 0; i < fam.size(); ++i) {
    for (std::size_t j = i + 1; j < fam.size(); ++j) CHECK(4 * hamming(fam[i], fam[j]) >= 20);
  }
  // Deterministic in the seed.
  const auto again = build_family(0.1, 1, 16, Stream(2));
  for (std::size_t i = 0; i < fam.size(); ++i) CHECK(fam[i].code() == again[i].code());
  // Only six balanced words of length 4 exist.
  CHECK_THROWS_AS(build_family(0.5, 1, 7, Stream(3)), ResourceError);
}

TEST_CASE("exact distances") {
  const CheckerboardDensity u(1, 2, {1, 1, 0, 0});
  const CheckerboardDensity v(1, 2, {0, 0, 1, 1});
  const CheckerboardDensity w(1, 2, {1, 0, 1, 0});
  CHECK(exact_tv(u, v).num == 4);
  CHECK(exact_tv(u, v).den == 10);
  CHECK(exact_tv(u, v).value() == doctest::Approx(0.4));
  CHECK(exact_tv(u, u).num == 0);
  CHECK(exact_kl(u, u) == 0.0);
  CHECK(exact_kl(u, v) == doctest::Approx(0.6 * std::log(1.5) + 0.4 * std::log(2.0 / 3.0)).epsilon(1e-14));
  CHECK(exact_kl(u, v) == doctest::Approx(0.08109).epsilon(1e-4));
  CHECK(exact_kl(u, w) == doctest::Approx(kl_oracle(u, w)).epsilon(1e-13));
  CHECK_THROWS_AS(exact_tv(u, CheckerboardDensity(1, 2, {1, 1, 1, 0})), ParameterError);

  const auto fam = build_family(0.1, 1, 16, Stream(4));
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < fam.size(); ++i) {
    for (std::size_t j = i + 1; j < fam.size(); ++j) {
      ++pairs;
      const auto tv = exact_tv(fam[i], fam[j]);
      CHECK(4 * tv.num >= 20);  // tv >= 5/210
      CHECK(tv.den == 210);
      CHECK(tv.value() == doctest::Approx(l1_cells(fam[i], fam[j])).epsilon(1e-14));
      const double kl = exact_kl(fam[i], fam[j]);
      CHECK(kl >= 0.0);
      CHECK(kl <= 1.0);
      CHECK(kl == doctest::Approx(kl_oracle(fam[i], fam[j])).epsilon(1e-12));
    }
  }
  CHECK(pairs == 120);
}

TEST_CASE("sampler matches cell probabilities") {
  const auto fam = build_family(0.25, 2, 2, Stream(5));
  const auto& f = fam[1];
  std::vector<double> counts(f.cells() + 1, 0.0);
  Stream s(6);
  std::vector<double> x(2);
  const int n = 400000;
  for (int k = 0; k < n; ++k) {
    f.sample(s, x);
    counts[f.cell_of(x)] += 1.0;
  }
  CHECK(counts[f.cells()] == 0.0);
  double chi2 = 0.0;
  for (std::size_t a = 0; a < f.cells(); ++a) {
    const double e = n * f.cell_value(a);
    chi2 += (counts[a] - e) * (counts[a] - e) / e;
  }
  // 63 degrees of freedom; the 0.999 quantile is about 103.
  CHECK(chi2 < 103.0);
  const auto g = f.ground_truth();
  double mass = 0.0;
  for (std::size_t a = 0; a < f.cells(); ++a) mass += f.cell_value(a);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(g.mean[0]) < 0.2);
  CHECK(g.covariance[0] == doctest::Approx(16.0 / 3.0).epsilon(0.05));
}

TEST_CASE("coordinate and direction shift bounds") {
  for (std::size_t d : {1, 2}) {
    const double eps = d == 1 ? 0.1 : 0.25;
    const auto fam = build_family(eps, d, 2, Stream(7 + d));
    const std::size_t per_unit = d == 1 ? 4000 : 100;
    for (double kappa : {0.05, 0.1, 0.5}) {
      for (std::size_t i = 0; i < d; ++i) {
        std::vector<double> e(d, 0.0);
        e[i] = 1.0;
        CHECK(shift_l1(fam[0], e, kappa, per_unit) <= 10.0 * kappa * eps);
      }
      Stream dirs(100 + d);
      for (int k = 0; k < 10; ++k) {
        std::vector<double> v(d);
        for (auto& c : v) c = dirs.normal();
        const double n = norm2(v);
        for (auto& c : v) c /= n;
        CHECK(shift_l1(fam[1], v, kappa, per_unit) <= 10.0 * std::sqrt(static_cast<double>(d)) * kappa * eps);
      }
    }
  }
}

TEST_CASE("family members are shift-invariant") {
  const auto fam = build_family(0.1, 1, 4, Stream(9));
  for (const auto& f : fam) {
    const auto g = f.ground_truth();
    for (double kappa : {0.01, 0.05, 0.1, 0.5}) {
      const auto si = estimate_si(g, std::vector<double>{1.0}, kappa);
      CHECK(si.value <= 4.0 + si.tolerance);
    }
  }
  const auto fam2 = build_family(0.5, 2, 2, Stream(10));
  const auto g2 = fam2[0].ground_truth();
  const auto si = estimate_si(g2, std::vector<double>{std::sqrt(0.5), std::sqrt(0.5)}, 0.1, 512);
  CHECK(si.value <= 4.0 * std::sqrt(2.0) + si.tolerance);
}

TEST_CASE("family and pair files") {
  const auto fam = build_family(0.1, 1, 16, Stream(11));
  std::stringstream js;
  write_family_json(js, fam);
  const auto back = read_family_json(js);
  REQUIRE(back.size() == fam.size());
  for (std::size_t i = 0; i < fam.size(); ++i) CHECK(back[i].code() == fam[i].code());
  std::stringstream bad("{\"d\": 1, \"T\": 2, \"codewords\": [\"0102\"]}");
  CHECK_THROWS_AS(read_family_json(bad), ParameterError);

  std::stringstream csv;
  write_pairs_csv(csv, fam);
  std::string line;
  std::getline(csv, line);
  CHECK(line == "i,j,tv,kl");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 120);
}

TEST_CASE("Fano experiment") {
  const auto fam = build_family(0.1, 1, 16, Stream(12));
  const std::vector<std::size_t> ms{1, 10, 100, 1000, 10000, 40000};
  const auto hist = fano_experiment(fam, histogram_learner, ms, 40, Stream(13));
  const auto mle = fano_experiment(fam, mle_learner, ms, 40, Stream(14));
  REQUIRE(hist.size() == ms.size());
  double min_tv = 1.0;
  for (std::size_t i = 0; i < fam.size(); ++i) {
    for (std::size_t j = i + 1; j < fam.size(); ++j) min_tv = std::min(min_tv, exact_tv(fam[i], fam[j]).value());
  }
  for (const auto* rows : {&hist, &mle}) {
    for (std::size_t r = 1; r < rows->size(); ++r) {
      const auto& a = (*rows)[r - 1];
      const auto& b = (*rows)[r];
      CHECK(b.mean_error <= a.mean_error + 2.0 * std::hypot(a.std_error, b.std_error));
    }
  }
  // m = 100 |A|^2 is large enough for the MLE to be exact.
  CHECK(mle.back().mean_error < min_tv / 2.0);
  CHECK(hist.front().mean_error > 1.0);
  // Histogram integral is exact on cell-aligned grids.
  std::stringstream out;
  write_fano_csv(out, hist);
  CHECK(out.str().rfind("m,mean_error,std_error,trials\n", 0) == 0);
}
