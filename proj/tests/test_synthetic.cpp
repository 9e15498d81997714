#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "shiftlearn/synthetic.hpp"

using namespace shiftlearn;

namespace {

double mass_on_support(const GroundTruth& g) {
  return estimate_tv(g.pdf, [](std::span<const double>) { return 0.0; }, g.support, {.check_a = false, .check_b = false})
      .value;
}

} // namespace

TEST_CASE("zoo densities integrate to one") {
  for (const auto& g : zoo()) {
    CAPTURE(g.name);
    CAPTURE(g.dim);
    CHECK(std::abs(mass_on_support(g) - 1.0) < 1e-4);
  }
}

TEST_CASE("declared tail bounds hold empirically") {
  for (const auto& g : zoo()) {
    CAPTURE(g.name);
    CAPTURE(g.dim);
    Stream s(31);
    const std::size_t n = 100000;
    std::vector<double> radii(n), x(g.dim);
    for (auto& r : radii) {
      g.sample(s, x);
      double r2 = 0.0;
      for (std::size_t j = 0; j < g.dim; ++j) r2 += (x[j] - g.mean[j]) * (x[j] - g.mean[j]);
      r = std::sqrt(r2);
    }
    std::sort(radii.begin(), radii.end());
    const double scale = radii[n / 2] * 8.0;
    for (int k = 1; k <= 200; ++k) {
      const double t = scale * k / 200.0;
      const double emp = 1.0 - static_cast<double>(std::upper_bound(radii.begin(), radii.end(), t) - radii.begin()) / n;
      const double bound = g.declared.tail(t);
      const double slack = 3.0 * std::sqrt(std::max(bound * (1.0 - bound), 1.0 / n) / n);
      CHECK(emp <= bound + slack);
    }
  }
}

TEST_CASE("declared shift-invariance constants bound the estimates") {
  for (const auto& g : zoo()) {
    CAPTURE(g.name);
    CAPTURE(g.dim);
    std::vector<double> v(g.dim, 1.0 / std::sqrt(static_cast<double>(g.dim)));
    for (double kappa : {0.01, 0.1}) {
      const auto si = estimate_si(g, v, kappa, g.dim == 1 ? 65536 : 512);
      CAPTURE(kappa);
      CHECK(si.value <= g.declared.c + si.tolerance + 1e-3);
    }
  }
}

TEST_CASE("samplers match their pdfs") {
  Stream s(32);
  for (const auto& g : zoo()) {
    CAPTURE(g.name);
    CAPTURE(g.dim);
    // Coordinate projections; the marginal CDF comes from the pdf by quadrature.
    for (std::size_t axis = 0; axis < g.dim; ++axis) {
      std::vector<double> xs(20000), x(g.dim);
      for (auto& v : xs) {
        g.sample(s, x);
        v = x[axis];
      }
      const std::size_t m = 2048;
      const double lo = g.support.lo[axis], hi = g.support.hi[axis];
      std::vector<double> cdf(m + 1, 0.0);
      const std::size_t other = g.dim == 1 ? 1 : 512;
      for (std::size_t i = 0; i < m; ++i) {
        double slab = 0.0;
        for (int q = 0; q < 4; ++q) {
          const double a = lo + (hi - lo) * (static_cast<double>(i) + (q + 0.5) / 4.0) / m;
          if (g.dim == 1) {
            x[0] = a;
            slab += g.pdf(x);
          } else {
            const std::size_t o = 1 - axis;
            const double olo = g.support.lo[o], ohi = g.support.hi[o];
            for (std::size_t k = 0; k < other; ++k) {
              x[axis] = a;
              x[o] = olo + (ohi - olo) * (static_cast<double>(k) + 0.5) / other;
              slab += g.pdf(x) * (ohi - olo) / other;
            }
          }
        }
        cdf[i + 1] = cdf[i] + slab * (hi - lo) / m / 4.0;
      }
      auto f = [&](double v) {
        if (v <= lo) return 0.0;
        if (v >= hi) return 1.0;
        const double p = (v - lo) / (hi - lo) * m;
        const auto i = static_cast<std::size_t>(p);
        const double w = p - static_cast<double>(i);
        return cdf[i] * (1 - w) + cdf[std::min(i + 1, m)] * w;
      };
      CHECK(oracle::ks_pvalue(xs, f) > 1e-3);
    }
  }
}

TEST_CASE("contamination") {
  const auto f = make_ground_truth("uniform-box", 1, {{"lo", 0.0}, {"hi", 1.0}});
  const auto noise = make_ground_truth("uniform-box", 1, {{"lo", 5.0}, {"hi", 6.0}});
  Stream s(33);
  std::vector<double> x(1);
  const auto same = contaminate(f, noise, 0.0);
  const auto all = contaminate(f, noise, 1.0);
  for (int i = 0; i < 1000; ++i) {
    same.sample(s, x);
    CHECK(x[0] < 1.0);
    all.sample(s, x);
    CHECK(x[0] >= 5.0);
  }
  const auto mix = contaminate(f, noise, 0.1);
  int hits = 0;
  for (int i = 0; i < 100000; ++i) {
    mix.sample(s, x);
    hits += x[0] >= 5.0;
  }
  CHECK(std::abs(hits / 1e5 - 0.1) < 0.01);
  x[0] = 5.5;
  CHECK(mix.pdf(x) == doctest::Approx(0.1));
  CHECK(mix.mean[0] == doctest::Approx(0.9 * 0.5 + 0.1 * 5.5));
  CHECK_THROWS_AS(contaminate(f, make_ground_truth("gaussian", 2), 0.1), ParameterError);
}

TEST_CASE("shift-invariance estimates") {
  const auto n1 = make_ground_truth("gaussian", 1);
  const double v[] = {1.0};
  const double m[] = {-1.0};
  for (double kappa : {0.01, 0.1, 0.5, 1.0}) CHECK(estimate_si(n1, v, kappa).value <= 1.0 + 1e-6);
  const auto u = make_ground_truth("uniform-ball", 1);
  CHECK(estimate_si(u, v, 0.001).value == doctest::Approx(2.0).epsilon(0.02));
  CHECK(estimate_si(u, v, 0.05).value == doctest::Approx(estimate_si(u, m, 0.05).value).epsilon(1e-9));
  CHECK_THROWS_AS(estimate_si(u, std::vector<double>{2.0}, 0.1), DomainError);
  GroundTruth nopdf = u;
  nopdf.pdf = nullptr;
  CHECK_THROWS_AS(estimate_si(nopdf, v, 0.1), UnsupportedDensity);
}

TEST_CASE("total variation") {
  const auto a = make_ground_truth("uniform-box", 1, {{"lo", 0.0}, {"hi", 1.0}});
  const auto b = make_ground_truth("uniform-box", 1, {{"lo", 1.0}, {"hi", 2.0}});
  const auto c = make_ground_truth("uniform-box", 1, {{"lo", 0.5}, {"hi", 1.5}});
  const Box box{{-1.0}, {3.0}};
  CHECK(estimate_tv(a.pdf, a.pdf, box).value == 0.0);
  CHECK(estimate_tv(a.pdf, b.pdf, box).value == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(estimate_tv(a.pdf, c.pdf, box).value == doctest::Approx(1.0).epsilon(1e-3));
  CHECK_THROWS_AS(estimate_tv(a.pdf, b.pdf, Box{{-1.0}, {1.5}}), CoverageError);
  // Grid and Monte Carlo agree on zoo pairs.
  const auto z = zoo();
  for (std::size_t i = 0; i + 1 < z.size(); ++i) {
    if (z[i].dim != z[i + 1].dim) continue;
    const Box hull = z[i].support.hull(z[i + 1].support);
    const auto grid = estimate_tv(z[i].pdf, z[i + 1].pdf, hull, {.points_per_axis = z[i].dim == 1 ? 65536u : 512u});
    const auto mc = estimate_tv(z[i].pdf, z[i + 1].pdf, hull, {.mode = TvMode::montecarlo, .samples = 400000});
    CAPTURE(z[i].name);
    CHECK(std::abs(grid.value - mc.value) <= 3.0 * mc.std_error + 1e-3);
  }
}

TEST_CASE("registry rejects unknown names and parameters") {
  CHECK_THROWS_AS(make_ground_truth("cauchy", 1), ParameterError);
  CHECK_THROWS_AS(make_ground_truth("gaussian", 1, {{"mu", 1.0}}), ParameterError);
  CHECK_THROWS_AS(make_ground_truth("laplace", 2), ParameterError);
  CHECK(ground_truth_names().size() == 8);
}
