#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "shiftlearn/learn_bounded.hpp"
#include "shiftlearn/mollifier.hpp"

using namespace shiftlearn;

namespace {

FunctionSampler uniform_half() {
  return FunctionSampler(1, [](Stream& s, std::span<double> out) { out[0] = s.uniform(-0.5, 0.5); });
}

// int |h - f| over [-1,1] for f = Uniform[-1/2,1/2] by the rectangle rule on an FFT grid.
double tv_to_uniform(const FourierHypothesis& h, std::size_t n = 1u << 16) {
  const auto vals = grid_values(h, n);
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double z = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(n);
    const double f = std::abs(z) < 0.5 ? 1.0 : (std::abs(z) == 0.5 ? 0.5 : 0.0);
    s += std::abs(std::max(0.0, vals[k]) - f);
  }
  return s * 2.0 / static_cast<double>(n);
}

} // namespace

TEST_CASE("derived parameters") {
  const auto a = derive_parameters({1, 0.2, 0.05, 0.1});
  CHECK(a.gamma == doctest::Approx(0.05));
  CHECK(a.T == 991);
  CHECK(a.eta == doctest::Approx(1.588e-3).epsilon(1e-3));
  const auto b = derive_parameters({1, 0.3, 0.075, 0.1});
  CHECK(b.T == 502);
  const double eta2 = 0.09 / 8.0 / 1005.0;
  CHECK(b.S == static_cast<std::uint64_t>(std::ceil(4.0 / eta2 * std::log(4.0 * 1005.0 / 0.1))));
  CHECK_NOTHROW(derive_parameters({1, 0.5, 0.1, 0.1}));
  CHECK_THROWS_AS(derive_parameters({1, 0.51, 0.1, 0.1}), ParameterError);
  CHECK_THROWS_AS(derive_parameters({1, 0.3, 0.3, 0.1}), ParameterError);
  CHECK_THROWS_AS(derive_parameters({1, 0.3, 0.1, 1.0}), ParameterError);
  BoundedLearnerParams big{3, 0.1, 0.01, 0.1};
  CHECK_THROWS_AS(derive_parameters(big), ResourceError);
  CHECK(derive_parameters(big, false).T > 0);
}

TEST_CASE("h_max_bound") {
  CHECK(h_max_bound(502, 1) == 502.5);
  CHECK(h_max_bound(10, 2) == 110.25);
  CHECK(h_max_bound(0, 1) == 0.5);
}

TEST_CASE("default kappa") {
  ClassParams cls{8.0, 1, TailBound::exponential(0.06)};
  const double r = 0.06 * (1.0 - std::log(0.15));
  CHECK(default_kappa(0.15, cls) == doctest::Approx(0.15 / (4.0 * r * 8.0)));
  ClassParams loose{0.1, 1, TailBound::bounded(0.5)};
  CHECK(default_kappa(0.2, loose) == doctest::Approx(0.1));
}

TEST_CASE("learns the uniform interval and is independent of the worker count") {
  const auto f = uniform_half();
  const BoundedLearnerParams p{1, 0.3, 0.075, 0.1};
  LearnReport rep;
  const auto h1 = learn_bounded(f, p, Stream(21), &rep, 1);
  const auto h3 = learn_bounded(f, p, Stream(21), nullptr, 3);
  CHECK(h1.coeffs() == h3.coeffs());
  CHECK(rep.samples == rep.params.S);
  CHECK(rep.source_draws == rep.params.S);
  CHECK(tv_to_uniform(h1) <= 0.3);
  // Clipping keeps h nonnegative.
  for (int i = 0; i < 10000; ++i) CHECK(h1.evaluate(std::vector<double>{-1.0 + 2.0 * i / 9999.0}) >= 0.0);
}

TEST_CASE("oracle outside B(1/2) is a contract breach") {
  const FunctionSampler wide(1, [](Stream& s, std::span<double> out) { out[0] = s.uniform(-1.0, 1.0); });
  CHECK_THROWS_AS(learn_bounded(wide, {1, 0.45, 0.4, 0.5}, Stream(1), nullptr, 1), InvariantViolation);
}

TEST_CASE("tail energy beyond T") {
  // sum_{T < |xi| <= 4T} |f(xi) b_gamma(xi)|^2 <= eps^2/8 at eps = 0.3, kappa = 0.075.
  const auto dp = derive_parameters({1, 0.3, 0.075, 0.1});
  double tail = 0.0;
  for (std::int64_t xi = dp.T + 1; xi <= 4 * dp.T; ++xi) {
    const double fhat = oracle::uniform_half_transform(static_cast<double>(xi));
    const double bhat = std::abs(mollifier::fourier_b_numeric(dp.gamma * static_cast<double>(xi)));
    tail += 2.0 * fhat * fhat * bhat * bhat;
  }
  CHECK(tail <= 0.09 / 8.0);
}

TEST_CASE("mollification moves the uniform interval by at most eps/2") {
  // q = f * b_gamma with gamma = kappa = eps/4; int |q - f| by quadrature.
  const double eps = 0.3, gamma = eps / 4.0;
  std::vector<double> cdf(20001);
  double acc = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    if (i > 0) acc += oracle::simpson(mollifier::eval_b, -1.0 + (i - 1) * 1e-4, -1.0 + i * 1e-4, 4);
    cdf[i] = acc;
  }
  auto fb = [&](double u) {
    if (u <= -1) return 0.0;
    if (u >= 1) return 1.0;
    return cdf[static_cast<std::size_t>(std::lround((u + 1.0) * 1e4))];
  };
  const double tv = oracle::midpoint(
      [&](double x) {
        const double q = fb((x + 0.5) / gamma) - fb((x - 0.5) / gamma);
        return std::abs(q - (std::abs(x) < 0.5 ? 1.0 : 0.0));
      },
      -1.0, 1.0, 400000);
  CHECK(tv <= eps / 2.0);
}

TEST_CASE("throughput projection tracks real runs") {
  const auto f = uniform_half();
  {
    const BoundedLearnerParams p{1, 0.3, 0.075, 0.1};
    const auto proj = project_learn_bounded(f, p, 200000, Stream(5), 1);
    CHECK(proj.method == CoefficientAccumulator::Method::gridded);
    CHECK(proj.target.T == derive_parameters(p).T);
    LearnReport rep;
    learn_bounded(f, p, Stream(6), &rep, 1);
    CHECK(proj.projected_seconds < 4.0 * rep.seconds);
    CHECK(proj.projected_seconds > rep.seconds / 4.0);
  }
  {
    // d = 2: a probe below the target cutoff, scaled up, matches a probe at it.
    const FunctionSampler disc(2, [](Stream& s, std::span<double> x) {
      do {
        x[0] = s.uniform(-0.5, 0.5);
        x[1] = s.uniform(-0.5, 0.5);
      } while (x[0] * x[0] + x[1] * x[1] > 0.25);
    });
    const BoundedLearnerParams p{2, 0.45, 0.44, 0.5};
    const auto dp = derive_parameters(p);
    auto small = p;
    small.low_cap = static_cast<std::size_t>(dp.low_size / 8.0);
    const auto scaled = project_learn_bounded(disc, small, 4000, Stream(7), 1);
    const auto full = project_learn_bounded(disc, p, 500, Stream(8), 1);
    CHECK(scaled.probe_T < dp.T);
    CHECK(full.probe_T == dp.T);
    CHECK(scaled.method == CoefficientAccumulator::Method::direct);
    CHECK(scaled.seconds_per_sample < 3.0 * full.seconds_per_sample);
    CHECK(scaled.seconds_per_sample > full.seconds_per_sample / 3.0);
  }
}
