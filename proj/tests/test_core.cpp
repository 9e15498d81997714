#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "shiftlearn/core.hpp"

using namespace shiftlearn;

TEST_CASE("tail inverse closed forms") {
  CHECK(tail_inverse(TailBound::exponential(1.0), 0.1) == doctest::Approx(1.0 + std::log(10.0)).epsilon(1e-14));
  CHECK(tail_inverse(TailBound::bounded(1.0), 0.1) == 1.0);
  CHECK(tail_inverse(TailBound::gaussian(2.0), std::exp(-1.0)) == doctest::Approx(2.0));
  CHECK_THROWS_AS((void)tail_inverse(TailBound::exponential(1.0), 0.0), DomainError);
  CHECK_THROWS_AS((void)tail_inverse(TailBound::exponential(1.0), 1.0), DomainError);
}

TEST_CASE("tabulated tail inverse matches the closed form") {
  auto g = [](double t) { return std::min(1.0, std::exp(1.0 - t)); };
  const auto tab = TailBound::tabulate(g, 1e-3, 60.0, 20000);
  CHECK(std::abs(tail_inverse(tab, 0.1) - 3.302585092994046) < 1e-6);
}

TEST_CASE("tail integrals") {
  CHECK(tail_integral(TailBound::exponential(1.0)) == doctest::Approx(5.0).epsilon(1e-5));
  CHECK(tail_integral(TailBound::gaussian(1.0)) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(tail_integral(TailBound::bounded(1.0)) == doctest::Approx(1.0).epsilon(1e-5));
  auto g = [](double t) { return std::min(1.0, std::exp(1.0 - t)); };
  const auto tab = TailBound::tabulate(g, 1e-3, 80.0, 20000);
  CHECK(tail_integral(tab) == doctest::Approx(5.0).epsilon(1e-4));
}

TEST_CASE("tail integral rejects slow decay") {
  std::vector<double> t, v;
  for (int i = 0; i <= 200; ++i) {
    const double x = std::pow(10.0, -1.0 + 6.0 * i / 200.0);
    t.push_back(x);
    v.push_back(std::min(1.0, 1.0 / (x * x)));
  }
  CHECK_THROWS_AS((void)tail_integral(TailBound::table(t, v)), DomainError);
}

TEST_CASE("tail floor") {
  const auto e = TailBound::exponential(1.0);
  CHECK(satisfies_tail_floor(e));
  const auto floored = enforce_tail_floor(e);
  for (double t : {0.0, 0.05, 0.5, 2.0, 7.0}) CHECK(floored(t) == e(t));
  const auto steep = enforce_tail_floor(TailBound::exponential(0.01));
  CHECK(steep(0.05) == 1.0);
  CHECK(satisfies_tail_floor(steep));
  const auto twice = enforce_tail_floor(steep);
  for (double t : {0.0, 0.05, 0.099, 0.1, 0.2}) CHECK(twice(t) == steep(t));
}

TEST_CASE("tail inverse is antitone and attains the level") {
  Stream s(11);
  for (const auto& g : {TailBound::exponential(0.7), TailBound::gaussian(1.3), TailBound::bounded(2.0)}) {
    for (int i = 0; i < 1000; ++i) {
      const double a = s.uniform(1e-6, 1.0 - 1e-6);
      const double b = s.uniform(1e-6, 1.0 - 1e-6);
      const double lo = std::min(a, b), hi = std::max(a, b);
      CHECK(tail_inverse(g, lo) >= tail_inverse(g, hi));
      CHECK(g(tail_inverse(g, a)) <= a + 1e-12);
    }
  }
}

TEST_CASE("sample CSV round trip") {
  SampleSet s(2, {0.1, -2.5, 1e-20, 3.0});
  std::stringstream io;
  write_samples_csv(io, s);
  const auto back = read_samples_csv(io);
  CHECK(back.dim() == 2);
  CHECK(back.data() == s.data());
  std::stringstream plain("1,2\n3e-1,4\n");
  CHECK(read_samples_csv(plain).size() == 2);
  std::stringstream bad("1,2\n3\n");
  CHECK_THROWS_AS(read_samples_csv(bad), Error);
}

TEST_CASE("streams are reproducible and split independently") {
  Stream a(5), b(5);
  for (int i = 0; i < 10; ++i) CHECK(a.next() == b.next());
  CHECK(Stream(5).split(1).next() != Stream(5).split(2).next());
  Stream u(9);
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) mean += u.normal();
  CHECK(std::abs(mean / 100000) < 0.015);
}

TEST_CASE("parallel_for covers every index and rethrows the first failure") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_WITH(parallel_for(10, 3,
                                 [](std::size_t i) {
                                   if (i == 3 || i == 7) throw Error("fail " + std::to_string(i));
                                 }),
                    "fail 3");
}
