#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <vector>

#include "shiftlearn/errors.hpp"
#include "shiftlearn/io.hpp"
#include "shiftlearn/logconcave.hpp"

using namespace shiftlearn;
using cplx = std::complex<double>;

namespace {

FourierHypothesis random_hypothesis(std::size_t d, std::int64_t T, std::uint64_t seed) {
  Stream s(seed);
  const auto fs = build_low(d, T);
  std::vector<cplx> c(fs.size());
  for (std::size_t i = fs.center() + 1; i < fs.size(); ++i) {
    c[i] = {s.normal() * 0.1, s.normal() * 0.1};
    c[fs.conjugate(i)] = std::conj(c[i]);
  }
  c[fs.center()] = 1.0;
  return FourierHypothesis(fs, c, true);
}

} // namespace

TEST_CASE("17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
  Stream s(1);
  for (int k = 0; k < 1000; ++k) {
    const double x = s.normal() * std::pow(10.0, s.uniform(-30.0, 30.0));
    CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
  }
  CHECK_THROWS_AS(format_double(std::nan("")), DomainError);
}

TEST_CASE("hypothesis roundtrip") {
  for (std::size_t d : {1, 2}) {
    HypothesisRecord rec = record_of(random_hypothesis(d, d == 1 ? 20 : 5, 1 + d));
    rec.frame = AffineFrame{Point(d, 0.3), 1.7};
    rec.mass = 0.97;
    rec.h_max = 1.25;
    const std::string text = hypothesis_json(rec);
    std::istringstream in(text);
    const auto back = read_hypothesis_json(in);
    REQUIRE(back.h.coeffs().size() == rec.h.coeffs().size());
    for (std::size_t i = 0; i < rec.h.coeffs().size(); ++i) CHECK(back.h.coeffs()[i] == rec.h.coeffs()[i]);
    CHECK(back.h.clip());
    CHECK(back.frame->t == 1.7);
    CHECK(*back.mass == 0.97);
    CHECK(*back.h_max == 1.25);
    // Byte-identical re-serialization.
    CHECK(hypothesis_json(back) == text);
    Stream s(9);
    for (int k = 0; k < 50; ++k) {
      std::vector<double> x(d);
      for (auto& v : x) v = s.uniform(-3.0, 3.0);
      CHECK(back.density(x) == rec.density(x));
      CHECK(back.density(x, false) == doctest::Approx(0.97 * rec.density(x)));
    }
  }
}

TEST_CASE("record without a frame") {
  const auto rec = record_of(random_hypothesis(1, 4, 3));
  CHECK(rec.density(std::vector<double>{1.5}) == 0.0);
  CHECK(rec.density(std::vector<double>{0.2}) == rec.h.evaluate(std::vector<double>{0.2}));
  const auto text = hypothesis_json(rec);
  CHECK(text.find("frame") == std::string::npos);
  CHECK(text.rfind("{\"version\":1,\"d\":1,\"T\":4,\"clip\":true,\"coeffs\":[", 0) == 0);
}

TEST_CASE("whitening roundtrip") {
  Stream s(4);
  std::vector<double> data;
  for (int k = 0; k < 500; ++k) {
    const double a = s.normal();
    data.push_back(2.0 * a + 1.0);
    data.push_back(0.5 * a + s.normal());
  }
  const auto est = rescale(SampleSet(2, data));
  HypothesisRecord rec = record_of(random_hypothesis(2, 3, 5));
  rec.frame = AffineFrame{{0.1, -0.2}, 2.0};
  rec.whitening = est.whitening;
  std::istringstream in(hypothesis_json(rec));
  const auto back = read_hypothesis_json(in);
  REQUIRE(back.whitening.has_value());
  CHECK(back.whitening->abs_det == doctest::Approx(est.whitening.abs_det).epsilon(1e-12));
  for (int k = 0; k < 50; ++k) {
    const std::vector<double> x{s.uniform(-4.0, 6.0), s.uniform(-3.0, 3.0)};
    CHECK(back.density(x) == doctest::Approx(rec.density(x)).epsilon(1e-12));
  }
}

TEST_CASE("malformed hypothesis files") {
  const auto bad = [](const std::string& text) {
    std::istringstream in(text);
    return read_hypothesis_json(in);
  };
  CHECK_THROWS_AS(bad("not json"), ParameterError);
  CHECK_THROWS_AS(bad("{\"version\":2,\"d\":1,\"T\":0,\"clip\":true,\"coeffs\":[{\"xi\":[0],\"re\":1,\"im\":0}]}"),
                  ParameterError);
  CHECK_THROWS_AS(bad("{\"version\":1,\"d\":1,\"T\":1,\"clip\":true,\"coeffs\":[{\"xi\":[0],\"re\":1,\"im\":0}]}"),
                  ParameterError);
  CHECK_THROWS_AS(bad("{\"version\":1,\"d\":1,\"T\":1,\"clip\":true,\"coeffs\":["
                      "{\"xi\":[1],\"re\":0,\"im\":0},{\"xi\":[0],\"re\":1,\"im\":0},{\"xi\":[-1],\"re\":0,\"im\":0}]}"),
                  ParameterError);
  CHECK_THROWS_AS(bad("{\"version\":1,\"d\":1,\"T\":0,\"clip\":true}"), ParameterError);
  CHECK_NOTHROW(bad("{\"version\":1,\"d\":1,\"T\":0,\"clip\":true,\"coeffs\":[{\"xi\":[0],\"re\":1,\"im\":0}]}"));
}
