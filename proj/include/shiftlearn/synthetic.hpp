#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shiftlearn/core.hpp"

namespace shiftlearn {

struct Box {
  Point lo;
  Point hi;

  [[nodiscard]] std::size_t dim() const noexcept { return lo.size(); }
  [[nodiscard]] double volume() const;
  [[nodiscard]] Box padded(double r) const;
  [[nodiscard]] Box hull(const Box& other) const;
};

// A reference distribution with a sampler, an optional pdf, its moments and
// the (c, g) class it is declared to belong to.
struct GroundTruth {
  std::string name;
  std::size_t dim = 1;
  std::map<std::string, double> params;
  std::function<void(Stream&, std::span<double>)> sample;
  DensityFn pdf;  // empty when unavailable
  Point mean;
  std::vector<double> covariance;  // row-major d x d
  ClassParams declared;
  Box support;  // holds all but ~1e-9 of the mass

  [[nodiscard]] bool has_pdf() const noexcept { return static_cast<bool>(pdf); }
  [[nodiscard]] FunctionSampler sampler() const;
};

// Registry. Names and parameters (defaults in brackets):
//   uniform-ball          d in {1,2}, radius [0.5]
//   uniform-box           lo [0], hi [1]  (same interval on every axis)
//   gaussian              sigma [1]
//   gaussian-aniso        d = 2, variances diag(4, 1)
//   laplace               d = 1, scale [1]
//   laplace-truncated     d = 1, scale [1], cut [5]
//   exponential-centered  product of Exp(1) shifted to zero mean
//   truncated-gaussian    d = 1, sigma [0.1], cut [0.5]
GroundTruth make_ground_truth(const std::string& name, std::size_t dim,
                              const std::map<std::string, double>& params = {});

std::vector<std::string> ground_truth_names();

// Default members with d in {1, 2}.
std::vector<GroundTruth> zoo();

// (1 - eps) f + eps noise.
GroundTruth contaminate(const GroundTruth& f, const GroundTruth& noise, double eps);

struct SiEstimate {
  double value = 0.0;
  double tolerance = 0.0;  // |value - value at half the resolution|
};

// (1/kappa) max over 32 shifts kappa' in [0, kappa] of int |f(x + kappa' v) - f(x)|,
// by the midpoint rule on the support box padded by kappa.
SiEstimate estimate_si(const GroundTruth& f, std::span<const double> v, double kappa,
                       std::size_t points_per_axis = 0);

enum class TvMode { grid, montecarlo };

struct TvOptions {
  TvMode mode = TvMode::grid;
  std::size_t points_per_axis = 0;  // grid; 0 picks 65536 / 1024 / 128 for d = 1 / 2 / 3
  std::size_t samples = 1'000'000;  // montecarlo
  std::uint64_t seed = 1;
  bool check_a = true;  // compare the box mass of a with 1
  bool check_b = true;
};

struct TvEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double mass_a = 0.0;
  double mass_b = 0.0;
};

// Un-halved int |a - b| over the box. Throws CoverageError when a checked
// density has more than 1e-3 of its mass outside the box.
TvEstimate estimate_tv(const DensityFn& a, const DensityFn& b, const Box& box, const TvOptions& opts = {});

// Visits every midpoint of an n^d grid on the box.
void for_each_grid_point(const Box& box, std::size_t n, const std::function<void(std::span<const double>)>& fn);

} // namespace shiftlearn
