#pragma once

#include <cstddef>
#include <cstdint>

#include "shiftlearn/core.hpp"
#include "shiftlearn/fourier.hpp"

namespace shiftlearn {

struct BoundedLearnerParams {
  std::size_t dim = 1;
  double eps = 0.3;
  double kappa = 0.075;
  double delta = 0.1;
  double c_T = 1.0;
  double c_S = 1.0;
  std::size_t low_cap = kDefaultLowCap;

  void validate() const;
};

struct DerivedParameters {
  double gamma = 0.0;
  std::int64_t T = 0;
  double eta = 0.0;
  std::uint64_t S = 0;
  double low_size = 0.0;  // (2T+1)^d
};

// gamma = kappa / sqrt(d)
// T     = ceil(c_T ((4 d^2 / gamma) ln^2(d / gamma) + (1 / gamma) ln^2(8 / eps)))
// eta   = sqrt((2T+1)^{-d} eps^2 / 8)
// S     = ceil(c_S (4 / eta^2) ln(4 (2T+1)^d / delta))
// Throws ResourceError when check_cap is set and (2T+1)^d exceeds low_cap.
DerivedParameters derive_parameters(const BoundedLearnerParams& p, bool check_cap = true);

// (2T+1)^d / 2^d
double h_max_bound(std::int64_t T, std::size_t d);

// kappa = min(eps/2, eps / (4 g^{-1}(eps) c))
double default_kappa(double eps, const ClassParams& cls);

struct LearnReport {
  DerivedParameters params;
  std::uint64_t samples = 0;       // mollified points fed to the estimator
  std::uint64_t source_draws = 0;  // draws taken from the underlying oracle
  CoefficientAccumulator::Method method = CoefficientAccumulator::Method::direct;
  double seconds = 0.0;
};

// Samples are processed in kLearnChunks fixed chunks, chunk k drawing from
// stream.split(k); partial sums are merged in chunk order, so the output does
// not depend on the worker count.
inline constexpr std::size_t kLearnChunks = 64;

FourierHypothesis learn_bounded(const Sampler& oracle, const BoundedLearnerParams& p, Stream stream,
                                LearnReport* report = nullptr, std::size_t workers = default_workers(),
                                CoefficientAccumulator::Method method = CoefficientAccumulator::Method::automatic);

// Cost of a learn_bounded run projected from a timed probe. The probe runs
// the same inner loop at T' = T when the lattice fits the cap, otherwise at
// the largest T' whose lattice does; per-sample cost is scaled by the
// half-lattice ratio for the direct method and kept for the gridded one.
struct ThroughputProjection {
  DerivedParameters target;  // not capped
  CoefficientAccumulator::Method method = CoefficientAccumulator::Method::direct;
  std::int64_t probe_T = 0;
  std::uint64_t probe_samples = 0;
  double probe_seconds = 0.0;
  double seconds_per_sample = 0.0;  // at the target T, one worker
  double projected_seconds = 0.0;   // S samples spread over the workers
  double memory_bytes = 0.0;        // partial sums held at once
};

ThroughputProjection project_learn_bounded(const Sampler& oracle, const BoundedLearnerParams& p,
                                           std::uint64_t probe_samples, Stream stream,
                                           std::size_t workers = default_workers());

} // namespace shiftlearn
