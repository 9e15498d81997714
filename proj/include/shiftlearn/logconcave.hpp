#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "shiftlearn/core.hpp"
#include "shiftlearn/pipeline.hpp"
#include "shiftlearn/transform.hpp"

namespace shiftlearn {

struct CovarianceEstimate {
  Point mean;
  std::vector<double> sigma;        // row-major d x d, 1/M normalization
  std::vector<double> eigenvalues;  // descending
  std::vector<double> eigenvectors; // row k is the k-th eigenvector
  Whitening whitening;              // W = Lambda^{-1/2} V^T

  [[nodiscard]] std::size_t dim() const noexcept { return mean.size(); }
};

// max(floor, ceil(c_r d ln^3(d + 2)))
std::size_t rescale_sample_count(std::size_t dim, double c_r = 50.0, std::size_t floor = 200);

// Empirical mean and covariance with an eigendecomposition whitener.
// Eigenvectors are ordered by descending eigenvalue, then lexicographically,
// each with a positive first nonzero component. Throws DegenerateCovariance
// when the smallest eigenvalue is below 1e-12 times the largest.
CovarianceEstimate rescale(const SampleSet& samples);

// v^T Sigma~ v / v^T Sigma v
double approximation_ratio(const CovarianceEstimate& est, std::span<const double> sigma, std::span<const double> v);

// Draws from a source and applies z = W (x - m).
class WhitenedSampler final : public Sampler {
public:
  WhitenedSampler(const Sampler& source, Whitening w) : source_(source), w_(std::move(w)) {}
  [[nodiscard]] std::size_t dim() const override { return source_.dim(); }
  std::uint64_t draw(Stream& stream, std::span<double> out) const override;

private:
  const Sampler& source_;
  Whitening w_;
};

struct LogConcaveConfig {
  double eps = 0.1;
  double delta = 0.1;
  std::size_t attempts = 0;  // 0 means ceil(log2(1/delta))
  double c_r = 50.0;
  std::size_t rescale_floor = 200;
  double c_base = 2.0;       // c_LC(d) = 16 c_base^d sqrt(d)
  double tail_scale = 2.0;   // g_LC(t) = min(1, exp(1 - t / (tail_scale sqrt d)))
  PipelineConfig pipeline;   // class, eps and delta are overwritten

  void validate() const;
  [[nodiscard]] std::size_t resolved_attempts() const;
};

// Class parameters of a near-isotropic log-concave density in dimension d.
ClassParams logconcave_class(std::size_t dim, const LogConcaveConfig& cfg = {});

struct LogConcaveAttempt {
  bool ok = false;
  std::string note;
  CovarianceEstimate covariance;
  std::size_t winner = 0;
  std::uint64_t samples = 0;
};

struct LogConcaveResult {
  CandidateHypothesis hypothesis;  // in original coordinates
  std::size_t winner = 0;          // index into attempts
  std::vector<LogConcaveAttempt> attempts;
  SelectionReport selection;
  std::uint64_t total_samples = 0;
};

// Per attempt: rescale, learn the whitened target, undo the whitening. A final
// tournament in the original coordinates picks among the attempts.
LogConcaveResult learn_logconcave(const Sampler& oracle, std::size_t dim, const LogConcaveConfig& cfg, Stream stream);

struct ShiftIntegral {
  double lhs = 0.0;    // integral of |l(t) - l(t + h)|
  double bound = 0.0;  // 3 h max l
  double error = 0.0;  // quadrature error estimate
};

// l must vanish outside [lo, hi]. Throws Error when the quadrature does not
// converge to 1e-8.
ShiftIntegral shift_integral_check(const std::function<double(double)>& l, double max_l, double h, double lo,
                                   double hi);

} // namespace shiftlearn
