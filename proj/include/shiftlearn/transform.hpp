#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "shiftlearn/core.hpp"
#include "shiftlearn/fourier.hpp"

namespace shiftlearn {

// Center mu and squared radius t. forward() sends the ball |x - mu| <= sqrt(t)
// onto B(1/2).
struct AffineFrame {
  Point mu;
  double t = 0.25;

  [[nodiscard]] std::size_t dim() const noexcept { return mu.size(); }
  [[nodiscard]] double scale() const noexcept;  // 2 sqrt(t)
  void forward(std::span<const double> x, std::span<double> y) const;
  void inverse(std::span<const double> y, std::span<double> x) const;
  void validate() const;
};

// ceil(100 I_g)
std::size_t transformation_sample_count(const TailBound& tail);

// mu = sample mean, t = 2 (g^{-1}(eps)^2 + 1/10). Throws ParameterError unless
// exactly transformation_sample_count(tail) samples are given.
AffineFrame compute_transformation(const SampleSet& samples, const TailBound& tail, double eps);

Point forward_map(const AffineFrame& frame, std::span<const double> x);
Point inverse_map(const AffineFrame& frame, std::span<const double> y);

// Draws from `source`, maps through the frame and keeps points in B(1/2).
// Gives up with InefficientFrame after max_rejects consecutive rejections.
class ConditionedSampler final : public Sampler {
public:
  static constexpr std::size_t kDefaultMaxRejects = 64;

  ConditionedSampler(const Sampler& source, AffineFrame frame, std::size_t max_rejects = kDefaultMaxRejects);

  [[nodiscard]] std::size_t dim() const override { return frame_.dim(); }
  std::uint64_t draw(Stream& stream, std::span<double> out) const override;

  [[nodiscard]] std::uint64_t accepted() const noexcept { return accepted_.load(); }
  [[nodiscard]] std::uint64_t attempted() const noexcept { return attempted_.load(); }
  [[nodiscard]] double acceptance_rate() const noexcept;

private:
  const Sampler& source_;
  AffineFrame frame_;
  std::size_t max_rejects_;
  mutable std::atomic<std::uint64_t> accepted_{0};
  mutable std::atomic<std::uint64_t> attempted_{0};
};

// z = W (x - mean). Rows of W are scaled eigenvectors of the covariance.
struct Whitening {
  Point mean;
  std::vector<double> matrix;   // W, row-major d x d
  std::vector<double> inverse;  // W^{-1}
  double abs_det = 1.0;         // |det W|

  [[nodiscard]] std::size_t dim() const noexcept { return mean.size(); }
  void apply(std::span<const double> x, std::span<double> z) const;
  void unapply(std::span<const double> z, std::span<double> x) const;
};

// h(x) = J (2 sqrt t)^{-d} h_scond((z - mu) / (2 sqrt t)), z = W (x - m),
// J = |det W| (1 without whitening). Zero wherever the conditioned point
// falls outside [-1,1]^d.
class PulledBackHypothesis {
public:
  PulledBackHypothesis() = default;
  PulledBackHypothesis(FourierHypothesis h, AffineFrame frame, std::optional<Whitening> whitening = std::nullopt);

  [[nodiscard]] const FourierHypothesis& conditioned() const noexcept { return h_; }
  [[nodiscard]] const AffineFrame& frame() const noexcept { return frame_; }
  [[nodiscard]] const std::optional<Whitening>& whitening() const noexcept { return whitening_; }
  [[nodiscard]] std::size_t dim() const noexcept { return frame_.dim(); }

  // Jacobian of the map x -> y.
  [[nodiscard]] double jacobian() const noexcept { return jacobian_; }
  [[nodiscard]] double density(std::span<const double> x) const;
  // Returns false when y falls outside [-1,1]^d.
  bool to_conditioned(std::span<const double> x, std::span<double> y) const;
  void from_conditioned(std::span<const double> y, std::span<double> x) const;

  [[nodiscard]] PulledBackHypothesis with_whitening(Whitening w) const;

private:
  FourierHypothesis h_;
  AffineFrame frame_;
  std::optional<Whitening> whitening_;
  double jacobian_ = 1.0;
};

PulledBackHypothesis pull_back_hypothesis(const FourierHypothesis& h_scond, const AffineFrame& frame);

} // namespace shiftlearn
