#include "shiftlearn/transform.hpp"

#include <cmath>
#include <string>

namespace shiftlearn {

double AffineFrame::scale() const noexcept { return 2.0 * std::sqrt(t); }

void AffineFrame::validate() const {
  if (mu.empty()) throw ParameterError("frame center is empty");
  check_point(mu);
  if (!(t > 0.0) || !std::isfinite(t)) throw ParameterError("frame radius parameter must be positive");
}

void AffineFrame::forward(std::span<const double> x, std::span<double> y) const {
  const double s = scale();
  for (std::size_t j = 0; j < mu.size(); ++j) y[j] = (x[j] - mu[j]) / s;
}

void AffineFrame::inverse(std::span<const double> y, std::span<double> x) const {
  const double s = scale();
  for (std::size_t j = 0; j < mu.size(); ++j) x[j] = mu[j] + s * y[j];
}

std::size_t transformation_sample_count(const TailBound& tail) {
  return static_cast<std::size_t>(std::ceil(100.0 * tail_integral(tail)));
}

AffineFrame compute_transformation(const SampleSet& samples, const TailBound& tail, double eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw ParameterError("eps must lie in (0, 1/2)");
  const std::size_t m = transformation_sample_count(tail);
  if (samples.size() != m) {
    throw ParameterError("compute_transformation needs exactly " + std::to_string(m) + " samples, got " +
                         std::to_string(samples.size()));
  }
  AffineFrame frame;
  frame.mu.assign(samples.dim(), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const auto x = samples[i];
    for (std::size_t j = 0; j < x.size(); ++j) frame.mu[j] += x[j];
  }
  for (double& v : frame.mu) v /= static_cast<double>(m);
  const double r = tail_inverse(tail, eps);
  frame.t = 2.0 * (r * r + 0.1);
  return frame;
}

Point forward_map(const AffineFrame& frame, std::span<const double> x) {
  Point y(frame.dim());
  frame.forward(x, y);
  return y;
}

Point inverse_map(const AffineFrame& frame, std::span<const double> y) {
  Point x(frame.dim());
  frame.inverse(y, x);
  return x;
}

ConditionedSampler::ConditionedSampler(const Sampler& source, AffineFrame frame, std::size_t max_rejects)
    : source_(source), frame_(std::move(frame)), max_rejects_(max_rejects) {
  frame_.validate();
  if (source.dim() != frame_.dim()) throw ParameterError("sampler and frame dimensions differ");
  if (max_rejects_ < 1) throw ParameterError("max_rejects must be at least 1");
}

std::uint64_t ConditionedSampler::draw(Stream& stream, std::span<double> out) const {
  PointBuffer buf(frame_.dim());
  const auto x = buf.span();
  std::uint64_t used = 0;
  for (std::size_t rejects = 0;;) {
    used += source_.draw(stream, x);
    frame_.forward(x, out);
    attempted_.fetch_add(1, std::memory_order_relaxed);
    if (norm2(out) <= 0.5) {
      accepted_.fetch_add(1, std::memory_order_relaxed);
      return used;
    }
    if (++rejects >= max_rejects_) {
      throw InefficientFrame("frame rejected " + std::to_string(rejects) + " consecutive draws");
    }
  }
}

double ConditionedSampler::acceptance_rate() const noexcept {
  const auto n = attempted_.load();
  return n == 0 ? 0.0 : static_cast<double>(accepted_.load()) / static_cast<double>(n);
}

void Whitening::apply(std::span<const double> x, std::span<double> z) const {
  const std::size_t d = dim();
  for (std::size_t i = 0; i < d; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += matrix[i * d + j] * (x[j] - mean[j]);
    z[i] = s;
  }
}

void Whitening::unapply(std::span<const double> z, std::span<double> x) const {
  const std::size_t d = dim();
  for (std::size_t i = 0; i < d; ++i) {
    double s = mean[i];
    for (std::size_t j = 0; j < d; ++j) s += inverse[i * d + j] * z[j];
    x[i] = s;
  }
}

PulledBackHypothesis::PulledBackHypothesis(FourierHypothesis h, AffineFrame frame, std::optional<Whitening> whitening)
    : h_(std::move(h)), frame_(std::move(frame)), whitening_(std::move(whitening)) {
  frame_.validate();
  if (h_.dim() != frame_.dim()) throw ParameterError("hypothesis and frame dimensions differ");
  if (whitening_ && whitening_->dim() != frame_.dim()) throw ParameterError("whitening dimension differs");
  jacobian_ = std::pow(frame_.scale(), -static_cast<double>(frame_.dim()));
  if (whitening_) jacobian_ *= whitening_->abs_det;
}

bool PulledBackHypothesis::to_conditioned(std::span<const double> x, std::span<double> y) const {
  if (whitening_) {
    PointBuffer buf(dim());
    const auto z = buf.span();
    whitening_->apply(x, z);
    frame_.forward(z, y);
  } else {
    frame_.forward(x, y);
  }
  for (double v : y) {
    if (!(v >= -1.0 && v <= 1.0)) return false;
  }
  return true;
}

void PulledBackHypothesis::from_conditioned(std::span<const double> y, std::span<double> x) const {
  if (whitening_) {
    PointBuffer buf(dim());
    const auto z = buf.span();
    frame_.inverse(y, z);
    whitening_->unapply(z, x);
  } else {
    frame_.inverse(y, x);
  }
}

double PulledBackHypothesis::density(std::span<const double> x) const {
  PointBuffer buf(dim());
  const auto y = buf.span();
  if (!to_conditioned(x, y)) return 0.0;
  return jacobian_ * h_.evaluate_unchecked(y);
}

PulledBackHypothesis PulledBackHypothesis::with_whitening(Whitening w) const {
  return {h_, frame_, std::move(w)};
}

PulledBackHypothesis pull_back_hypothesis(const FourierHypothesis& h_scond, const AffineFrame& frame) {
  return {h_scond, frame};
}

} // namespace shiftlearn
