#include "shiftlearn/learn_bounded.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "shiftlearn/mollifier.hpp"

namespace shiftlearn {

void BoundedLearnerParams::validate() const {
  if (dim < 1) throw ParameterError("dimension must be at least 1");
  // eps = 1/2 is admitted: the d = 2 contract is stated at that accuracy.
  if (!(eps > 0.0 && eps <= 0.5)) throw ParameterError("eps must lie in (0, 1/2]");
  if (!(kappa > 0.0 && kappa < eps)) throw ParameterError("kappa must lie in (0, eps)");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  if (!(c_T >= 1.0) || !(c_S >= 1.0)) throw ParameterError("constant multipliers must be at least 1");
}

DerivedParameters derive_parameters(const BoundedLearnerParams& p, bool check_cap) {
  p.validate();
  const double d = static_cast<double>(p.dim);
  DerivedParameters out;
  out.gamma = p.kappa / std::sqrt(d);
  const double l1 = std::log(d / out.gamma);
  const double l2 = std::log(8.0 / p.eps);
  const double t = p.c_T * ((4.0 * d * d / out.gamma) * l1 * l1 + (1.0 / out.gamma) * l2 * l2);
  out.T = static_cast<std::int64_t>(std::ceil(t));
  out.low_size = lattice_size(p.dim, static_cast<double>(out.T));
  if (check_cap && out.low_size > static_cast<double>(p.low_cap)) {
    throw ResourceError("lattice (2T+1)^d = " + std::to_string(out.low_size) + " with T = " + std::to_string(out.T) +
                        " exceeds the cap of " + std::to_string(p.low_cap));
  }
  out.eta = std::sqrt(p.eps * p.eps / 8.0 / out.low_size);
  const double s = std::ceil(p.c_S * (4.0 / (out.eta * out.eta)) * std::log(4.0 * out.low_size / p.delta));
  out.S = s >= 1.8e19 ? std::numeric_limits<std::uint64_t>::max() : static_cast<std::uint64_t>(s);
  return out;
}

double h_max_bound(std::int64_t T, std::size_t d) {
  return lattice_size(d, static_cast<double>(T)) / std::ldexp(1.0, static_cast<int>(d));
}

double default_kappa(double eps, const ClassParams& cls) {
  cls.validate();
  const double r = tail_inverse(cls.tail, eps);
  return std::min(eps / 2.0, eps / (4.0 * r * cls.c));
}

FourierHypothesis learn_bounded(const Sampler& oracle, const BoundedLearnerParams& p, Stream stream,
                                LearnReport* report, std::size_t workers, CoefficientAccumulator::Method method) {
  const auto started = std::chrono::steady_clock::now();
  if (oracle.dim() != p.dim) throw ParameterError("oracle dimension does not match the learner");
  const DerivedParameters dp = derive_parameters(p);
  const FrequencySet freqs(p.dim, dp.T, p.low_cap);
  const mollifier::MollifierParams mp{p.dim, dp.gamma};

  const std::uint64_t per = dp.S / kLearnChunks;
  const std::uint64_t extra = dp.S % kLearnChunks;
  auto chunk_size = [&](std::size_t k) { return per + (k < extra ? 1 : 0); };

  std::optional<CoefficientAccumulator> total;
  std::uint64_t draws = 0;
  workers = std::max<std::size_t>(1, std::min(workers, kLearnChunks));
  // Waves of `workers` chunks bound the memory held in partial sums.
  for (std::size_t first = 0; first < kLearnChunks; first += workers) {
    const std::size_t wave = std::min(workers, kLearnChunks - first);
    std::vector<std::optional<CoefficientAccumulator>> parts(wave);
    std::vector<std::uint64_t> used(wave, 0);
    parallel_for(wave, workers, [&](std::size_t w) {
      const std::size_t k = first + w;
      Stream s = stream.split(k);
      CoefficientAccumulator acc(freqs, method);
      std::vector<double> x(p.dim), b(p.dim);
      std::uint64_t consumed = 0;
      for (std::uint64_t n = chunk_size(k); n > 0; --n) {
        consumed += oracle.draw(s, x);
        mollifier::sample_b_dgamma(mp, s, b);
        for (std::size_t j = 0; j < p.dim; ++j) {
          x[j] += b[j];
          if (!(x[j] >= -1.0 && x[j] <= 1.0)) {
            throw InvariantViolation("mollified sample left [-1,1]^d; the oracle is not supported in B(1/2)");
          }
        }
        acc.add(x);
      }
      parts[w].emplace(std::move(acc));
      used[w] = consumed;
    });
    for (std::size_t w = 0; w < wave; ++w) {
      if (!total) {
        total.emplace(std::move(*parts[w]));
      } else {
        total->merge(*parts[w]);
      }
      parts[w].reset();
      draws += used[w];
    }
  }

  FourierHypothesis h(freqs, total->mean(), true);
  if (report != nullptr) {
    report->params = dp;
    report->samples = total->count();
    report->source_draws = draws;
    report->method = total->method();
    report->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }
  return h;
}

ThroughputProjection project_learn_bounded(const Sampler& oracle, const BoundedLearnerParams& p,
                                           std::uint64_t probe_samples, Stream stream, std::size_t workers) {
  if (oracle.dim() != p.dim) throw ParameterError("oracle dimension does not match the learner");
  if (probe_samples == 0) throw ParameterError("probe needs at least one sample");
  ThroughputProjection out;
  out.target = derive_parameters(p, false);
  const auto T = out.target.T;
  const bool gridded = p.dim == 1 && T >= 32;
  out.method = gridded ? CoefficientAccumulator::Method::gridded : CoefficientAccumulator::Method::direct;
  const double cap = static_cast<double>(std::min<std::size_t>(p.low_cap, 1'000'000));
  std::int64_t probe = T;
  if (lattice_size(p.dim, static_cast<double>(T)) > cap) {
    probe = static_cast<std::int64_t>((std::pow(cap, 1.0 / static_cast<double>(p.dim)) - 1.0) / 2.0);
    while (probe > 1 && lattice_size(p.dim, static_cast<double>(probe)) > cap) --probe;
  }
  if (gridded) probe = std::min<std::int64_t>(T, 4096);  // per-sample cost does not grow with T
  out.probe_T = probe;
  out.probe_samples = probe_samples;

  const FrequencySet freqs(p.dim, probe, std::numeric_limits<std::size_t>::max());
  const mollifier::MollifierParams mp{p.dim, out.target.gamma};
  CoefficientAccumulator acc(freqs, out.method);
  std::vector<double> x(p.dim), b(p.dim);
  const auto started = std::chrono::steady_clock::now();
  for (std::uint64_t n = 0; n < probe_samples; ++n) {
    oracle.draw(stream, x);
    mollifier::sample_b_dgamma(mp, stream, b);
    for (std::size_t j = 0; j < p.dim; ++j) x[j] = std::clamp(x[j] + b[j], -1.0, 1.0);
    acc.add(x);
  }
  out.probe_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const auto half = [&](double t) { return (lattice_size(p.dim, t) + 1.0) / 2.0; };
  const double scale = gridded ? 1.0 : half(static_cast<double>(T)) / half(static_cast<double>(probe));
  out.seconds_per_sample = out.probe_seconds / static_cast<double>(probe_samples) * scale;
  workers = std::max<std::size_t>(1, std::min(workers, kLearnChunks));
  out.projected_seconds = static_cast<double>(out.target.S) * out.seconds_per_sample / static_cast<double>(workers);
  const double per_acc = gridded ? 8.0 * CoefficientAccumulator::kMoments *
                                       std::exp2(std::ceil(std::log2(std::max(4.0 * std::numbers::pi * T, 16.0))))
                                 : 16.0 * half(static_cast<double>(T));
  out.memory_bytes = per_acc * static_cast<double>(workers + 1);
  return out;
}

} // namespace shiftlearn
