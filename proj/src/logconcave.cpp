#include "shiftlearn/logconcave.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "shiftlearn/errors.hpp"

namespace shiftlearn {

std::size_t rescale_sample_count(std::size_t dim, double c_r, std::size_t floor) {
  if (dim == 0) throw ParameterError("dimension must be positive");
  const double l = std::log(static_cast<double>(dim) + 2.0);
  return std::max(floor, static_cast<std::size_t>(std::ceil(c_r * static_cast<double>(dim) * l * l * l)));
}

CovarianceEstimate rescale(const SampleSet& samples) {
  const std::size_t d = samples.dim();
  const std::size_t m = samples.size();
  if (m < 2) throw ParameterError("rescale needs at least two samples");
  CovarianceEstimate out;
  out.mean.assign(d, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < d; ++i) out.mean[i] += samples[k][i];
  }
  for (auto& v : out.mean) v /= static_cast<double>(m);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd x(d);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < d; ++i) x[i] = samples[k][i] - out.mean[i];
    s.noalias() += x * x.transpose();
  }
  s /= static_cast<double>(m);
  out.sigma.resize(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) out.sigma[i * d + j] = s(i, j);
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  if (es.info() != Eigen::Success) throw DegenerateCovariance("eigendecomposition failed");
  const Eigen::VectorXd lam = es.eigenvalues();
  Eigen::MatrixXd vec = es.eigenvectors();
  const double top = lam.maxCoeff();
  if (!(top > 0.0) || !(lam.minCoeff() >= 1e-12 * top)) {
    throw DegenerateCovariance("sample covariance is numerically singular");
  }
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < d; ++i) {
      if (vec(i, k) != 0.0) {
        if (vec(i, k) < 0.0) vec.col(k) *= -1.0;
        break;
      }
    }
  }
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (lam[a] != lam[b]) return lam[a] > lam[b];
    for (std::size_t i = 0; i < d; ++i) {
      if (vec(i, a) != vec(i, b)) return vec(i, a) < vec(i, b);
    }
    return a < b;
  });

  Whitening& w = out.whitening;
  w.mean = out.mean;
  w.matrix.assign(d * d, 0.0);
  w.inverse.assign(d * d, 0.0);
  out.eigenvalues.resize(d);
  out.eigenvectors.resize(d * d);
  double det = 1.0;
  for (std::size_t r = 0; r < d; ++r) {
    const std::size_t k = order[r];
    const double root = std::sqrt(lam[k]);
    out.eigenvalues[r] = lam[k];
    det /= root;
    for (std::size_t i = 0; i < d; ++i) {
      out.eigenvectors[r * d + i] = vec(i, k);
      w.matrix[r * d + i] = vec(i, k) / root;
      w.inverse[i * d + r] = vec(i, k) * root;
    }
  }
  w.abs_det = det;
  return out;
}

double approximation_ratio(const CovarianceEstimate& est, std::span<const double> sigma, std::span<const double> v) {
  const std::size_t d = est.dim();
  if (sigma.size() != d * d || v.size() != d) throw ParameterError("dimension mismatch");
  double a = 0.0;
  double b = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      a += v[i] * est.sigma[i * d + j] * v[j];
      b += v[i] * sigma[i * d + j] * v[j];
    }
  }
  return a / b;
}

std::uint64_t WhitenedSampler::draw(Stream& stream, std::span<double> out) const {
  PointBuffer buf(dim());
  const auto x = buf.span();
  const std::uint64_t n = source_.draw(stream, x);
  w_.apply(x, out);
  return n;
}

void LogConcaveConfig::validate() const {
  if (!(eps > 0.0 && eps < 0.5)) throw ParameterError("eps must lie in (0, 1/2)");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  if (!(c_r > 0.0) || !(c_base >= 1.0) || !(tail_scale > 0.0)) throw ParameterError("bad log-concave constants");
}

std::size_t LogConcaveConfig::resolved_attempts() const {
  if (attempts > 0) return attempts;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::log2(1.0 / delta))));
}

ClassParams logconcave_class(std::size_t dim, const LogConcaveConfig& cfg) {
  const double d = static_cast<double>(dim);
  return {16.0 * std::pow(cfg.c_base, d) * std::sqrt(d), dim, TailBound::exponential(cfg.tail_scale * std::sqrt(d))};
}

LogConcaveResult learn_logconcave(const Sampler& oracle, std::size_t dim, const LogConcaveConfig& cfg, Stream stream) {
  cfg.validate();
  if (oracle.dim() != dim) throw ParameterError("oracle dimension mismatch");
  PipelineConfig pc = cfg.pipeline;
  pc.cls = logconcave_class(dim, cfg);
  pc.eps = cfg.eps;
  pc.delta = cfg.delta;
  pc.validate();

  LogConcaveResult out;
  const std::size_t n = cfg.resolved_attempts();
  const std::size_t m = rescale_sample_count(dim, cfg.c_r, cfg.rescale_floor);
  std::vector<CandidateHypothesis> winners;
  std::vector<std::size_t> index;
  for (std::size_t a = 0; a < n; ++a) {
    Stream sa = stream.split(a);
    LogConcaveAttempt at;
    try {
      std::uint64_t used = 0;
      at.covariance = rescale(draw_samples(oracle, m, sa.split(0), &used));
      at.samples = used;
      const WhitenedSampler white(oracle, at.covariance.whitening);
      const LearnResult r = learn(white, pc, sa.split(1));
      at.samples += r.total_samples;
      at.winner = r.winner;
      at.ok = true;
      auto c = r.hypothesis;
      c.h = c.h.with_whitening(at.covariance.whitening);
      winners.push_back(std::move(c));
      index.push_back(a);
    } catch (const DegenerateCovariance& e) {
      at.note = std::string("degenerate covariance: ") + e.what();
    } catch (const PipelineFailure& e) {
      at.note = std::string("pipeline failure: ") + e.what();
    }
    out.total_samples += at.samples;
    out.attempts.push_back(std::move(at));
  }
  if (winners.empty()) {
    std::string msg = "all " + std::to_string(n) + " rescale attempts failed";
    for (std::size_t a = 0; a < n; ++a) msg += "\n  attempt " + std::to_string(a) + ": " + out.attempts[a].note;
    throw PipelineFailure(msg);
  }
  const std::size_t w = scheffe_select(winners, oracle, cfg.eps, cfg.delta, stream.split(n), &out.selection,
                                       pc.selection, pc.resolved_workers());
  out.winner = index[w];
  out.hypothesis = winners[w];
  out.total_samples += out.selection.target_draws;
  return out;
}

ShiftIntegral shift_integral_check(const std::function<double(double)>& l, double max_l, double h, double lo,
                                   double hi) {
  if (!(h >= 0.0)) throw ParameterError("shift must be nonnegative");
  if (!(hi > lo)) throw ParameterError("empty interval");
  ShiftIntegral out;
  out.bound = 3.0 * h * max_l;
  if (h == 0.0) return out;
  const auto f = [&](double t) { return std::abs(l(t) - l(t + h)); };
  // Split where l or its shift may jump.
  std::vector<double> cuts{lo - h, lo, hi - h, hi};
  std::sort(cuts.begin(), cuts.end());
  using boost::math::quadrature::gauss_kronrod;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (!(cuts[k + 1] > cuts[k])) continue;
    double err = 0.0;
    out.lhs += gauss_kronrod<double, 61>::integrate(f, cuts[k], cuts[k + 1], 25, 1e-12, &err);
    out.error += err;
  }
  if (!(out.error <= 1e-8)) throw Error("shift integral did not converge");
  return out;
}

} // namespace shiftlearn
