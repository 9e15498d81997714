#include "shiftlearn/select.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace shiftlearn {

CandidateHypothesis make_candidate(PulledBackHypothesis h, double h_max, double mass) {
  CandidateHypothesis c;
  c.h = std::move(h);
  c.h_max = h_max;
  c.mass = mass;
  c.status = mass >= 0.5 ? CandidateHypothesis::Status::feasible : CandidateHypothesis::Status::discarded;
  if (!c.feasible()) c.note = "estimated mass below 1/2";
  return c;
}

std::uint64_t mass_sample_count(std::size_t dim, double h_max, double eps, double delta) {
  if (!(eps > 0.0) || !(delta > 0.0 && delta < 1.0)) throw ParameterError("mass estimation needs eps > 0, delta in (0,1)");
  const double r = std::ldexp(h_max, static_cast<int>(dim)) / eps;
  return static_cast<std::uint64_t>(std::ceil(2.0 * r * r * std::log(2.0 / delta)));
}

double estimate_mass(const FourierHypothesis& h_scond, double h_max, double eps, double delta, Stream stream) {
  const std::size_t d = h_scond.dim();
  const std::uint64_t n = std::max<std::uint64_t>(1, mass_sample_count(d, h_max, eps, delta));
  std::vector<double> y(d);
  double sum = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    for (auto& v : y) v = stream.uniform(-1.0, 1.0);
    sum += h_scond.evaluate_unchecked(y);
  }
  return std::ldexp(sum / static_cast<double>(n), static_cast<int>(d));
}

std::uint64_t sample_candidate(const CandidateHypothesis& c, Stream& stream, std::span<double> out) {
  if (!c.feasible()) throw ParameterError("cannot sample an infeasible candidate");
  const std::size_t d = c.h.dim();
  const auto limit = static_cast<std::uint64_t>(64.0 * std::ceil(std::ldexp(c.h_max, static_cast<int>(d))));
  std::vector<double> y(d);
  const auto& h = c.h.conditioned();
  for (std::uint64_t trial = 1; trial <= limit; ++trial) {
    for (auto& v : y) v = stream.uniform(-1.0, 1.0);
    const double u = stream.uniform(0.0, c.h_max);
    if (u <= h.evaluate_unchecked(y)) {
      c.h.from_conditioned(y, out);
      return trial;
    }
  }
  throw CandidateStall("candidate sampler made no progress in " + std::to_string(limit) + " trials");
}

DensityFn eval_oracle(const CandidateHypothesis& c, double beta) {
  if (!c.feasible()) throw ParameterError("evaluation oracle requested for an infeasible candidate");
  if (!(beta > 0.0)) throw ParameterError("beta must be positive");
  return [h = c.h, z = c.mass](std::span<const double> x) { return h.density(x) / z; };
}

std::uint64_t tournament_sample_count(std::size_t candidates, double eps, double delta, const SelectionConfig& cfg) {
  if (!(eps > 0.0) || !(delta > 0.0 && delta < 1.0)) throw ParameterError("selection needs eps > 0, delta in (0,1)");
  const double m = cfg.sample_constant / (eps * eps) *
                   (std::log(static_cast<double>(std::max<std::size_t>(candidates, 1))) + std::log(3.0 / delta));
  return static_cast<std::uint64_t>(std::ceil(m));
}

const char* outcome_name(PairRecord::Outcome o) {
  switch (o) {
    case PairRecord::Outcome::draw: return "draw";
    case PairRecord::Outcome::first: return "i";
    case PairRecord::Outcome::second: return "j";
  }
  return "?";
}

std::size_t scheffe_select(const std::vector<CandidateHypothesis>& candidates, const Sampler& target, double eps,
                           double delta, Stream stream, SelectionReport* report, const SelectionConfig& cfg,
                           std::size_t workers) {
  const std::size_t n = candidates.size();
  if (n == 0) throw PipelineFailure("selection needs at least one candidate");
  for (const auto& c : candidates) {
    if (!c.feasible()) throw ParameterError("selection received an infeasible candidate");
  }
  SelectionReport local;
  SelectionReport& rep = report != nullptr ? *report : local;
  rep = {};
  rep.non_losses.assign(n, 0);
  if (n == 1) {
    rep.winner = 0;
    return 0;
  }
  const std::uint64_t m = tournament_sample_count(n, eps, delta, cfg);
  rep.m = m;
  const std::size_t d = target.dim();

  std::vector<DensityFn> eval(n);
  for (std::size_t k = 0; k < n; ++k) eval[k] = eval_oracle(candidates[k], eps / 32.0);

  // hits[p][i * n + j] counts points of pool p inside W_ij = {v_i > v_j}.
  // Pools 0..n-1 are candidate draws, pool n is the target.
  std::vector<std::vector<std::uint64_t>> hits(n + 1, std::vector<std::uint64_t>(n * n, 0));
  std::vector<std::uint64_t> target_used(1, 0);
  parallel_for(n + 1, workers, [&](std::size_t p) {
    Stream s = stream.split(p);
    std::vector<double> x(d), v(n);
    auto& h = hits[p];
    for (std::uint64_t r = 0; r < m; ++r) {
      if (p < n) {
        sample_candidate(candidates[p], s, x);
      } else {
        target_used[0] += target.draw(s, x);
      }
      if (p < n) {
        // Only pairs that involve p read this pool.
        for (std::size_t k = 0; k < n; ++k) v[k] = eval[k](x);
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p) continue;
          h[p * n + k] += v[p] > v[k];
          h[k * n + p] += v[k] > v[p];
        }
      } else {
        for (std::size_t k = 0; k < n; ++k) v[k] = eval[k](x);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = i + 1; j < n; ++j) h[i * n + j] += v[i] > v[j];
        }
      }
    }
  });
  rep.target_draws = target_used[0];

  const double md = static_cast<double>(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      PairRecord pr;
      pr.i = i;
      pr.j = j;
      pr.p_i = static_cast<double>(hits[i][i * n + j]) / md;
      pr.p_j = static_cast<double>(hits[j][i * n + j]) / md;
      pr.tau = static_cast<double>(hits[n][i * n + j]) / md;
      if (pr.p_i - pr.p_j <= cfg.draw_factor * eps) {
        pr.outcome = PairRecord::Outcome::draw;
        ++rep.non_losses[i];
        ++rep.non_losses[j];
      } else if (std::abs(pr.p_i - pr.tau) < std::abs(pr.p_j - pr.tau)) {
        pr.outcome = PairRecord::Outcome::first;
        ++rep.non_losses[i];
      } else {
        pr.outcome = PairRecord::Outcome::second;
        ++rep.non_losses[j];
      }
      rep.pairs.push_back(pr);
    }
  }
  rep.winner = static_cast<std::size_t>(std::max_element(rep.non_losses.begin(), rep.non_losses.end()) -
                                        rep.non_losses.begin());
  return rep.winner;
}

} // namespace shiftlearn
