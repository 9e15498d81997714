#include "shiftlearn/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace shiftlearn {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

void PipelineConfig::validate() const {
  cls.validate();
  if (!(eps > 0.0 && eps < 0.5)) throw ParameterError("eps must lie in (0, 1/2)");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  if (kappa < 0.0) throw ParameterError("kappa must be nonnegative");
  if (mass_eps < 0.0) throw ParameterError("mass_eps must be nonnegative");
  if (!(schedule_constant > 0.0)) throw ParameterError("schedule constant must be positive");
}

double PipelineConfig::resolved_kappa() const { return kappa > 0.0 ? kappa : default_kappa(eps, cls); }

std::size_t PipelineConfig::resolved_workers() const { return workers > 0 ? workers : default_workers(); }

std::size_t candidate_count(const PipelineConfig& cfg) {
  cfg.validate();
  if (cfg.candidates > 0) return cfg.candidates;
  const double log_term = std::log(1.0 / cfg.delta);
  const double full = std::ceil(std::exp(cfg.schedule_constant * tail_integral(cfg.cls.tail)) * log_term);
  const double desk = std::ceil(20.0 * log_term);
  const double d = cfg.desk_mode ? std::min(full, desk) : full;
  if (!(d < 1e7)) throw ResourceError("candidate schedule asks for " + std::to_string(d) + " runs");
  return std::max<std::size_t>(1, static_cast<std::size_t>(d));
}

CandidateSet construct_candidates(const Sampler& oracle, const PipelineConfig& cfg, Stream stream) {
  cfg.validate();
  if (oracle.dim() != cfg.cls.dim) throw ParameterError("oracle dimension does not match the class");
  const std::size_t runs = candidate_count(cfg);
  const std::size_t m = transformation_sample_count(cfg.cls.tail);
  const std::size_t workers = cfg.resolved_workers();

  CandidateSet out;
  out.kappa = cfg.resolved_kappa();
  BoundedLearnerParams lp{cfg.cls.dim, cfg.eps, out.kappa, cfg.delta, cfg.c_T, cfg.c_S, cfg.low_cap};
  out.learner = derive_parameters(lp);

  for (std::size_t k = 0; k < runs; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Stream sk = stream.split(k);
    FrameReport fr;
    std::uint64_t used = 0;
    const SampleSet pre = draw_samples(oracle, m, sk.split(0), &used);
    fr.frame = compute_transformation(pre, cfg.cls.tail, cfg.eps);
    CandidateHypothesis cand;
    try {
      ConditionedSampler cond(oracle, fr.frame, cfg.max_rejects);
      LearnReport lr;
      try {
        const FourierHypothesis h = learn_bounded(cond, lp, sk.split(1), &lr, workers);
        used += lr.source_draws;
        fr.acceptance = cond.acceptance_rate();
        const double h_max = certified_sup(h);
        const double mass_eps = cfg.mass_eps > 0.0 ? cfg.mass_eps : cfg.eps;
        const double mass = estimate_mass(h, h_max, mass_eps, cfg.delta, sk.split(2));
        cand = make_candidate(pull_back_hypothesis(h, fr.frame), h_max, mass);
      } catch (const InefficientFrame& e) {
        used += cond.attempted();
        fr.acceptance = cond.acceptance_rate();
        cand.status = CandidateHypothesis::Status::discarded;
        cand.note = std::string("inefficient frame: ") + e.what();
      }
    } catch (const InvariantViolation& e) {
      cand.status = CandidateHypothesis::Status::discarded;
      cand.note = std::string("invariant violation: ") + e.what();
    }
    fr.feasible = cand.feasible();
    fr.mass = cand.mass;
    fr.h_max = cand.h_max;
    fr.note = cand.note;
    fr.samples_used = used;
    fr.seconds = seconds_since(t0);
    out.samples_used += used;
    out.frames.push_back(fr);
    out.candidates.push_back(std::move(cand));
  }
  return out;
}

LearnResult learn(const Sampler& oracle, const PipelineConfig& cfg, Stream stream) {
  const auto t0 = std::chrono::steady_clock::now();
  LearnResult out;
  out.candidates = construct_candidates(oracle, cfg, stream.split(0));
  std::vector<CandidateHypothesis> feasible;
  std::vector<std::size_t> index;
  for (std::size_t k = 0; k < out.candidates.candidates.size(); ++k) {
    if (out.candidates.candidates[k].feasible()) {
      feasible.push_back(out.candidates.candidates[k]);
      index.push_back(k);
    }
  }
  if (feasible.empty()) {
    std::string msg = "no feasible candidate among " + std::to_string(out.candidates.frames.size()) + " runs";
    for (std::size_t k = 0; k < out.candidates.frames.size(); ++k) {
      const auto& f = out.candidates.frames[k];
      msg += "\n  run " + std::to_string(k) + ": mass " + std::to_string(f.mass) + ", acceptance " +
             std::to_string(f.acceptance) + (f.note.empty() ? "" : ", " + f.note);
    }
    throw PipelineFailure(msg);
  }
  const std::size_t w = scheffe_select(feasible, oracle, cfg.eps, cfg.delta, stream.split(1), &out.selection,
                                       cfg.selection, cfg.resolved_workers());
  out.winner = index[w];
  out.hypothesis = feasible[w];
  out.total_samples = out.candidates.samples_used + out.selection.target_draws;
  out.seconds = seconds_since(t0);
  return out;
}

} // namespace shiftlearn
