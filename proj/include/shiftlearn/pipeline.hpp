#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "shiftlearn/core.hpp"
#include "shiftlearn/learn_bounded.hpp"
#include "shiftlearn/select.hpp"
#include "shiftlearn/transform.hpp"

namespace shiftlearn {

struct PipelineConfig {
  ClassParams cls;
  double eps = 0.15;
  double delta = 0.1;
  std::size_t candidates = 0;  // D; 0 follows the schedule
  bool desk_mode = true;       // cap D at ceil(20 ln(1/delta))
  double schedule_constant = 10.536051565782628;  // a in D = ceil(exp(a I_g) ln(1/delta)); 100 ln(10/9)
  double kappa = 0.0;          // 0 means min(eps/2, eps / (4 g^{-1}(eps) c))
  double c_T = 1.0;
  double c_S = 1.0;
  std::size_t low_cap = kDefaultLowCap;
  double mass_eps = 0.0;       // accuracy of the mass estimate; 0 means eps
  std::size_t max_rejects = ConditionedSampler::kDefaultMaxRejects;
  SelectionConfig selection;
  std::size_t workers = 0;     // 0 means default_workers()

  void validate() const;
  [[nodiscard]] double resolved_kappa() const;
  [[nodiscard]] std::size_t resolved_workers() const;
};

// Full schedule ceil(exp(a I_g) ln(1/delta)); desk mode takes the minimum
// with ceil(20 ln(1/delta)). An explicit count overrides both.
std::size_t candidate_count(const PipelineConfig& cfg);

struct FrameReport {
  AffineFrame frame;
  bool feasible = false;
  double mass = 0.0;
  double h_max = 0.0;
  double acceptance = 0.0;
  std::uint64_t samples_used = 0;  // oracle draws: frame estimate plus learner
  double seconds = 0.0;
  std::string note;
};

struct CandidateSet {
  std::vector<CandidateHypothesis> candidates;  // one per frame, feasible or not
  std::vector<FrameReport> frames;
  DerivedParameters learner;
  double kappa = 0.0;
  std::uint64_t samples_used = 0;
};

CandidateSet construct_candidates(const Sampler& oracle, const PipelineConfig& cfg, Stream stream);

struct LearnResult {
  CandidateHypothesis hypothesis;
  std::size_t winner = 0;  // index into the candidate list
  CandidateSet candidates;
  SelectionReport selection;
  std::uint64_t total_samples = 0;
  double seconds = 0.0;
};

// construct_candidates followed by scheffe_select over the feasible ones.
// Throws PipelineFailure when no candidate is feasible.
LearnResult learn(const Sampler& oracle, const PipelineConfig& cfg, Stream stream);

} // namespace shiftlearn
