#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "shiftlearn/core.hpp"
#include "shiftlearn/transform.hpp"

namespace shiftlearn {

struct CandidateHypothesis {
  enum class Status { feasible, discarded };

  PulledBackHypothesis h;
  double mass = 0.0;   // estimated total mass Z
  double h_max = 0.0;  // sup of h in conditioned coordinates
  Status status = Status::discarded;
  std::string note;    // why a candidate was discarded

  [[nodiscard]] bool feasible() const noexcept { return status == Status::feasible; }
};

// Feasible exactly when mass >= 1/2.
CandidateHypothesis make_candidate(PulledBackHypothesis h, double h_max, double mass);

// N = ceil(2 (2^d H_max / eps)^2 ln(2 / delta))
std::uint64_t mass_sample_count(std::size_t dim, double h_max, double eps, double delta);

// 2^d times the mean of h at N uniform points of [-1,1]^d.
double estimate_mass(const FourierHypothesis& h_scond, double h_max, double eps, double delta, Stream stream);

// Exact draw from h / Z by rejection against [-1,1]^d x [0, H_max], mapped
// back to the original space. Returns the number of trials; throws
// CandidateStall after 64 ceil(2^d H_max) trials.
std::uint64_t sample_candidate(const CandidateHypothesis& c, Stream& stream, std::span<double> out);

// x -> h(x) / Z. Throws ParameterError for an infeasible candidate.
DensityFn eval_oracle(const CandidateHypothesis& c, double beta);

struct SelectionConfig {
  double draw_factor = 6.0;      // pair is a draw when p_i - p_j <= draw_factor * eps
  double sample_constant = 48.0; // m = ceil(sample_constant / eps^2 (ln M + ln(3 / delta)))
};

struct PairRecord {
  enum class Outcome { draw, first, second };
  std::size_t i = 0;
  std::size_t j = 0;
  double p_i = 0.0;
  double p_j = 0.0;
  double tau = 0.0;
  Outcome outcome = Outcome::draw;
};

struct SelectionReport {
  std::size_t winner = 0;
  std::uint64_t m = 0;
  std::uint64_t target_draws = 0;
  std::vector<std::size_t> non_losses;
  std::vector<PairRecord> pairs;
};

std::uint64_t tournament_sample_count(std::size_t candidates, double eps, double delta,
                                      const SelectionConfig& cfg = {});

// Scheffe tournament over unordered pairs i < j. Each candidate's m draws are
// shared by all of its pairs, as are the m target draws.
std::size_t scheffe_select(const std::vector<CandidateHypothesis>& candidates, const Sampler& target, double eps,
                           double delta, Stream stream, SelectionReport* report = nullptr,
                           const SelectionConfig& cfg = {}, std::size_t workers = default_workers());

const char* outcome_name(PairRecord::Outcome o);

} // namespace shiftlearn
