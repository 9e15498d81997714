#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "shiftlearn/core.hpp"
#include "shiftlearn/synthetic.hpp"

namespace shiftlearn {

// f_z(x) = (T + z_a) / Z on the unit cube a = floor(x), a in A = {-T, ..., T-1}^d,
// zero outside [-T, T)^d. Cells are indexed row-major, first axis slowest.
class CheckerboardDensity {
public:
  CheckerboardDensity(std::size_t dim, std::uint64_t T, std::vector<std::uint8_t> code);

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::uint64_t T() const noexcept { return T_; }
  [[nodiscard]] const std::vector<std::uint8_t>& code() const noexcept { return code_; }
  [[nodiscard]] std::size_t cells() const noexcept { return code_.size(); }
  [[nodiscard]] std::uint64_t weight() const noexcept { return weight_; }
  // Z = (2T)^d T + weight(z)
  [[nodiscard]] std::uint64_t normalizer() const noexcept { return z_; }

  // Cell index of x, or cells() when x is outside [-T, T)^d.
  [[nodiscard]] std::size_t cell_of(std::span<const double> x) const;
  [[nodiscard]] double cell_value(std::size_t a) const;
  [[nodiscard]] double eval(std::span<const double> x) const;
  void sample(Stream& stream, std::span<double> out) const;

  [[nodiscard]] GroundTruth ground_truth() const;

private:
  std::size_t dim_;
  std::uint64_t T_;
  std::vector<std::uint8_t> code_;
  std::uint64_t weight_ = 0;
  std::uint64_t z_ = 0;
  std::vector<std::uint64_t> cumulative_;  // cumulative_[a] = sum of (T + z_b) for b <= a
};

std::uint64_t checkerboard_T(double eps, double C = 1.0);

// Advisory bound N <= 2^{|A|/8}.
bool family_size_within_bound(std::size_t cells, std::size_t n);

// Balanced codewords with pairwise Hamming distance >= |A|/4, drawn by
// rejection. Throws ResourceError after 10^4 N draws.
std::vector<CheckerboardDensity> build_family(double eps, std::size_t dim, std::size_t n, Stream stream,
                                              double C = 1.0);

std::size_t hamming(const CheckerboardDensity& u, const CheckerboardDensity& v);

struct ExactRatio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  [[nodiscard]] double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
};

// int |f_u - f_v| = Hamming(u, v) / Z. Throws ParameterError unless T, d and Z agree.
ExactRatio exact_tv(const CheckerboardDensity& u, const CheckerboardDensity& v);
double exact_kl(const CheckerboardDensity& u, const CheckerboardDensity& v);

void write_family_json(std::ostream& out, const std::vector<CheckerboardDensity>& family);
std::vector<CheckerboardDensity> read_family_json(std::istream& in);
// CSV columns i,j,tv,kl over all pairs i < j.
void write_pairs_csv(std::ostream& out, const std::vector<CheckerboardDensity>& family);

// Hypothesis from m samples. The density is integrated against the truth on
// a grid aligned with the unit cells.
using FanoLearner = std::function<DensityFn(const SampleSet&, const std::vector<CheckerboardDensity>& family)>;

// Empirical cell frequencies.
DensityFn histogram_learner(const SampleSet& samples, const std::vector<CheckerboardDensity>& family);
// Family member of maximal likelihood, lowest index on ties.
DensityFn mle_learner(const SampleSet& samples, const std::vector<CheckerboardDensity>& family);

struct FanoRow {
  std::size_t m = 0;
  double mean_error = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
};

// For each m: a uniformly random member, m samples, the learner, int |h - f|.
// points_per_cell midpoints per axis and unit cell.
std::vector<FanoRow> fano_experiment(const std::vector<CheckerboardDensity>& family, const FanoLearner& learner,
                                     const std::vector<std::size_t>& m_values, std::size_t trials, Stream stream,
                                     std::size_t points_per_cell = 4);

void write_fano_csv(std::ostream& out, const std::vector<FanoRow>& rows);

} // namespace shiftlearn
