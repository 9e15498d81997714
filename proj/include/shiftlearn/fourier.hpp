#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "shiftlearn/core.hpp"

namespace shiftlearn {

inline constexpr std::size_t kDefaultLowCap = 100'000'000;

// All xi in Z^d with |xi|_inf <= T, lexicographic with the first coordinate
// most significant. Index i and size() - 1 - i hold xi and -xi.
class FrequencySet {
public:
  FrequencySet() = default;
  FrequencySet(std::size_t dim, std::int64_t cutoff, std::size_t cap = kDefaultLowCap);

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::int64_t cutoff() const noexcept { return cutoff_; }
  [[nodiscard]] std::size_t side() const noexcept { return static_cast<std::size_t>(2 * cutoff_ + 1); }
  [[nodiscard]] std::size_t size() const noexcept { return size_; }
  [[nodiscard]] std::size_t center() const noexcept { return size_ / 2; }
  [[nodiscard]] std::size_t conjugate(std::size_t i) const noexcept { return size_ - 1 - i; }

  void frequency(std::size_t i, std::span<std::int64_t> out) const;
  [[nodiscard]] std::vector<std::int64_t> frequency(std::size_t i) const;
  [[nodiscard]] std::size_t index_of(std::span<const std::int64_t> xi) const;

private:
  std::size_t dim_ = 0;
  std::int64_t cutoff_ = 0;
  std::size_t size_ = 0;
};

FrequencySet build_low(std::size_t dim, std::int64_t cutoff, std::size_t cap = kDefaultLowCap);

// Lattice size (2T+1)^d as a double, for cap checks before anything is allocated.
double lattice_size(std::size_t dim, double cutoff);

// h(z) = max(0, Re u(z)) with u(z) = 2^{-d} sum_xi coeff(xi) exp(i pi <xi, z>).
class FourierHypothesis {
public:
  FourierHypothesis() = default;
  FourierHypothesis(FrequencySet freqs, std::vector<std::complex<double>> coeffs, bool clip);

  [[nodiscard]] const FrequencySet& freqs() const noexcept { return freqs_; }
  [[nodiscard]] const std::vector<std::complex<double>>& coeffs() const noexcept { return coeffs_; }
  [[nodiscard]] bool clip() const noexcept { return clip_; }
  [[nodiscard]] std::size_t dim() const noexcept { return freqs_.dim(); }

  [[nodiscard]] FourierHypothesis clipped(bool on = true) const;

  // Throws DomainError outside [-1,1]^d.
  [[nodiscard]] double evaluate(std::span<const double> z) const;
  // No domain check; the caller guarantees z in [-1,1]^d.
  [[nodiscard]] double evaluate_unchecked(std::span<const double> z) const;
  [[nodiscard]] std::complex<double> u(std::span<const double> z) const;

private:
  FrequencySet freqs_;
  std::vector<std::complex<double>> coeffs_;
  bool clip_ = false;
  bool hermitian_ = false;  // coeff(-xi) == conj(coeff(xi)) for every xi
};

// Running sums of exp(-i pi <xi, x>) over points of [-1,1]^d. Sums are
// kept for the half lattice i >= center(); the rest follows by conjugation.
//
// The gridded method (d = 1) rounds each x to the nearest node of a grid of
// spacing 2/G, keeps 13 Taylor moments of the offset per node and turns them
// into coefficients with one real FFT per moment. With G >= 4 pi T the
// truncation error is below 1e-17 per point.
class CoefficientAccumulator {
public:
  enum class Method { automatic, direct, gridded };

  CoefficientAccumulator(const FrequencySet& freqs, Method method = Method::automatic);

  [[nodiscard]] Method method() const noexcept { return method_; }
  [[nodiscard]] std::uint64_t count() const noexcept { return count_; }

  // Throws DomainError when x is outside [-1,1]^d.
  void add(std::span<const double> x);
  void merge(const CoefficientAccumulator& other);
  [[nodiscard]] std::vector<std::complex<double>> mean() const;

  static constexpr int kMoments = 13;

private:
  FrequencySet freqs_;
  Method method_;
  std::uint64_t count_ = 0;
  std::vector<std::complex<double>> sums_;  // direct: half lattice
  std::vector<double> moments_;             // gridded: node-major, kMoments per node
  std::size_t grid_ = 0;
  std::vector<std::complex<double>> scratch_;
};

FourierHypothesis estimate_coefficients(const SampleSet& samples, const FrequencySet& freqs,
                                        CoefficientAccumulator::Method method =
                                            CoefficientAccumulator::Method::automatic);

// Re u at z_k = -1 + 2k/N for k in [0, N)^d (row-major, first axis slowest),
// unclipped. N must exceed 2T.
std::vector<double> grid_values(const FourierHypothesis& h, std::size_t n);

// Upper bound on sup |Re u| over [-1,1]^d from an FFT grid and Bernstein's
// inequality, capped by 2^{-d} sum |coeff|. Falls back to the cap when the
// grid would exceed max_grid_points.
double certified_sup(const FourierHypothesis& h, std::size_t max_grid_points = 1u << 24);

double parseval_norm(const FourierHypothesis& h);

// 2^{-d} sum |coeff|.
double coefficient_l1_bound(const FourierHypothesis& h);

} // namespace shiftlearn
