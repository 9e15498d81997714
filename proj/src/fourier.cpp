#include "shiftlearn/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include <fftw3.h>

#include "shiftlearn/errors.hpp"

namespace shiftlearn {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}

// out[k] = exp(sign i pi k x) for k in [0, n]. Re-anchored every 32 steps
// so the recurrence error stays near machine precision.
void phase_powers(double x, double sign, std::size_t n, cplx* out) {
  const cplx w = std::polar(1.0, sign * kPi * x);
  out[0] = 1.0;
  for (std::size_t k = 1; k <= n; ++k) {
    if ((k & 31U) == 0) {
      out[k] = std::polar(1.0, sign * kPi * x * static_cast<double>(k));
    } else {
      out[k] = out[k - 1] * w;
    }
  }
}

// table[k] = exp(sign i pi (k - T) x) for k in [0, 2T].
void axis_table(double x, double sign, std::int64_t cutoff, cplx* table) {
  const auto t = static_cast<std::size_t>(cutoff);
  phase_powers(x, sign, t, table + t);
  for (std::size_t k = 1; k <= t; ++k) table[t - k] = std::conj(table[t + k]);
}

// sum_{k < n} c[k] w^k with four interleaved Horner chains in plain real
// arithmetic (std::complex multiplication goes through a slow NaN-safe path).
cplx poly_sum(const cplx* c, std::size_t n, cplx w) {
  if (n == 0) return 0.0;
  const double wr = w.real(), wi = w.imag();
  const double w2r = wr * wr - wi * wi, w2i = 2.0 * wr * wi;
  const double w4r = w2r * w2r - w2i * w2i, w4i = 2.0 * w2r * w2i;
  double ar[4] = {0, 0, 0, 0}, ai[4] = {0, 0, 0, 0};
  const std::size_t full = n / 4;
  for (std::size_t m = full; m-- > 0;) {
    const cplx* q = c + 4 * m;
    for (int r = 0; r < 4; ++r) {
      const double nr = ar[r] * w4r - ai[r] * w4i + q[r].real();
      const double ni = ar[r] * w4i + ai[r] * w4r + q[r].imag();
      ar[r] = nr;
      ai[r] = ni;
    }
  }
  // Combine chains: S = A0 + w A1 + w^2 A2 + w^3 A3.
  const double w3r = w2r * wr - w2i * wi, w3i = w2r * wi + w2i * wr;
  double sr = ar[0] + (ar[1] * wr - ai[1] * wi) + (ar[2] * w2r - ai[2] * w2i) + (ar[3] * w3r - ai[3] * w3i);
  double si = ai[0] + (ar[1] * wi + ai[1] * wr) + (ar[2] * w2i + ai[2] * w2r) + (ar[3] * w3i + ai[3] * w3r);
  // Tail terms k = 4 full .. n-1 multiply w^{4 full}.
  if (n % 4 != 0) {
    const cplx w4full = std::polar(1.0, std::arg(w) * static_cast<double>(4 * full));
    double tr = 0.0, ti = 0.0;
    for (std::size_t k = n; k-- > 4 * full;) {
      const double nr = tr * wr - ti * wi + c[k].real();
      const double ni = tr * wi + ti * wr + c[k].imag();
      tr = nr;
      ti = ni;
    }
    sr += tr * w4full.real() - ti * w4full.imag();
    si += tr * w4full.imag() + ti * w4full.real();
  }
  return {sr, si};
}

bool in_cube(std::span<const double> x) {
  return std::ranges::all_of(x, [](double v) { return v >= -1.0 && v <= 1.0; });
}

std::size_t next_pow2(double v) {
  std::size_t n = 1;
  while (static_cast<double>(n) < v) n <<= 1U;
  return n;
}

} // namespace

double lattice_size(std::size_t dim, double cutoff) {
  return std::pow(2.0 * cutoff + 1.0, static_cast<double>(dim));
}

FrequencySet::FrequencySet(std::size_t dim, std::int64_t cutoff, std::size_t cap)
    : dim_(dim), cutoff_(cutoff) {
  if (dim < 1) throw ParameterError("frequency set dimension must be at least 1");
  if (cutoff < 0) throw ParameterError("frequency cutoff must be nonnegative");
  const double total = lattice_size(dim, static_cast<double>(cutoff));
  if (total > static_cast<double>(cap)) {
    throw ResourceError("frequency lattice of size " + std::to_string(total) + " (T = " +
                        std::to_string(cutoff) + ", d = " + std::to_string(dim) +
                        ") exceeds the cap of " + std::to_string(cap));
  }
  size_ = static_cast<std::size_t>(total);
}

void FrequencySet::frequency(std::size_t i, std::span<std::int64_t> out) const {
  const std::size_t s = side();
  for (std::size_t j = dim_; j-- > 0;) {
    out[j] = static_cast<std::int64_t>(i % s) - cutoff_;
    i /= s;
  }
}

std::vector<std::int64_t> FrequencySet::frequency(std::size_t i) const {
  std::vector<std::int64_t> xi(dim_);
  frequency(i, xi);
  return xi;
}

std::size_t FrequencySet::index_of(std::span<const std::int64_t> xi) const {
  if (xi.size() != dim_) throw DomainError("frequency has the wrong dimension");
  std::size_t i = 0;
  for (auto v : xi) {
    if (v < -cutoff_ || v > cutoff_) throw DomainError("frequency outside the lattice");
    i = i * side() + static_cast<std::size_t>(v + cutoff_);
  }
  return i;
}

FrequencySet build_low(std::size_t dim, std::int64_t cutoff, std::size_t cap) {
  return FrequencySet(dim, cutoff, cap);
}

FourierHypothesis::FourierHypothesis(FrequencySet freqs, std::vector<cplx> coeffs, bool clip)
    : freqs_(std::move(freqs)), coeffs_(std::move(coeffs)), clip_(clip) {
  if (coeffs_.size() != freqs_.size()) throw ParameterError("coefficient count does not match the lattice");
  hermitian_ = true;
  for (std::size_t i = 0; i < coeffs_.size() && hermitian_; ++i) {
    hermitian_ = coeffs_[freqs_.conjugate(i)] == std::conj(coeffs_[i]);
  }
}

FourierHypothesis FourierHypothesis::clipped(bool on) const {
  FourierHypothesis h = *this;
  h.clip_ = on;
  return h;
}

cplx FourierHypothesis::u(std::span<const double> z) const {
  const std::size_t d = freqs_.dim();
  if (d == 1) {
    const cplx w = std::polar(1.0, kPi * z[0]);
    const auto t = static_cast<std::size_t>(freqs_.cutoff());
    const cplx shift = std::polar(1.0, -kPi * static_cast<double>(t) * z[0]);
    return poly_sum(coeffs_.data(), coeffs_.size(), w) * shift / 2.0;
  }
  const std::size_t side = freqs_.side();
  const std::int64_t t = freqs_.cutoff();
  // Nested Horner, one axis per level: the innermost axis runs over
  // contiguous coefficients.
  std::vector<cplx> w(d), shift(d);
  for (std::size_t j = 0; j < d; ++j) {
    w[j] = std::polar(1.0, kPi * z[j]);
    shift[j] = std::polar(1.0, -kPi * static_cast<double>(t) * z[j]);
  }
  auto level = [&](auto&& self, std::size_t j, std::size_t base, std::size_t stride) -> cplx {
    const std::size_t inner = stride / side;
    if (j + 1 == d) return poly_sum(coeffs_.data() + base, side, w[j]) * shift[j];
    cplx acc = 0.0;
    for (std::size_t k = side; k-- > 0;) {
      const cplx term = j + 1 == d ? coeffs_[base + k] : self(self, j + 1, base + k * inner, inner);
      acc = acc * w[j] + term;
    }
    return acc * shift[j];
  };
  return level(level, 0, 0, freqs_.size()) / std::ldexp(1.0, static_cast<int>(d));
}

double FourierHypothesis::evaluate_unchecked(std::span<const double> z) const {
  double re = 0.0;
  if (hermitian_ && freqs_.dim() == 1) {
    // Re u = (c_0 + 2 Re sum_{k >= 1} c_k w^k) / 2 when c_{-k} = conj(c_k).
    const std::size_t center = freqs_.center();
    const cplx w = std::polar(1.0, kPi * z[0]);
    const cplx tail = poly_sum(coeffs_.data() + center + 1, center, w);
    re = 0.5 * coeffs_[center].real() + (w.real() * tail.real() - w.imag() * tail.imag());
  } else {
    re = u(z).real();
  }
  return clip_ ? std::max(0.0, re) : re;
}

double FourierHypothesis::evaluate(std::span<const double> z) const {
  if (z.size() != dim()) throw DomainError("evaluation point has the wrong dimension");
  if (!in_cube(z)) throw DomainError("evaluation point outside [-1,1]^d");
  return evaluate_unchecked(z);
}

CoefficientAccumulator::CoefficientAccumulator(const FrequencySet& freqs, Method method)
    : freqs_(freqs), method_(method) {
  if (method_ == Method::automatic) {
    method_ = freqs.dim() == 1 && freqs.cutoff() >= 32 ? Method::gridded : Method::direct;
  }
  if (method_ == Method::gridded) {
    if (freqs.dim() != 1) throw ParameterError("gridded coefficient estimation is one-dimensional");
    const double t = static_cast<double>(freqs.cutoff());
    grid_ = next_pow2(std::max({4.0 * kPi * t, 2.0 * t + 2.0, 16.0}));
    moments_.assign(grid_ * kMoments, 0.0);
  } else {
    sums_.assign(freqs.size() - freqs.center(), 0.0);
    scratch_.resize(freqs.dim() * freqs.side());
  }
}

void CoefficientAccumulator::add(std::span<const double> x) {
  if (x.size() != freqs_.dim() || !in_cube(x)) throw DomainError("sample outside [-1,1]^d");
  ++count_;
  if (method_ == Method::gridded) {
    const double g = static_cast<double>(grid_);
    const double pos = (x[0] + 1.0) * g / 2.0;
    const double node = std::nearbyint(pos);
    const double s = 2.0 * (pos - node);  // offset in units of 1/G, within [-1, 1]
    const auto j = static_cast<std::size_t>(node) % grid_;
    double* m = moments_.data() + j * kMoments;
    double p = 1.0;
    for (int k = 0; k < kMoments; ++k) {
      m[k] += p;
      p *= s;
    }
    return;
  }
  const std::size_t d = freqs_.dim();
  const std::size_t side = freqs_.side();
  const std::int64_t t = freqs_.cutoff();
  if (d == 1) {
    phase_powers(x[0], -1.0, static_cast<std::size_t>(t), scratch_.data());
    for (std::size_t k = 0; k < sums_.size(); ++k) sums_[k] += scratch_[k];
    return;
  }
  for (std::size_t j = 0; j < d; ++j) axis_table(x[j], -1.0, t, scratch_.data() + j * side);
  // Walk i = center .. size-1, keeping digits and prefix products.
  std::vector<std::size_t> digit(d);
  std::vector<cplx> prefix(d + 1);
  std::size_t i = freqs_.center();
  {
    std::size_t r = i;
    for (std::size_t j = d; j-- > 0;) {
      digit[j] = r % side;
      r /= side;
    }
  }
  prefix[0] = 1.0;
  for (std::size_t j = 0; j < d; ++j) prefix[j + 1] = prefix[j] * scratch_[j * side + digit[j]];
  const cplx* last = scratch_.data() + (d - 1) * side;
  for (std::size_t out = 0; out < sums_.size();) {
    // Run the innermost axis to its end in one go.
    const cplx pre = prefix[d - 1];
    for (std::size_t k = digit[d - 1]; k < side && out < sums_.size(); ++k, ++out) sums_[out] += pre * last[k];
    if (out >= sums_.size()) break;
    digit[d - 1] = 0;
    std::size_t j = d - 1;
    while (j > 0) {
      --j;
      if (++digit[j] < side) break;
      digit[j] = 0;
    }
    for (std::size_t q = j; q < d - 1; ++q) prefix[q + 1] = prefix[q] * scratch_[q * side + digit[q]];
  }
  (void)i;
}

void CoefficientAccumulator::merge(const CoefficientAccumulator& other) {
  if (other.method_ != method_ || other.freqs_.size() != freqs_.size() || other.freqs_.dim() != freqs_.dim()) {
    throw ParameterError("cannot merge accumulators over different lattices");
  }
  count_ += other.count_;
  for (std::size_t k = 0; k < sums_.size(); ++k) sums_[k] += other.sums_[k];
  for (std::size_t k = 0; k < moments_.size(); ++k) moments_[k] += other.moments_[k];
}

std::vector<cplx> CoefficientAccumulator::mean() const {
  if (count_ == 0) throw DomainError("no samples accumulated");
  const double n = static_cast<double>(count_);
  std::vector<cplx> coeffs(freqs_.size());
  const std::size_t center = freqs_.center();
  if (method_ == Method::direct) {
    for (std::size_t k = 0; k < sums_.size(); ++k) {
      coeffs[center + k] = sums_[k] / n;
      coeffs[center - k] = std::conj(coeffs[center + k]);
    }
    coeffs[center] = 1.0;
    return coeffs;
  }
  const std::size_t g = grid_;
  const std::size_t half = g / 2 + 1;
  const auto t = static_cast<std::size_t>(freqs_.cutoff());
  std::vector<cplx> total(t + 1, 0.0);
  double* in = fftw_alloc_real(g);
  fftw_complex* out = fftw_alloc_complex(half);
  fftw_plan plan = nullptr;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(g), in, out, FFTW_ESTIMATE);
  }
  // Term k carries (-i pi xi / G)^k / k!.
  double factorial = 1.0;
  for (int k = 0; k < kMoments; ++k) {
    if (k > 0) factorial *= k;
    for (std::size_t j = 0; j < g; ++j) in[j] = moments_[j * kMoments + k];
    fftw_execute(plan);
    for (std::size_t xi = 0; xi <= t; ++xi) {
      const cplx f(out[xi][0], out[xi][1]);
      const cplx a(0.0, -kPi * static_cast<double>(xi) / static_cast<double>(g));
      total[xi] += std::pow(a, k) / factorial * f;
    }
  }
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  for (std::size_t xi = 0; xi <= t; ++xi) {
    // Node j sits at -1 + 2j/G, so the transform picks up exp(i pi xi).
    const cplx v = total[xi] * std::polar(1.0, kPi * static_cast<double>(xi)) / n;
    coeffs[center + xi] = v;
    coeffs[center - xi] = std::conj(v);
  }
  coeffs[center] = 1.0;
  return coeffs;
}

FourierHypothesis estimate_coefficients(const SampleSet& samples, const FrequencySet& freqs,
                                        CoefficientAccumulator::Method method) {
  if (samples.empty()) throw DomainError("coefficient estimation needs at least one sample");
  if (samples.dim() != freqs.dim()) throw DomainError("sample dimension does not match the lattice");
  CoefficientAccumulator acc(freqs, method);
  for (std::size_t i = 0; i < samples.size(); ++i) acc.add(samples[i]);
  return {freqs, acc.mean(), false};
}

std::vector<double> grid_values(const FourierHypothesis& h, std::size_t n) {
  const FrequencySet& fs = h.freqs();
  const std::size_t d = fs.dim();
  const std::int64_t t = fs.cutoff();
  if (n <= static_cast<std::size_t>(2 * t)) throw ParameterError("grid too coarse for the lattice");
  std::size_t total = 1;
  for (std::size_t j = 0; j < d; ++j) total *= n;
  fftw_complex* buf = fftw_alloc_complex(total);
  std::fill_n(reinterpret_cast<double*>(buf), 2 * total, 0.0);
  const double scale = std::ldexp(1.0, -static_cast<int>(d));
  std::vector<std::int64_t> xi(d);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    fs.frequency(i, xi);
    std::size_t pos = 0;
    std::int64_t sum = 0;
    for (std::size_t j = 0; j < d; ++j) {
      const auto m = static_cast<std::int64_t>(n);
      pos = pos * n + static_cast<std::size_t>(((xi[j] % m) + m) % m);
      sum += xi[j];
    }
    // exp(i pi xi (-1)) per axis collapses to (-1)^{sum xi}.
    const cplx v = h.coeffs()[i] * scale * ((sum & 1) != 0 ? -1.0 : 1.0);
    buf[pos][0] = v.real();
    buf[pos][1] = v.imag();
  }
  std::vector<int> dims(d, static_cast<int>(n));
  fftw_plan plan = nullptr;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft(static_cast<int>(d), dims.data(), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  std::vector<double> values(total);
  for (std::size_t k = 0; k < total; ++k) values[k] = buf[k][0];
  fftw_free(buf);
  return values;
}

double coefficient_l1_bound(const FourierHypothesis& h) {
  double s = 0.0;
  for (const auto& c : h.coeffs()) s += std::abs(c);
  return std::ldexp(s, -static_cast<int>(h.dim()));
}

double certified_sup(const FourierHypothesis& h, std::size_t max_grid_points) {
  const double cap = coefficient_l1_bound(h);
  const std::size_t d = h.dim();
  const double t = static_cast<double>(h.freqs().cutoff());
  const double factor = d == 1 ? 20.0 : 4.0 * static_cast<double>(d);
  const auto n = static_cast<std::size_t>(std::max({std::ceil(factor * kPi * t), 2.0 * t + 2.0, 64.0}));
  if (std::pow(static_cast<double>(n), static_cast<double>(d)) > static_cast<double>(max_grid_points)) return cap;
  const auto values = grid_values(h, n);
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  const double bound = m / (1.0 - kPi * t * static_cast<double>(d) / static_cast<double>(n));
  return std::min(bound, cap);
}

double parseval_norm(const FourierHypothesis& h) {
  double s = 0.0;
  for (const auto& c : h.coeffs()) s += std::norm(c);
  return std::ldexp(s, -static_cast<int>(h.dim()));
}

} // namespace shiftlearn
