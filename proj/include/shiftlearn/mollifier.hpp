#pragma once

#include <complex>
#include <cstdint>
#include <span>

#include "shiftlearn/random.hpp"

namespace shiftlearn::mollifier {

// b(x) = c0 exp(-x^2 / (1 - x^2)) on (-1, 1), zero elsewhere. The constant
// c0 is found by quadrature the first time it is needed.
double normalizer();

double eval_b(double x);

// Exact draw from b by rejection against the box [-1,1] x [0, c0].
double sample_b(Stream& stream);

// Product mollifier b_{d,gamma}(x) = gamma^{-d} prod_j b(x_j / gamma).
struct MollifierParams {
  std::size_t dim = 1;
  double gamma = 0.5;

  void validate() const;
};

void sample_b_dgamma(const MollifierParams& params, Stream& stream, std::span<double> out);
double eval_b_dgamma(const MollifierParams& params, std::span<const double> x);

// exp(-sqrt(gamma |xi|_inf)) (gamma |xi|_inf)^{-3/4}; xi must be nonzero.
double fourier_bound(std::span<const std::int64_t> xi, double gamma);

// int_{-1}^{1} b(x) exp(-i pi xi x) dx by adaptive quadrature.
std::complex<double> fourier_b_numeric(double xi);

} // namespace shiftlearn::mollifier
