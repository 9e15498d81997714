#include "shiftlearn/mollifier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "shiftlearn/errors.hpp"

namespace shiftlearn::mollifier {

namespace {

double bump(double x) {
  const double x2 = x * x;
  if (x2 >= 1.0) return 0.0;
  return std::exp(-x2 / (1.0 - x2));
}

// Panels keep each Gauss-Kronrod interval to about one oscillation.
double integrate_on_unit(const auto& f, double frequency) {
  using boost::math::quadrature::gauss_kronrod;
  const int panels = std::max(2, static_cast<int>(std::ceil(std::abs(frequency))) + 2);
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double a = static_cast<double>(k) / panels;
    const double b = static_cast<double>(k + 1) / panels;
    total += gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-14);
  }
  return total;
}

} // namespace

double normalizer() {
  static const double c0 = 1.0 / (2.0 * integrate_on_unit(bump, 0.0));
  return c0;
}

double eval_b(double x) { return normalizer() * bump(x); }

double sample_b(Stream& stream) {
  // Accept u when v <= exp(-y) with y = u^2/(1-u^2). The bounds
  // 1 - y <= exp(-y) <= 1/(1+y) settle most draws without calling exp.
  for (;;) {
    const double u = stream.uniform(-1.0, 1.0);
    const double v = stream.uniform();
    const double u2 = u * u;
    if (u2 >= 1.0) continue;
    const double y = u2 / (1.0 - u2);
    if (v <= 1.0 - y) return u;
    if (v * (1.0 + y) > 1.0) continue;
    if (v <= std::exp(-y)) return u;
  }
}

void MollifierParams::validate() const {
  if (dim < 1) throw ParameterError("mollifier dimension must be at least 1");
  if (!(gamma > 0.0 && gamma <= 0.5)) throw ParameterError("mollifier scale must satisfy 0 < gamma <= 1/2");
}

void sample_b_dgamma(const MollifierParams& params, Stream& stream, std::span<double> out) {
  for (std::size_t j = 0; j < params.dim; ++j) out[j] = params.gamma * sample_b(stream);
}

double eval_b_dgamma(const MollifierParams& params, std::span<const double> x) {
  double v = 1.0;
  for (std::size_t j = 0; j < params.dim; ++j) v *= eval_b(x[j] / params.gamma) / params.gamma;
  return v;
}

double fourier_bound(std::span<const std::int64_t> xi, double gamma) {
  std::int64_t norm = 0;
  for (auto v : xi) norm = std::max<std::int64_t>(norm, v < 0 ? -v : v);
  if (norm == 0) throw DomainError("mollifier Fourier bound is undefined at xi = 0");
  const double s = gamma * static_cast<double>(norm);
  return std::exp(-std::sqrt(s)) * std::pow(s, -0.75);
}

std::complex<double> fourier_b_numeric(double xi) {
  // b is real and even, so the transform is real: 2 int_0^1 b(x) cos(pi xi x) dx.
  const double c0 = normalizer();
  auto integrand = [&](double x) { return c0 * bump(x) * std::cos(std::numbers::pi * xi * x); };
  // Fixed panels, a few per half-period; the integrand is smooth, so a
  // 61-point rule per panel is far inside the 1e-9 absolute target.
  using boost::math::quadrature::gauss_kronrod;
  const int panels = 8 + 2 * static_cast<int>(std::ceil(std::abs(xi)));
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    total += gauss_kronrod<double, 61>::integrate(integrand, static_cast<double>(k) / panels,
                                                  static_cast<double>(k + 1) / panels, 0);
  }
  return {2.0 * total, 0.0};
}

} // namespace shiftlearn::mollifier
