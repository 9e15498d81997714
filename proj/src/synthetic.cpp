#include "shiftlearn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace shiftlearn {

namespace {

constexpr double kPi = std::numbers::pi;

double param(const std::map<std::string, double>& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

std::vector<double> diagonal(std::size_t d, double v) {
  std::vector<double> m(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) m[i * d + i] = v;
  return m;
}

Box cube(std::size_t d, double lo, double hi) { return {Point(d, lo), Point(d, hi)}; }

void require_dim(const std::string& name, std::size_t dim, std::initializer_list<std::size_t> allowed) {
  if (std::find(allowed.begin(), allowed.end(), dim) == allowed.end()) {
    throw ParameterError(name + " is not available in dimension " + std::to_string(dim));
  }
}

GroundTruth uniform_ball(std::size_t d, double r) {
  require_dim("uniform-ball", d, {1, 2});
  if (!(r > 0.0)) throw ParameterError("radius must be positive");
  GroundTruth g;
  g.dim = d;
  g.params = {{"radius", r}};
  g.mean = Point(d, 0.0);
  g.support = cube(d, -r, r);
  g.declared.dim = d;
  g.declared.tail = TailBound::bounded(r);
  if (d == 1) {
    g.sample = [r](Stream& s, std::span<double> out) { out[0] = s.uniform(-r, r); };
    g.pdf = [r](std::span<const double> x) { return std::abs(x[0]) < r ? 0.5 / r : 0.0; };
    g.covariance = {r * r / 3.0};
    g.declared.c = 1.0 / r;
  } else {
    const double area = kPi * r * r;
    g.sample = [r](Stream& s, std::span<double> out) {
      do {
        out[0] = s.uniform(-r, r);
        out[1] = s.uniform(-r, r);
      } while (out[0] * out[0] + out[1] * out[1] >= r * r);
    };
    g.pdf = [r, area](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1] < r * r ? 1.0 / area : 0.0; };
    g.covariance = diagonal(2, r * r / 4.0);
    // Shift by kappa moves a lens of area ~ 2 r kappa; both sides count.
    g.declared.c = 1.3 / r;
  }
  return g;
}

GroundTruth uniform_box(std::size_t d, double lo, double hi) {
  if (!(hi > lo)) throw ParameterError("uniform-box needs hi > lo");
  GroundTruth g;
  g.dim = d;
  g.params = {{"lo", lo}, {"hi", hi}};
  const double w = hi - lo;
  const double density = std::pow(w, -static_cast<double>(d));
  g.sample = [d, lo, hi](Stream& s, std::span<double> out) {
    for (std::size_t j = 0; j < d; ++j) out[j] = s.uniform(lo, hi);
  };
  g.pdf = [d, lo, hi, density](std::span<const double> x) {
    for (std::size_t j = 0; j < d; ++j) {
      if (!(x[j] >= lo && x[j] < hi)) return 0.0;
    }
    return density;
  };
  g.mean = Point(d, (lo + hi) / 2.0);
  g.covariance = diagonal(d, w * w / 12.0);
  g.support = cube(d, lo, hi);
  g.declared = {2.0 * std::sqrt(static_cast<double>(d)) / w, d,
                TailBound::bounded(std::sqrt(static_cast<double>(d)) * w / 2.0)};
  return g;
}

GroundTruth gaussian(std::size_t d, double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("sigma must be positive");
  GroundTruth g;
  g.dim = d;
  g.params = {{"sigma", sigma}};
  g.sample = [d, sigma](Stream& s, std::span<double> out) {
    for (std::size_t j = 0; j < d; ++j) out[j] = sigma * s.normal();
  };
  const double norm = std::pow(2.0 * kPi * sigma * sigma, -0.5 * static_cast<double>(d));
  g.pdf = [d, sigma, norm](std::span<const double> x) {
    double r2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) r2 += x[j] * x[j];
    return norm * std::exp(-r2 / (2.0 * sigma * sigma));
  };
  g.mean = Point(d, 0.0);
  g.covariance = diagonal(d, sigma * sigma);
  g.support = cube(d, -7.0 * sigma, 7.0 * sigma);
  // int |phi(x + k) - phi(x)| <= k sqrt(2/pi) / sigma along any unit direction.
  const double beta = d == 1 ? 0.6 * sigma : 0.75 * sigma * std::sqrt(static_cast<double>(d) / 2.0);
  g.declared = {0.798 / sigma, d, TailBound::exponential(beta)};
  return g;
}

GroundTruth gaussian_aniso(std::size_t d) {
  require_dim("gaussian-aniso", d, {2});
  GroundTruth g;
  g.dim = 2;
  g.sample = [](Stream& s, std::span<double> out) {
    out[0] = 2.0 * s.normal();
    out[1] = s.normal();
  };
  g.pdf = [](std::span<const double> x) {
    return std::exp(-(x[0] * x[0] / 8.0 + x[1] * x[1] / 2.0)) / (2.0 * kPi * 2.0);
  };
  g.mean = {0.0, 0.0};
  g.covariance = {4.0, 0.0, 0.0, 1.0};
  g.support = {{-14.0, -7.0}, {14.0, 7.0}};
  g.declared = {0.8, 2, TailBound::exponential(1.5)};
  return g;
}

GroundTruth laplace(std::size_t d, double b) {
  require_dim("laplace", d, {1});
  if (!(b > 0.0)) throw ParameterError("scale must be positive");
  GroundTruth g;
  g.dim = 1;
  g.params = {{"scale", b}};
  g.sample = [b](Stream& s, std::span<double> out) {
    const double e = b * s.exponential();
    out[0] = s.uniform() < 0.5 ? -e : e;
  };
  g.pdf = [b](std::span<const double> x) { return std::exp(-std::abs(x[0]) / b) / (2.0 * b); };
  g.mean = {0.0};
  g.covariance = {2.0 * b * b};
  g.support = cube(1, -25.0 * b, 25.0 * b);
  g.declared = {1.0 / b, 1, TailBound::exponential(b)};
  return g;
}

GroundTruth laplace_truncated(std::size_t d, double b, double cut) {
  require_dim("laplace-truncated", d, {1});
  if (!(b > 0.0 && cut > 0.0)) throw ParameterError("scale and cut must be positive");
  GroundTruth g;
  g.dim = 1;
  g.params = {{"scale", b}, {"cut", cut}};
  const double mass = 1.0 - std::exp(-cut / b);
  g.sample = [b, cut](Stream& s, std::span<double> out) {
    double e = 0.0;
    do {
      e = b * s.exponential();
    } while (e >= cut);
    out[0] = s.uniform() < 0.5 ? -e : e;
  };
  g.pdf = [b, cut, mass](std::span<const double> x) {
    return std::abs(x[0]) < cut ? std::exp(-std::abs(x[0]) / b) / (2.0 * b * mass) : 0.0;
  };
  g.mean = {0.0};
  const double m2 = (2.0 * b * b - std::exp(-cut / b) * (cut * cut + 2.0 * b * cut + 2.0 * b * b)) / mass;
  g.covariance = {m2};
  g.support = cube(1, -cut, cut);
  // Total variation of the pdf: 2 max f, the jumps at +-cut included.
  g.declared = {1.05 / b, 1, TailBound::exponential(b)};
  return g;
}

GroundTruth exponential_centered(std::size_t d) {
  GroundTruth g;
  g.dim = d;
  g.sample = [d](Stream& s, std::span<double> out) {
    for (std::size_t j = 0; j < d; ++j) out[j] = s.exponential() - 1.0;
  };
  g.pdf = [d](std::span<const double> x) {
    double sum = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (x[j] < -1.0) return 0.0;
      sum += x[j] + 1.0;
    }
    return std::exp(-sum);
  };
  g.mean = Point(d, 0.0);
  g.covariance = diagonal(d, 1.0);
  g.support = cube(d, -1.0, 19.0);
  g.declared = {2.0 * std::sqrt(static_cast<double>(d)), d, TailBound::exponential(static_cast<double>(d))};
  return g;
}

GroundTruth truncated_gaussian(std::size_t d, double sigma, double cut) {
  require_dim("truncated-gaussian", d, {1});
  if (!(sigma > 0.0 && cut > 0.0)) throw ParameterError("sigma and cut must be positive");
  GroundTruth g;
  g.dim = 1;
  g.params = {{"sigma", sigma}, {"cut", cut}};
  const double mass = std::erf(cut / (sigma * std::sqrt(2.0)));
  g.sample = [sigma, cut](Stream& s, std::span<double> out) {
    do {
      out[0] = sigma * s.normal();
    } while (std::abs(out[0]) >= cut);
  };
  g.pdf = [sigma, cut, mass](std::span<const double> x) {
    if (std::abs(x[0]) >= cut) return 0.0;
    return std::exp(-x[0] * x[0] / (2.0 * sigma * sigma)) / (sigma * std::sqrt(2.0 * kPi) * mass);
  };
  g.mean = {0.0};
  const double a = cut / sigma;
  const double phi = std::exp(-a * a / 2.0) / std::sqrt(2.0 * kPi);
  g.covariance = {sigma * sigma * (1.0 - 2.0 * a * phi / mass)};
  g.support = cube(1, -cut, cut);
  g.declared = {0.8 / (sigma * mass), 1, TailBound::bounded(cut)};
  return g;
}

} // namespace

double Box::volume() const {
  double v = 1.0;
  for (std::size_t j = 0; j < lo.size(); ++j) v *= hi[j] - lo[j];
  return v;
}

Box Box::padded(double r) const {
  Box b = *this;
  for (std::size_t j = 0; j < lo.size(); ++j) {
    b.lo[j] -= r;
    b.hi[j] += r;
  }
  return b;
}

Box Box::hull(const Box& other) const {
  Box b = *this;
  for (std::size_t j = 0; j < lo.size(); ++j) {
    b.lo[j] = std::min(lo[j], other.lo[j]);
    b.hi[j] = std::max(hi[j], other.hi[j]);
  }
  return b;
}

FunctionSampler GroundTruth::sampler() const { return FunctionSampler(dim, sample); }

GroundTruth make_ground_truth(const std::string& name, std::size_t dim, const std::map<std::string, double>& p) {
  if (dim < 1) throw ParameterError("dimension must be at least 1");
  GroundTruth g;
  if (name == "uniform-ball") {
    g = uniform_ball(dim, param(p, "radius", 0.5));
  } else if (name == "uniform-box") {
    g = uniform_box(dim, param(p, "lo", 0.0), param(p, "hi", 1.0));
  } else if (name == "gaussian") {
    g = gaussian(dim, param(p, "sigma", 1.0));
  } else if (name == "gaussian-aniso") {
    g = gaussian_aniso(dim);
  } else if (name == "laplace") {
    g = laplace(dim, param(p, "scale", 1.0));
  } else if (name == "laplace-truncated") {
    g = laplace_truncated(dim, param(p, "scale", 1.0), param(p, "cut", 5.0));
  } else if (name == "exponential-centered") {
    g = exponential_centered(dim);
  } else if (name == "truncated-gaussian") {
    g = truncated_gaussian(dim, param(p, "sigma", 0.1), param(p, "cut", 0.5));
  } else {
    throw ParameterError("unknown distribution '" + name + "'");
  }
  g.name = name;
  for (const auto& [k, v] : p) {
    if (!g.params.contains(k)) throw ParameterError("distribution '" + name + "' has no parameter '" + k + "'");
  }
  return g;
}

std::vector<std::string> ground_truth_names() {
  return {"uniform-ball", "uniform-box",      "gaussian",           "gaussian-aniso",
          "laplace",      "laplace-truncated", "exponential-centered", "truncated-gaussian"};
}

std::vector<GroundTruth> zoo() {
  return {
      make_ground_truth("uniform-ball", 1),
      make_ground_truth("uniform-ball", 2),
      make_ground_truth("gaussian", 1, {{"sigma", 0.1}}),
      make_ground_truth("gaussian", 1, {{"sigma", 1.0}}),
      make_ground_truth("gaussian", 2, {{"sigma", 0.1}}),
      make_ground_truth("gaussian", 2, {{"sigma", 1.0}}),
      make_ground_truth("gaussian-aniso", 2),
      make_ground_truth("laplace", 1),
      make_ground_truth("laplace-truncated", 1),
      make_ground_truth("exponential-centered", 1),
      make_ground_truth("exponential-centered", 2),
      make_ground_truth("truncated-gaussian", 1),
  };
}

GroundTruth contaminate(const GroundTruth& f, const GroundTruth& noise, double eps) {
  if (f.dim != noise.dim) throw ParameterError("contamination needs matching dimensions");
  if (!(eps >= 0.0 && eps <= 1.0)) throw ParameterError("contamination level must lie in [0, 1]");
  GroundTruth g;
  g.name = f.name + "+" + noise.name;
  g.dim = f.dim;
  g.params = {{"eps", eps}};
  g.sample = [fs = f.sample, ns = noise.sample, eps](Stream& s, std::span<double> out) {
    if (s.uniform() < eps) {
      ns(s, out);
    } else {
      fs(s, out);
    }
  };
  if (f.has_pdf() && noise.has_pdf()) {
    g.pdf = [fp = f.pdf, np = noise.pdf, eps](std::span<const double> x) {
      return (1.0 - eps) * fp(x) + eps * np(x);
    };
  }
  const std::size_t d = f.dim;
  g.mean.resize(d);
  for (std::size_t j = 0; j < d; ++j) g.mean[j] = (1.0 - eps) * f.mean[j] + eps * noise.mean[j];
  g.covariance.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double second = (1.0 - eps) * (f.covariance[i * d + j] + f.mean[i] * f.mean[j]) +
                            eps * (noise.covariance[i * d + j] + noise.mean[i] * noise.mean[j]);
      g.covariance[i * d + j] = second - g.mean[i] * g.mean[j];
    }
  }
  g.declared = f.declared;
  g.declared.c = (1.0 - eps) * f.declared.c + eps * noise.declared.c;
  g.support = f.support.hull(noise.support);
  return g;
}

void for_each_grid_point(const Box& box, std::size_t n, const std::function<void(std::span<const double>)>& fn) {
  const std::size_t d = box.dim();
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> x(d), step(d);
  for (std::size_t j = 0; j < d; ++j) step[j] = (box.hi[j] - box.lo[j]) / static_cast<double>(n);
  for (;;) {
    for (std::size_t j = 0; j < d; ++j) x[j] = box.lo[j] + (static_cast<double>(idx[j]) + 0.5) * step[j];
    fn(x);
    std::size_t j = d;
    while (j > 0) {
      --j;
      if (++idx[j] < n) break;
      idx[j] = 0;
      if (j == 0) return;
    }
  }
}

namespace {

std::size_t default_points(std::size_t d) {
  switch (d) {
    case 1: return 65536;
    case 2: return 1024;
    case 3: return 128;
    default: throw ParameterError("grid quadrature supports d <= 3");
  }
}

} // namespace

namespace {

double si_on_grid(const GroundTruth& f, std::span<const double> v, double kappa, std::size_t n) {
  const Box box = f.support.padded(kappa);
  const double cell = box.volume() / std::pow(static_cast<double>(n), static_cast<double>(f.dim));
  constexpr int kShifts = 32;
  std::vector<double> shifted(f.dim);
  double best = 0.0;
  for (int k = 1; k < kShifts; ++k) {
    const double s = kappa * static_cast<double>(k) / (kShifts - 1);
    double total = 0.0;
    for_each_grid_point(box, n, [&](std::span<const double> x) {
      for (std::size_t j = 0; j < f.dim; ++j) shifted[j] = x[j] + s * v[j];
      total += std::abs(f.pdf(shifted) - f.pdf(x));
    });
    best = std::max(best, total * cell);
  }
  return best / kappa;
}

} // namespace

SiEstimate estimate_si(const GroundTruth& f, std::span<const double> v, double kappa, std::size_t points_per_axis) {
  if (!f.has_pdf()) throw UnsupportedDensity("shift-invariance needs a pdf for '" + f.name + "'");
  if (v.size() != f.dim) throw DomainError("direction has the wrong dimension");
  if (std::abs(norm2(v) - 1.0) > 1e-9) throw DomainError("direction must be a unit vector");
  if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
  const std::size_t n = points_per_axis == 0 ? default_points(f.dim) : points_per_axis;
  SiEstimate out;
  out.value = si_on_grid(f, v, kappa, n);
  out.tolerance = std::abs(out.value - si_on_grid(f, v, kappa, n / 2));
  return out;
}

TvEstimate estimate_tv(const DensityFn& a, const DensityFn& b, const Box& box, const TvOptions& opts) {
  const std::size_t d = box.dim();
  TvEstimate out;
  if (opts.mode == TvMode::grid) {
    const std::size_t n = opts.points_per_axis == 0 ? default_points(d) : opts.points_per_axis;
    const double cell = box.volume() / std::pow(static_cast<double>(n), static_cast<double>(d));
    double tv = 0.0, ma = 0.0, mb = 0.0;
    for_each_grid_point(box, n, [&](std::span<const double> x) {
      const double va = a(x), vb = b(x);
      tv += std::abs(va - vb);
      ma += va;
      mb += vb;
    });
    out.value = tv * cell;
    out.mass_a = ma * cell;
    out.mass_b = mb * cell;
  } else {
    Stream s(opts.seed);
    std::vector<double> x(d);
    double sum = 0.0, sum2 = 0.0, ma = 0.0, mb = 0.0;
    const double vol = box.volume();
    for (std::size_t i = 0; i < opts.samples; ++i) {
      for (std::size_t j = 0; j < d; ++j) x[j] = s.uniform(box.lo[j], box.hi[j]);
      const double va = a(x), vb = b(x);
      const double v = std::abs(va - vb) * vol;
      sum += v;
      sum2 += v * v;
      ma += va;
      mb += vb;
    }
    const double n = static_cast<double>(opts.samples);
    out.value = sum / n;
    out.std_error = std::sqrt(std::max(0.0, sum2 / n - out.value * out.value) / n);
    out.mass_a = ma * vol / n;
    out.mass_b = mb * vol / n;
  }
  const double slack = 1e-3 + 3.0 * out.std_error;
  if (opts.check_a && 1.0 - out.mass_a > slack) {
    throw CoverageError("box misses " + std::to_string(1.0 - out.mass_a) + " of the first density's mass");
  }
  if (opts.check_b && 1.0 - out.mass_b > slack) {
    throw CoverageError("box misses " + std::to_string(1.0 - out.mass_b) + " of the second density's mass");
  }
  return out;
}

} // namespace shiftlearn
