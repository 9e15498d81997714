#include "shiftlearn/tail.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "shiftlearn/errors.hpp"

namespace shiftlearn {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ParameterError(std::string(what) + " must be positive and finite");
  }
}

// int_a^b 2u (p + q u) du for one linear piece.
double linear_piece_moment(double a, double b, double ga, double gb) {
  if (b <= a) return 0.0;
  const double q = (gb - ga) / (b - a);
  const double p = ga - q * a;
  return p * (b * b - a * a) + (2.0 / 3.0) * q * (b * b * b - a * a * a);
}

} // namespace

TailBound TailBound::exponential(double beta) {
  require_positive(beta, "exponential tail scale");
  TailBound tb;
  tb.kind_ = Kind::exponential;
  tb.scale_ = beta;
  return tb;
}

TailBound TailBound::gaussian(double beta) {
  require_positive(beta, "gaussian tail scale");
  TailBound tb;
  tb.kind_ = Kind::gaussian;
  tb.scale_ = beta;
  return tb;
}

TailBound TailBound::bounded(double radius) {
  require_positive(radius, "support radius");
  TailBound tb;
  tb.kind_ = Kind::bounded;
  tb.scale_ = radius;
  return tb;
}

TailBound TailBound::table(std::vector<double> t, std::vector<double> g) {
  if (t.size() < 2 || t.size() != g.size()) {
    throw ParameterError("tail table needs at least two (t, g) pairs of equal length");
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0) || !std::isfinite(t[i])) throw ParameterError("tail table abscissae must be positive");
    if (!(g[i] >= 0.0 && g[i] <= 1.0)) throw ParameterError("tail table values must lie in [0,1]");
    if (i > 0 && !(t[i] > t[i - 1])) throw ParameterError("tail table abscissae must increase");
    if (i > 0 && g[i] > g[i - 1]) throw ParameterError("tail table values must be nonincreasing");
  }
  TailBound tb;
  tb.kind_ = Kind::table;
  tb.scale_ = t.back();
  tb.t_ = std::move(t);
  tb.g_ = std::move(g);
  return tb;
}

TailBound TailBound::tabulate(const std::function<double(double)>& g, double t_min, double t_max,
                              std::size_t n) {
  require_positive(t_min, "table start");
  if (!(t_max > t_min) || n < 2) throw ParameterError("table grid needs t_max > t_min and n >= 2");
  std::vector<double> ts(n);
  std::vector<double> gs(n);
  const double ratio = std::log(t_max / t_min) / static_cast<double>(n - 1);
  double running = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    ts[i] = t_min * std::exp(ratio * static_cast<double>(i));
    running = std::min(running, std::clamp(g(ts[i]), 0.0, 1.0));
    gs[i] = running;
  }
  ts.back() = t_max;
  return table(std::move(ts), std::move(gs));
}

double TailBound::raw(double t) const {
  if (t < 0.0) return 1.0;
  switch (kind_) {
  case Kind::exponential:
    return std::min(1.0, std::exp(1.0 - t / scale_));
  case Kind::gaussian:
    return std::exp(-(t / scale_) * (t / scale_));
  case Kind::bounded:
    return t < scale_ ? 1.0 : 0.0;
  case Kind::table: {
    if (t < t_.front()) return 1.0;
    if (t > t_.back()) return 0.0;
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    if (it == t_.end()) return g_.back();
    const std::size_t hi = static_cast<std::size_t>(it - t_.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - t_[lo]) / (t_[hi] - t_[lo]);
    return g_[lo] + w * (g_[hi] - g_[lo]);
  }
  }
  return 0.0;
}

double TailBound::operator()(double t) const {
  const double v = raw(t);
  if (floor_ && t < kTailFloorRadius) return 1.0;
  return v;
}

std::string TailBound::describe() const {
  std::ostringstream os;
  switch (kind_) {
  case Kind::exponential: os << "exponential(beta=" << scale_ << ")"; break;
  case Kind::gaussian: os << "gaussian(beta=" << scale_ << ")"; break;
  case Kind::bounded: os << "bounded(R=" << scale_ << ")"; break;
  case Kind::table: os << "table(" << t_.size() << " nodes up to t=" << scale_ << ")"; break;
  }
  if (floor_) os << "+floor";
  return os.str();
}

double tail_inverse(const TailBound& tail, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("tail_inverse needs 0 < eps < 1");
  double t = 0.0;
  switch (tail.kind()) {
  case TailBound::Kind::exponential:
    t = tail.scale() * (1.0 - std::log(eps));
    break;
  case TailBound::Kind::gaussian:
    t = tail.scale() * std::sqrt(-std::log(eps));
    break;
  case TailBound::Kind::bounded:
    t = tail.scale();
    break;
  case TailBound::Kind::table: {
    const double last = tail.t_.back();
    if (tail.raw(last) > eps) {
      t = last;
      break;
    }
    double lo = 0.0;
    double hi = last;
    while (hi - lo > 1e-10) {
      const double mid = 0.5 * (lo + hi);
      if (tail.raw(mid) <= eps) hi = mid;
      else lo = mid;
    }
    t = hi;
    break;
  }
  }
  if (tail.floor_enforced()) t = std::max(t, kTailFloorRadius);
  return std::max(t, 0.0);
}

double tail_integral(const TailBound& tail) {
  const double b = tail.scale();
  double integral = 0.0;
  switch (tail.kind()) {
  case TailBound::Kind::exponential:
    // beta^2 from the flat part plus 2e beta^2 int_1^inf s e^{-s} ds = 4 beta^2.
    integral = 5.0 * b * b;
    break;
  case TailBound::Kind::gaussian:
    integral = b * b;
    break;
  case TailBound::Kind::bounded:
    integral = b * b;
    break;
  case TailBound::Kind::table: {
    const auto& ts = tail.grid();
    const auto& gs = tail.values();
    const double t_last = ts.back();
    if (gs.back() > 0.0) {
      const double probe = t_last / 10.0;
      const double far = t_last * t_last * gs.back();
      const double near = probe * probe * tail(probe);
      if (probe >= ts.front() && far >= 0.5 * near) {
        throw DomainError("tail integral diverges: g decays no faster than 1/t^2 on the table tail");
      }
    }
    // g = 1 left of the grid, then exact integration of each linear piece.
    const double start = tail.floor_enforced() ? std::max(ts.front(), kTailFloorRadius) : ts.front();
    integral = start * start;
    for (std::size_t i = 1; i < ts.size(); ++i) {
      double a = ts[i - 1];
      const double c = ts[i];
      if (c <= start) continue;
      double ga = gs[i - 1];
      if (a < start) {
        ga = gs[i - 1] + (start - a) / (c - a) * (gs[i] - gs[i - 1]);
        a = start;
      }
      integral += linear_piece_moment(a, c, ga, gs[i]);
    }
    return integral;
  }
  }
  if (tail.floor_enforced()) {
    // g* = 1 on [0, 1/100] in z; add the part of the floor that lies above g.
    const double z_floor = kTailFloorRadius * kTailFloorRadius;
    auto gap = [&](double z) { return 1.0 - tail.raw(std::sqrt(z)); };
    if (tail.kind() == TailBound::Kind::bounded) {
      integral += b < kTailFloorRadius ? z_floor - b * b : 0.0;
    } else {
      integral += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(gap, 0.0, z_floor, 15, 1e-12);
    }
  }
  return integral;
}

TailBound enforce_tail_floor(const TailBound& tail) {
  TailBound out = tail;
  out.floor_ = true;
  return out;
}

bool satisfies_tail_floor(const TailBound& tail) {
  return tail_inverse(tail, 0.5) >= kTailFloorRadius - 1e-9;
}

} // namespace shiftlearn
