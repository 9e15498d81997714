#pragma once

#include <functional>
#include <string>
#include <vector>

namespace shiftlearn {

// Nonincreasing tail function g with Pr[|x - mu| > t] <= g(t).
//
//   exponential(beta): g(t) = min(1, exp(1 - t/beta))
//   gaussian(beta):    g(t) = exp(-(t/beta)^2)
//   bounded(R):        g(t) = 1 for t < R, 0 afterwards
//   table:             piecewise linear through (t_i, g_i) on a log-spaced
//                      grid, 1 left of the grid and 0 right of it
//
// A floor-enforced bound evaluates to max(g(t), 1[t < 1/10]).
class TailBound {
public:
  enum class Kind { exponential, gaussian, bounded, table };

  static TailBound exponential(double beta);
  static TailBound gaussian(double beta);
  static TailBound bounded(double radius);
  static TailBound table(std::vector<double> t, std::vector<double> g);
  // Samples g at n log-spaced points of [t_min, t_max].
  static TailBound tabulate(const std::function<double(double)>& g, double t_min, double t_max,
                            std::size_t n);

  double operator()(double t) const;

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] double scale() const noexcept { return scale_; }
  [[nodiscard]] bool floor_enforced() const noexcept { return floor_; }
  [[nodiscard]] const std::vector<double>& grid() const noexcept { return t_; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return g_; }

  [[nodiscard]] std::string describe() const;

private:
  friend TailBound enforce_tail_floor(const TailBound& tail);

  double raw(double t) const;

  Kind kind_ = Kind::exponential;
  double scale_ = 1.0;
  bool floor_ = false;
  std::vector<double> t_;
  std::vector<double> g_;

  friend double tail_inverse(const TailBound& tail, double eps);
  friend double tail_integral(const TailBound& tail);
};

inline constexpr double kTailFloorRadius = 0.1;

// inf{t : g(t) <= eps}; closed form for analytic kinds, bisection (1e-9) for tables.
double tail_inverse(const TailBound& tail, double eps);

// I_g = int_0^inf g(sqrt(z)) dz.
double tail_integral(const TailBound& tail);

// Pointwise max with the step 1[t < 1/10]; idempotent.
TailBound enforce_tail_floor(const TailBound& tail);

// min{r : g(r) <= 1/2} >= 1/10.
bool satisfies_tail_floor(const TailBound& tail);

} // namespace shiftlearn
