#include "shiftlearn/lowerbound.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <string>

#include <json.hpp>

#include "shiftlearn/errors.hpp"

namespace shiftlearn {

namespace {

std::uint64_t ipow(std::uint64_t b, std::size_t e) {
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < e; ++i) {
    if (r > std::numeric_limits<std::uint64_t>::max() / b) throw ResourceError("checkerboard lattice too large");
    r *= b;
  }
  return r;
}

void check_compatible(const CheckerboardDensity& u, const CheckerboardDensity& v) {
  if (u.dim() != v.dim() || u.T() != v.T() || u.normalizer() != v.normalizer()) {
    throw ParameterError("checkerboard densities differ in d, T or Z");
  }
}

// Cell masses over the support; the hypothesis is sampled at cell-aligned midpoints.
double cell_grid_error(const DensityFn& h, const CheckerboardDensity& f, std::size_t k) {
  const std::size_t d = f.dim();
  const double T = static_cast<double>(f.T());
  Box box{Point(d, -T), Point(d, T)};
  const std::size_t n = static_cast<std::size_t>(2 * f.T()) * k;
  double sum = 0.0;
  for_each_grid_point(box, n, [&](std::span<const double> x) { sum += std::abs(h(x) - f.eval(x)); });
  return sum * std::pow(1.0 / static_cast<double>(k), static_cast<double>(d));
}

} // namespace

CheckerboardDensity::CheckerboardDensity(std::size_t dim, std::uint64_t T, std::vector<std::uint8_t> code)
    : dim_(dim), T_(T), code_(std::move(code)) {
  if (dim == 0 || T == 0) throw ParameterError("checkerboard needs d >= 1 and T >= 1");
  if (code_.size() != ipow(2 * T, dim)) throw ParameterError("codeword length must be (2T)^d");
  cumulative_.resize(code_.size());
  std::uint64_t acc = 0;
  for (std::size_t a = 0; a < code_.size(); ++a) {
    if (code_[a] > 1) throw ParameterError("codeword entries must be 0 or 1");
    weight_ += code_[a];
    acc += T_ + code_[a];
    cumulative_[a] = acc;
  }
  z_ = acc;
}

std::size_t CheckerboardDensity::cell_of(std::span<const double> x) const {
  if (x.size() != dim_) throw ParameterError("point dimension mismatch");
  const double t = static_cast<double>(T_);
  std::size_t idx = 0;
  for (std::size_t i = 0; i < dim_; ++i) {
    if (!(x[i] >= -t && x[i] < t)) return cells();
    const auto c = static_cast<std::size_t>(std::floor(x[i] + t));
    idx = idx * static_cast<std::size_t>(2 * T_) + std::min<std::size_t>(c, 2 * T_ - 1);
  }
  return idx;
}

double CheckerboardDensity::cell_value(std::size_t a) const {
  return static_cast<double>(T_ + code_.at(a)) / static_cast<double>(z_);
}

double CheckerboardDensity::eval(std::span<const double> x) const {
  const std::size_t a = cell_of(x);
  return a == cells() ? 0.0 : cell_value(a);
}

void CheckerboardDensity::sample(Stream& stream, std::span<double> out) const {
  const std::uint64_t r = stream.below(z_);
  std::size_t a = static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), r) -
                                           cumulative_.begin());
  const std::size_t side = 2 * T_;
  for (std::size_t i = dim_; i-- > 0;) {
    const std::size_t c = a % side;
    a /= side;
    out[i] = static_cast<double>(c) - static_cast<double>(T_) + stream.uniform();
  }
}

GroundTruth CheckerboardDensity::ground_truth() const {
  GroundTruth g;
  g.name = "checkerboard";
  g.dim = dim_;
  g.params = {{"T", static_cast<double>(T_)}};
  auto self = std::make_shared<CheckerboardDensity>(*this);
  g.sample = [self](Stream& s, std::span<double> x) { self->sample(s, x); };
  g.pdf = [self](std::span<const double> x) { return self->eval(x); };
  const double t = static_cast<double>(T_);
  g.support = {Point(dim_, -t), Point(dim_, t)};
  g.mean.assign(dim_, 0.0);
  g.covariance.assign(dim_ * dim_, 0.0);
  // Moments by cell sums: a cell [c, c+1) contributes mass p, mean c + 1/2, second moment c^2 + c + 1/3.
  const std::size_t side = 2 * T_;
  std::vector<double> second(dim_ * dim_, 0.0);
  for (std::size_t a = 0; a < cells(); ++a) {
    const double p = cell_value(a);
    std::vector<double> lo(dim_);
    std::size_t rest = a;
    for (std::size_t i = dim_; i-- > 0;) {
      lo[i] = static_cast<double>(rest % side) - t;
      rest /= side;
    }
    for (std::size_t i = 0; i < dim_; ++i) {
      g.mean[i] += p * (lo[i] + 0.5);
      for (std::size_t j = 0; j < dim_; ++j) {
        second[i * dim_ + j] += i == j ? p * (lo[i] * lo[i] + lo[i] + 1.0 / 3.0) : p * (lo[i] + 0.5) * (lo[j] + 0.5);
      }
    }
  }
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j < dim_; ++j) g.covariance[i * dim_ + j] = second[i * dim_ + j] - g.mean[i] * g.mean[j];
  }
  const double d = static_cast<double>(dim_);
  g.declared = {4.0 * std::sqrt(d), dim_, TailBound::bounded(t * std::sqrt(d) + norm2(g.mean))};
  return g;
}

std::uint64_t checkerboard_T(double eps, double C) {
  if (!(eps > 0.0) || !(C > 0.0)) throw ParameterError("checkerboard needs eps > 0 and C > 0");
  // The small slack keeps 1/0.1 at 10.
  return static_cast<std::uint64_t>(std::max(1.0, std::ceil(C / eps - 1e-9)));
}

bool family_size_within_bound(std::size_t cells, std::size_t n) {
  return std::log2(static_cast<double>(n)) <= static_cast<double>(cells) / 8.0;
}

std::vector<CheckerboardDensity> build_family(double eps, std::size_t dim, std::size_t n, Stream stream, double C) {
  if (n == 0) throw ParameterError("family size must be positive");
  const std::uint64_t T = checkerboard_T(eps, C);
  const std::size_t cells = ipow(2 * T, dim);
  // Distance threshold |A|/4, compared as 4 * distance >= |A|.
  std::vector<CheckerboardDensity> family;
  std::vector<std::uint8_t> code(cells, 0);
  std::fill(code.begin(), code.begin() + static_cast<std::ptrdiff_t>(cells / 2), 1);
  const std::uint64_t budget = 10000ull * n;
  for (std::uint64_t draws = 0; family.size() < n; ++draws) {
    if (draws >= budget) {
      throw ResourceError("could not find " + std::to_string(n) + " codewords at distance |A|/4 after " +
                          std::to_string(budget) + " draws");
    }
    for (std::size_t i = cells; i > 1; --i) std::swap(code[i - 1], code[stream.below(i)]);
    bool ok = true;
    for (const auto& f : family) {
      std::size_t h = 0;
      for (std::size_t a = 0; a < cells; ++a) h += f.code()[a] != code[a];
      if (4 * h < cells) {
        ok = false;
        break;
      }
    }
    if (ok) family.emplace_back(dim, T, code);
  }
  return family;
}

std::size_t hamming(const CheckerboardDensity& u, const CheckerboardDensity& v) {
  if (u.cells() != v.cells()) throw ParameterError("codeword lengths differ");
  std::size_t h = 0;
  for (std::size_t a = 0; a < u.cells(); ++a) h += u.code()[a] != v.code()[a];
  return h;
}

ExactRatio exact_tv(const CheckerboardDensity& u, const CheckerboardDensity& v) {
  check_compatible(u, v);
  return {hamming(u, v), u.normalizer()};
}

double exact_kl(const CheckerboardDensity& u, const CheckerboardDensity& v) {
  check_compatible(u, v);
  std::size_t n10 = 0;
  std::size_t n01 = 0;
  for (std::size_t a = 0; a < u.cells(); ++a) {
    n10 += u.code()[a] == 1 && v.code()[a] == 0;
    n01 += u.code()[a] == 0 && v.code()[a] == 1;
  }
  const double T = static_cast<double>(u.T());
  const double Z = static_cast<double>(u.normalizer());
  const double up = std::log1p(1.0 / T);  // ln((T+1)/T)
  return static_cast<double>(n10) * (T + 1.0) / Z * up - static_cast<double>(n01) * T / Z * up;
}

void write_family_json(std::ostream& out, const std::vector<CheckerboardDensity>& family) {
  if (family.empty()) throw ParameterError("empty family");
  nlohmann::ordered_json j;
  j["d"] = family.front().dim();
  j["T"] = family.front().T();
  auto codes = nlohmann::ordered_json::array();
  for (const auto& f : family) {
    std::string s(f.cells(), '0');
    for (std::size_t a = 0; a < f.cells(); ++a) s[a] = f.code()[a] ? '1' : '0';
    codes.push_back(s);
  }
  j["codewords"] = codes;
  out << j.dump(2) << '\n';
}

std::vector<CheckerboardDensity> read_family_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("family file is not valid JSON: ") + e.what());
  }
  std::vector<CheckerboardDensity> family;
  try {
    const auto d = j.at("d").get<std::size_t>();
    const auto T = j.at("T").get<std::uint64_t>();
    for (const auto& c : j.at("codewords")) {
      const auto s = c.get<std::string>();
      std::vector<std::uint8_t> code(s.size());
      for (std::size_t a = 0; a < s.size(); ++a) {
        if (s[a] != '0' && s[a] != '1') throw ParameterError("codewords must be bitstrings");
        code[a] = s[a] == '1';
      }
      family.emplace_back(d, T, std::move(code));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed family file: ") + e.what());
  }
  return family;
}

void write_pairs_csv(std::ostream& out, const std::vector<CheckerboardDensity>& family) {
  out << "i,j,tv,kl\n";
  out.precision(17);
  for (std::size_t i = 0; i < family.size(); ++i) {
    for (std::size_t j = i + 1; j < family.size(); ++j) {
      out << i << ',' << j << ',' << exact_tv(family[i], family[j]).value() << ',' << exact_kl(family[i], family[j])
          << '\n';
    }
  }
}

DensityFn histogram_learner(const SampleSet& samples, const std::vector<CheckerboardDensity>& family) {
  if (family.empty()) throw ParameterError("empty family");
  auto ref = std::make_shared<CheckerboardDensity>(family.front());
  auto mass = std::make_shared<std::vector<double>>(ref->cells() + 1, 0.0);
  const double w = samples.empty() ? 0.0 : 1.0 / static_cast<double>(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) (*mass)[ref->cell_of(samples[k])] += w;
  return [ref, mass](std::span<const double> x) {
    const std::size_t a = ref->cell_of(x);
    return a == ref->cells() ? 0.0 : (*mass)[a];
  };
}

DensityFn mle_learner(const SampleSet& samples, const std::vector<CheckerboardDensity>& family) {
  if (family.empty()) throw ParameterError("empty family");
  std::vector<std::size_t> counts(family.front().cells() + 1, 0);
  for (std::size_t k = 0; k < samples.size(); ++k) ++counts[family.front().cell_of(samples[k])];
  std::size_t best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < family.size(); ++i) {
    double ll = 0.0;
    for (std::size_t a = 0; a < family[i].cells(); ++a) {
      if (counts[a] > 0) ll += static_cast<double>(counts[a]) * std::log(family[i].cell_value(a));
    }
    if (ll > best_ll) {
      best_ll = ll;
      best = i;
    }
  }
  auto f = std::make_shared<CheckerboardDensity>(family[best]);
  return [f](std::span<const double> x) { return f->eval(x); };
}

std::vector<FanoRow> fano_experiment(const std::vector<CheckerboardDensity>& family, const FanoLearner& learner,
                                     const std::vector<std::size_t>& m_values, std::size_t trials, Stream stream,
                                     std::size_t points_per_cell) {
  if (family.empty() || trials == 0 || points_per_cell == 0) throw ParameterError("bad Fano experiment setup");
  std::vector<FanoRow> rows;
  for (std::size_t r = 0; r < m_values.size(); ++r) {
    const std::size_t m = m_values[r];
    Stream sr = stream.split(r);
    double sum = 0.0;
    double sum2 = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      Stream st = sr.split(t);
      const auto& f = family[st.below(family.size())];
      std::vector<double> data(m * f.dim());
      for (std::size_t k = 0; k < m; ++k) f.sample(st, std::span<double>(data.data() + k * f.dim(), f.dim()));
      const DensityFn h = learner(SampleSet(f.dim(), std::move(data)), family);
      const double e = cell_grid_error(h, f, points_per_cell);
      sum += e;
      sum2 += e * e;
    }
    const double n = static_cast<double>(trials);
    const double mean = sum / n;
    const double var = trials > 1 ? std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0)) : 0.0;
    rows.push_back({m, mean, std::sqrt(var / n), trials});
  }
  return rows;
}

void write_fano_csv(std::ostream& out, const std::vector<FanoRow>& rows) {
  out << "m,mean_error,std_error,trials\n";
  out.precision(17);
  for (const auto& r : rows) out << r.m << ',' << r.mean_error << ',' << r.std_error << ',' << r.trials << '\n';
}

} // namespace shiftlearn
