#include "shiftlearn/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace shiftlearn {

void check_point(std::span<const double> x) {
  if (x.empty()) throw DomainError("point has no coordinates");
  for (double v : x) {
    if (!std::isfinite(v)) throw DomainError("point has a non-finite coordinate");
  }
}

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

SampleSet::SampleSet(std::size_t dim, std::vector<double> data, std::string provenance)
    : dim_(dim), data_(std::move(data)), provenance_(std::move(provenance)) {
  if (dim_ == 0) throw ParameterError("sample dimension must be at least 1");
  if (data_.size() % dim_ != 0) throw ParameterError("sample buffer is not a whole number of points");
  for (double v : data_) {
    if (!std::isfinite(v)) throw DomainError("sample has a non-finite coordinate");
  }
}

void SampleSet::push_back(std::span<const double> x) {
  check_point(x);
  if (dim_ == 0) dim_ = x.size();
  if (x.size() != dim_) throw ParameterError("point dimension differs from sample set dimension");
  data_.insert(data_.end(), x.begin(), x.end());
}

SampleSet read_samples_csv(std::istream& in) {
  std::string line;
  std::size_t dim = 0;
  std::vector<double> data;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ++row;
    if (row == 1 && (line.front() == 'x' || line.front() == 'X')) {
      dim = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',') + 1);
      continue;
    }
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw ParameterError("sample CSV row " + std::to_string(row) + " has a non-numeric cell");
      }
      if (cell.find_first_not_of(" \t", used) != std::string::npos) {
        throw ParameterError("sample CSV row " + std::to_string(row) + " has trailing characters");
      }
      values.push_back(v);
    }
    if (dim == 0) dim = values.size();
    if (values.size() != dim) {
      throw ParameterError("sample CSV row " + std::to_string(row) + " has the wrong number of columns");
    }
    data.insert(data.end(), values.begin(), values.end());
  }
  if (dim == 0 || data.empty()) throw ParameterError("sample CSV contains no points");
  return SampleSet(dim, std::move(data), "csv");
}

void write_samples_csv(std::ostream& out, const SampleSet& samples) {
  for (std::size_t j = 0; j < samples.dim(); ++j) out << (j ? ",x" : "x") << j + 1;
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto x = samples[i];
    for (std::size_t j = 0; j < x.size(); ++j) out << (j ? "," : "") << x[j];
    out << '\n';
  }
}

ReplaySampler::ReplaySampler(SampleSet samples) : samples_(std::move(samples)) {
  if (samples_.empty()) throw ParameterError("replay sampler needs a nonempty sample set");
}

std::uint64_t ReplaySampler::draw(Stream& stream, std::span<double> out) const {
  const auto x = samples_[stream.below(samples_.size())];
  std::copy(x.begin(), x.end(), out.begin());
  return 1;
}

SampleSet draw_samples(const Sampler& sampler, std::size_t n, Stream stream, std::uint64_t* source_draws) {
  const std::size_t d = sampler.dim();
  std::vector<double> data(n * d);
  std::uint64_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    used += sampler.draw(stream, std::span<double>(data.data() + i * d, d));
  }
  if (source_draws) *source_draws += used;
  return SampleSet(d, std::move(data), "stream:" + std::to_string(stream.key()));
}

void ClassParams::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) throw ParameterError("shift-invariance constant c must be positive");
  if (dim < 1) throw ParameterError("dimension must be at least 1");
}

std::size_t default_workers() {
  if (const char* env = std::getenv("SHIFTLEARN_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  workers = std::clamp<std::size_t>(workers, 1, n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_index = n;
  std::exception_ptr failure;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::jthread> threads;
  threads.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) threads.emplace_back(work);
  work();
  threads.clear();
  if (failure) std::rethrow_exception(failure);
}

} // namespace shiftlearn
