#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "shiftlearn/errors.hpp"
#include "shiftlearn/random.hpp"
#include "shiftlearn/tail.hpp"

namespace shiftlearn {

using Point = std::vector<double>;

// Throws DomainError unless every coordinate is finite and the point is nonempty.
void check_point(std::span<const double> x);

double norm2(std::span<const double> x);

// Scratch space for one point without a heap allocation in the common case.
class PointBuffer {
public:
  explicit PointBuffer(std::size_t d) : d_(d) {
    if (d > kInline) heap_.resize(d);
  }
  std::span<double> span() { return {d_ > kInline ? heap_.data() : inline_, d_}; }

private:
  static constexpr std::size_t kInline = 8;
  std::size_t d_;
  double inline_[kInline] = {};
  std::vector<double> heap_;
};

// Points stored row-major; all rows share one dimension.
class SampleSet {
public:
  SampleSet() = default;
  SampleSet(std::size_t dim, std::vector<double> data, std::string provenance = {});

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t size() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
  [[nodiscard]] bool empty() const noexcept { return size() == 0; }
  [[nodiscard]] std::span<const double> operator[](std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  [[nodiscard]] const std::vector<double>& data() const noexcept { return data_; }
  [[nodiscard]] const std::string& provenance() const noexcept { return provenance_; }

  void push_back(std::span<const double> x);

private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
  std::string provenance_;
};

// CSV: one point per row, optional header x1,...,xd.
SampleSet read_samples_csv(std::istream& in);
void write_samples_csv(std::ostream& out, const SampleSet& samples);

// A source of i.i.d. draws. draw() writes one point and returns how many
// draws it consumed from the underlying data source (more than one when the
// sampler rejects), which is what sample-budget accounting reports.
class Sampler {
public:
  virtual ~Sampler() = default;
  [[nodiscard]] virtual std::size_t dim() const = 0;
  virtual std::uint64_t draw(Stream& stream, std::span<double> out) const = 0;
};

class FunctionSampler final : public Sampler {
public:
  using DrawFn = std::function<void(Stream&, std::span<double>)>;
  FunctionSampler(std::size_t dim, DrawFn fn) : dim_(dim), fn_(std::move(fn)) {}
  [[nodiscard]] std::size_t dim() const override { return dim_; }
  std::uint64_t draw(Stream& stream, std::span<double> out) const override {
    fn_(stream, out);
    return 1;
  }

private:
  std::size_t dim_;
  DrawFn fn_;
};

// Replays a fixed sample set cyclically. Used to feed file-based data to learners.
class ReplaySampler final : public Sampler {
public:
  explicit ReplaySampler(SampleSet samples);
  [[nodiscard]] std::size_t dim() const override { return samples_.dim(); }
  std::uint64_t draw(Stream& stream, std::span<double> out) const override;

private:
  SampleSet samples_;
};

SampleSet draw_samples(const Sampler& sampler, std::size_t n, Stream stream,
                       std::uint64_t* source_draws = nullptr);

// Distribution class C_SI(c, d, g).
struct ClassParams {
  double c = 1.0;
  std::size_t dim = 1;
  TailBound tail = TailBound::exponential(1.0);

  void validate() const;
};

using DensityFn = std::function<double(std::span<const double>)>;

// Worker count from SHIFTLEARN_WORKERS, defaulting to hardware concurrency.
std::size_t default_workers();

// Runs fn(i) for i in [0, n) on up to `workers` threads. Exceptions are
// collected and the one from the lowest index is rethrown.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

} // namespace shiftlearn
