#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "shiftlearn/fourier.hpp"
#include "shiftlearn/select.hpp"
#include "shiftlearn/transform.hpp"

namespace shiftlearn {

// A serialized hypothesis. Without a frame the density lives on [-1,1]^d.
struct HypothesisRecord {
  FourierHypothesis h;
  std::optional<AffineFrame> frame;
  std::optional<Whitening> whitening;
  std::optional<double> mass;   // estimated normalizer Zhat
  std::optional<double> h_max;

  // h(x), divided by the mass when normalize is set and a mass is present.
  [[nodiscard]] double density(std::span<const double> x, bool normalize = true) const;
};

HypothesisRecord record_of(const FourierHypothesis& h);
HypothesisRecord record_of(const CandidateHypothesis& c);

// {"version":1,"d","T","clip","frame"?,"whitening"?,"mass"?,"h_max"?,"coeffs":[{"xi","re","im"}]}
// Coefficients in lattice order, doubles with 17 significant digits.
void write_hypothesis_json(std::ostream& out, const HypothesisRecord& rec);
std::string hypothesis_json(const HypothesisRecord& rec);
// Throws ParameterError on malformed input.
HypothesisRecord read_hypothesis_json(std::istream& in);

// "%.17g"; throws DomainError for non-finite values.
std::string format_double(double x);

} // namespace shiftlearn
