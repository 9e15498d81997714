#include "shiftlearn/io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "shiftlearn/errors.hpp"

namespace shiftlearn {

namespace {

void write_array(std::ostream& out, std::span<const double> v) {
  out << '[';
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << format_double(v[i]);
  out << ']';
}

std::vector<double> doubles(const nlohmann::json& j) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(x.get<double>());
  return v;
}

std::vector<double> invert_matrix(const std::vector<double>& m, std::size_t d, double* abs_det) {
  Eigen::MatrixXd a(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < d; ++k) a(i, k) = m[i * d + k];
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw ParameterError("whitening matrix is singular");
  const Eigen::MatrixXd inv = lu.inverse();
  *abs_det = std::abs(lu.determinant());
  std::vector<double> out(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < d; ++k) out[i * d + k] = inv(i, k);
  }
  return out;
}

} // namespace

std::string format_double(double x) {
  if (!std::isfinite(x)) throw DomainError("cannot serialize a non-finite value");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double HypothesisRecord::density(std::span<const double> x, bool normalize) const {
  double v = 0.0;
  if (frame) {
    v = PulledBackHypothesis(h, *frame, whitening).density(x);
  } else {
    for (double c : x) {
      if (!(c >= -1.0 && c <= 1.0)) return 0.0;
    }
    v = h.evaluate_unchecked(x);
  }
  return normalize && mass ? v / *mass : v;
}

HypothesisRecord record_of(const FourierHypothesis& h) { return {h, std::nullopt, std::nullopt, std::nullopt, std::nullopt}; }

HypothesisRecord record_of(const CandidateHypothesis& c) {
  return {c.h.conditioned(), c.h.frame(), c.h.whitening(), c.mass, c.h_max};
}

void write_hypothesis_json(std::ostream& out, const HypothesisRecord& rec) {
  const auto& fs = rec.h.freqs();
  const std::size_t d = fs.dim();
  out << "{\"version\":1,\"d\":" << d << ",\"T\":" << fs.cutoff() << ",\"clip\":" << (rec.h.clip() ? "true" : "false");
  if (rec.frame) {
    out << ",\"frame\":{\"mu\":";
    write_array(out, rec.frame->mu);
    out << ",\"t\":" << format_double(rec.frame->t) << '}';
  }
  if (rec.whitening) {
    out << ",\"whitening\":{\"mean\":";
    write_array(out, rec.whitening->mean);
    out << ",\"matrix\":";
    write_array(out, rec.whitening->matrix);
    out << '}';
  }
  if (rec.mass) out << ",\"mass\":" << format_double(*rec.mass);
  if (rec.h_max) out << ",\"h_max\":" << format_double(*rec.h_max);
  out << ",\"coeffs\":[";
  const auto& c = rec.h.coeffs();
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto xi = fs.frequency(i);
    out << (i ? ",\n" : "\n") << "{\"xi\":[";
    for (std::size_t k = 0; k < d; ++k) out << (k ? "," : "") << xi[k];
    out << "],\"re\":" << format_double(c[i].real()) << ",\"im\":" << format_double(c[i].imag()) << '}';
  }
  out << "\n]}\n";
}

std::string hypothesis_json(const HypothesisRecord& rec) {
  std::ostringstream s;
  write_hypothesis_json(s, rec);
  return s.str();
}

HypothesisRecord read_hypothesis_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("hypothesis file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("version").get<int>() != 1) throw ParameterError("unsupported hypothesis version");
    const auto d = j.at("d").get<std::size_t>();
    const auto T = j.at("T").get<std::int64_t>();
    const FrequencySet fs(d, T);
    const auto& cj = j.at("coeffs");
    if (cj.size() != fs.size()) throw ParameterError("hypothesis has the wrong number of coefficients");
    std::vector<std::complex<double>> coeffs(fs.size());
    for (std::size_t i = 0; i < fs.size(); ++i) {
      const auto xi = cj[i].at("xi").get<std::vector<long long>>();
      const auto want = fs.frequency(i);
      if (xi.size() != d) throw ParameterError("frequency of the wrong dimension");
      for (std::size_t k = 0; k < d; ++k) {
        if (xi[k] != static_cast<long long>(want[k])) throw ParameterError("coefficients are not in lattice order");
      }
      coeffs[i] = {cj[i].at("re").get<double>(), cj[i].at("im").get<double>()};
    }
    HypothesisRecord rec;
    rec.h = FourierHypothesis(fs, std::move(coeffs), j.at("clip").get<bool>());
    if (j.contains("frame")) {
      rec.frame = AffineFrame{doubles(j["frame"].at("mu")), j["frame"].at("t").get<double>()};
      rec.frame->validate();
      if (rec.frame->dim() != d) throw ParameterError("frame dimension mismatch");
    }
    if (j.contains("whitening")) {
      Whitening w;
      w.mean = doubles(j["whitening"].at("mean"));
      w.matrix = doubles(j["whitening"].at("matrix"));
      if (w.mean.size() != d || w.matrix.size() != d * d) throw ParameterError("whitening dimension mismatch");
      w.inverse = invert_matrix(w.matrix, d, &w.abs_det);
      rec.whitening = std::move(w);
      if (!rec.frame) throw ParameterError("whitening without a frame");
    }
    if (j.contains("mass")) rec.mass = j["mass"].get<double>();
    if (j.contains("h_max")) rec.h_max = j["h_max"].get<double>();
    return rec;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed hypothesis file: ") + e.what());
  }
}

} // namespace shiftlearn
