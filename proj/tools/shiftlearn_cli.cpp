// Command-line front end. Every run writes one manifest JSON next to its
// outputs. Exit codes: 0 success, 1 run failure, 2 usage error.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "shiftlearn/errors.hpp"
#include "shiftlearn/io.hpp"
#include "shiftlearn/learn_bounded.hpp"
#include "shiftlearn/logconcave.hpp"
#include "shiftlearn/lowerbound.hpp"
#include "shiftlearn/pipeline.hpp"
#include "shiftlearn/synthetic.hpp"

#ifndef SHIFTLEARN_VERSION
#define SHIFTLEARN_VERSION "0.0.0"
#endif

using namespace shiftlearn;
using json = nlohmann::ordered_json;

namespace {

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct DistOptions {
  std::string name;
  std::vector<std::string> params;
  std::string noise;
  std::vector<std::string> noise_params;
  double noise_eps = 0.0;
  std::string samples;
  std::string tail;
  double c = 0.0;
};

struct Target {
  std::optional<GroundTruth> truth;
  std::unique_ptr<Sampler> sampler;
  ClassParams declared;
};

struct RunContext {
  std::string subcommand;
  json config = json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t total_samples = 0;
  json result = json::object();
};

std::map<std::string, double> parse_params(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("parameter '" + item + "' is not key=value");
    try {
      std::size_t used = 0;
      const double v = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(item);
      out[item.substr(0, eq)] = v;
    } catch (const std::logic_error&) {
      throw UsageError("parameter '" + item + "' has no numeric value");
    }
  }
  return out;
}

TailBound parse_tail(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw UsageError("tail must look like kind:scale");
  const std::string kind = spec.substr(0, colon);
  double scale = 0.0;
  try {
    scale = std::stod(spec.substr(colon + 1));
  } catch (const std::logic_error&) {
    throw UsageError("tail scale is not a number");
  }
  if (kind == "exponential") return TailBound::exponential(scale);
  if (kind == "gaussian") return TailBound::gaussian(scale);
  if (kind == "bounded") return TailBound::bounded(scale);
  throw UsageError("unknown tail kind '" + kind + "'");
}

GroundTruth load_truth(const std::string& name, std::size_t dim, const std::vector<std::string>& params,
                       RunContext& ctx) {
  if (name.size() > 5 && name.substr(name.size() - 5) == ".json") {
    std::ifstream in(name);
    if (!in) throw UsageError("cannot open " + name);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(name + ": " + e.what());
    }
    ctx.inputs.push_back(name);
    std::map<std::string, double> p;
    for (const auto& [k, v] : j.items()) {
      if (k != "name" && k != "d") p[k] = v.get<double>();
    }
    if (j.contains("d") && j["d"].get<std::size_t>() != dim) throw UsageError(name + ": dimension differs from --dim");
    return make_ground_truth(j.at("name").get<std::string>(), dim, p);
  }
  return make_ground_truth(name, dim, parse_params(params));
}

Target make_target(const DistOptions& o, std::size_t dim, RunContext& ctx) {
  Target t;
  if (!o.samples.empty()) {
    std::ifstream in(o.samples);
    if (!in) throw UsageError("cannot open " + o.samples);
    auto set = read_samples_csv(in);
    if (set.dim() != dim) throw UsageError("sample file dimension differs from --dim");
    ctx.inputs.push_back(o.samples);
    t.sampler = std::make_unique<ReplaySampler>(std::move(set));
    if (!o.name.empty()) t.truth = load_truth(o.name, dim, o.params, ctx);
  } else {
    if (o.name.empty()) throw UsageError("--dist or --samples is required");
    GroundTruth g = load_truth(o.name, dim, o.params, ctx);
    if (!o.noise.empty()) g = contaminate(g, load_truth(o.noise, dim, o.noise_params, ctx), o.noise_eps);
    t.sampler = std::make_unique<FunctionSampler>(g.sampler());
    t.truth = std::move(g);
  }
  if (t.truth) {
    t.declared = t.truth->declared;
  } else {
    t.declared.dim = dim;
  }
  if (!o.tail.empty()) t.declared.tail = parse_tail(o.tail);
  if (o.c > 0.0) t.declared.c = o.c;
  if (!t.truth && (o.tail.empty() || o.c <= 0.0)) {
    throw UsageError("sample files need --c and --tail unless --dist names the class");
  }
  return t;
}

void add_dist_options(CLI::App* app, DistOptions& o, bool with_class) {
  app->add_option("--dist", o.name, "registry name or a JSON spec file {name, d, params...}");
  app->add_option("--param", o.params, "distribution parameter key=value (repeatable)");
  app->add_option("--noise", o.noise, "contaminating distribution");
  app->add_option("--noise-param", o.noise_params, "noise parameter key=value (repeatable)");
  app->add_option("--noise-eps", o.noise_eps, "contamination fraction")->check(CLI::Range(0.0, 1.0));
  app->add_option("--samples", o.samples, "CSV sample file replayed as the oracle");
  if (with_class) {
    app->add_option("--tail", o.tail, "tail bound override, kind:scale with kind exponential|gaussian|bounded");
    app->add_option("--c", o.c, "shift-invariance constant override")->check(CLI::NonNegativeNumber);
  }
}

json config_of(const CLI::App* app) {
  json j = json::object();
  for (const CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_name();
    if (name == "--help" || name.empty()) continue;
    const auto& res = opt->results();
    if (opt->get_expected_max() > 1 || opt->get_items_expected_max() > 1) {
      j[name] = res;
    } else if (opt->get_type_size() == 0) {
      j[name] = opt->count() > 0;
    } else if (!res.empty()) {
      j[name] = res.back();
    } else {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

json frame_json(const AffineFrame& f) { return {{"mu", f.mu}, {"t", f.t}}; }

json whitening_json(const Whitening& w) { return {{"mean", w.mean}, {"matrix", w.matrix}, {"abs_det", w.abs_det}}; }

json selection_json(const SelectionReport& r) {
  json pairs = json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"i", p.i}, {"j", p.j}, {"p_i", p.p_i}, {"p_j", p.p_j}, {"tau", p.tau},
                     {"outcome", outcome_name(p.outcome)}});
  }
  return {{"m", r.m}, {"target_draws", r.target_draws}, {"non_losses", r.non_losses}, {"pairs", pairs}};
}

json candidates_json(const CandidateSet& set) {
  json out = json::array();
  for (const auto& f : set.frames) {
    out.push_back({{"frame", frame_json(f.frame)},
                   {"feasible", f.feasible},
                   {"mass", f.mass},
                   {"h_max", f.h_max},
                   {"acceptance", f.acceptance},
                   {"samples_used", f.samples_used},
                   {"seconds", f.seconds},
                   {"note", f.note}});
  }
  return out;
}

json derived_json(const DerivedParameters& d) {
  return {{"gamma", d.gamma}, {"T", d.T}, {"eta", d.eta}, {"S", d.S}, {"low_size", d.low_size}};
}

void write_text(const std::string& path, const std::string& text, RunContext& ctx) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
  if (!out) throw Error("write to " + path + " failed");
  ctx.outputs.push_back(path);
}

void write_json(const std::string& path, const json& j, RunContext& ctx) { write_text(path, j.dump(2) + "\n", ctx); }

Box hypothesis_box(const HypothesisRecord& rec) {
  const std::size_t d = rec.h.dim();
  if (!rec.frame) return {Point(d, -1.0), Point(d, 1.0)};
  const PulledBackHypothesis p(rec.h, *rec.frame, rec.whitening);
  Box box{Point(d, std::numeric_limits<double>::infinity()), Point(d, -std::numeric_limits<double>::infinity())};
  std::vector<double> y(d), x(d);
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    for (std::size_t i = 0; i < d; ++i) y[i] = (mask >> i) & 1 ? 1.0 : -1.0;
    p.from_conditioned(y, x);
    for (std::size_t i = 0; i < d; ++i) {
      box.lo[i] = std::min(box.lo[i], x[i]);
      box.hi[i] = std::max(box.hi[i], x[i]);
    }
  }
  return box;
}

// ---- subcommands ----

struct LearnBoundedOpts {
  std::size_t dim = 1;
  double eps = 0.3;
  double kappa = 0.0;
  double delta = 0.1;
  double c_T = 1.0;
  double c_S = 1.0;
  double low_cap = kDefaultLowCap;
  std::string method = "auto";
  std::uint64_t seed = 1;
  std::string out;
  std::string report;
  DistOptions dist;
};

CoefficientAccumulator::Method parse_method(const std::string& m) {
  if (m == "auto") return CoefficientAccumulator::Method::automatic;
  if (m == "direct") return CoefficientAccumulator::Method::direct;
  if (m == "gridded") return CoefficientAccumulator::Method::gridded;
  throw UsageError("method must be auto, direct or gridded");
}

const char* method_name(CoefficientAccumulator::Method m) {
  switch (m) {
    case CoefficientAccumulator::Method::automatic: return "auto";
    case CoefficientAccumulator::Method::direct: return "direct";
    case CoefficientAccumulator::Method::gridded: return "gridded";
  }
  return "?";
}

void run_learn_bounded(const LearnBoundedOpts& o, RunContext& ctx) {
  const Target t = make_target(o.dist, o.dim, ctx);
  const double kappa = o.kappa > 0.0 ? o.kappa : default_kappa(o.eps, t.declared);
  const BoundedLearnerParams p{o.dim, o.eps, kappa, o.delta, o.c_T, o.c_S, static_cast<std::size_t>(o.low_cap)};
  p.validate();
  LearnReport rep;
  const auto h = learn_bounded(*t.sampler, p, Stream(o.seed), &rep, default_workers(), parse_method(o.method));
  write_text(o.out, hypothesis_json(record_of(h)), ctx);
  ctx.total_samples = rep.source_draws;
  ctx.result = {{"kappa", kappa},
                {"derived", derived_json(rep.params)},
                {"samples", rep.samples},
                {"source_draws", rep.source_draws},
                {"method", method_name(rep.method)},
                {"seconds", rep.seconds}};
  if (!o.report.empty()) write_json(o.report, ctx.result, ctx);
}

struct LearnOpts {
  std::size_t dim = 1;
  double eps = 0.15;
  double delta = 0.1;
  std::size_t candidates = 0;
  bool full_schedule = false;
  double schedule_constant = PipelineConfig{}.schedule_constant;
  double kappa = 0.0;
  double mass_eps = 0.0;
  double c_T = 1.0;
  double c_S = 1.0;
  double draw_factor = 6.0;
  double sample_constant = 48.0;
  std::uint64_t seed = 1;
  std::string out;
  std::string report;
  DistOptions dist;
};

PipelineConfig pipeline_config(const LearnOpts& o, const ClassParams& cls) {
  PipelineConfig cfg;
  cfg.cls = cls;
  cfg.eps = o.eps;
  cfg.delta = o.delta;
  cfg.candidates = o.candidates;
  cfg.desk_mode = !o.full_schedule;
  cfg.schedule_constant = o.schedule_constant;
  cfg.kappa = o.kappa;
  cfg.mass_eps = o.mass_eps;
  cfg.c_T = o.c_T;
  cfg.c_S = o.c_S;
  cfg.selection = {o.draw_factor, o.sample_constant};
  cfg.validate();
  return cfg;
}

void run_learn(const LearnOpts& o, RunContext& ctx) {
  const Target t = make_target(o.dist, o.dim, ctx);
  const PipelineConfig cfg = pipeline_config(o, t.declared);
  const auto r = learn(*t.sampler, cfg, Stream(o.seed));
  write_text(o.out, hypothesis_json(record_of(r.hypothesis)), ctx);
  ctx.total_samples = r.total_samples;
  ctx.result = {{"class", {{"c", cfg.cls.c}, {"tail", cfg.cls.tail.describe()}}},
                {"kappa", r.candidates.kappa},
                {"learner", derived_json(r.candidates.learner)},
                {"candidates", candidates_json(r.candidates)},
                {"winner", r.winner},
                {"selection", selection_json(r.selection)},
                {"total_samples", r.total_samples},
                {"wall_seconds", r.seconds}};
  if (!o.report.empty()) write_json(o.report, ctx.result, ctx);
}

struct LogConcaveOpts {
  LearnOpts base;
  std::size_t attempts = 0;
  double c_base = 2.0;
  double tail_scale = 2.0;
  double c_r = 50.0;
};

void run_logconcave(const LogConcaveOpts& o, RunContext& ctx) {
  const Target t = make_target(o.base.dist, o.base.dim, ctx);
  LogConcaveConfig cfg;
  cfg.eps = o.base.eps;
  cfg.delta = o.base.delta;
  cfg.attempts = o.attempts;
  cfg.c_base = o.c_base;
  cfg.tail_scale = o.tail_scale;
  cfg.c_r = o.c_r;
  cfg.pipeline = pipeline_config(o.base, logconcave_class(o.base.dim));
  const auto started = std::chrono::steady_clock::now();
  const auto r = learn_logconcave(*t.sampler, o.base.dim, cfg, Stream(o.base.seed));
  write_text(o.base.out, hypothesis_json(record_of(r.hypothesis)), ctx);
  ctx.total_samples = r.total_samples;
  json attempts = json::array();
  for (const auto& a : r.attempts) {
    json j = {{"ok", a.ok}, {"note", a.note}, {"samples", a.samples}, {"winner", a.winner}};
    if (a.ok) j["whitening"] = whitening_json(a.covariance.whitening);
    attempts.push_back(j);
  }
  const auto cls = logconcave_class(o.base.dim, cfg);
  ctx.result = {{"class", {{"c", cls.c}, {"tail", cls.tail.describe()}}},
                {"attempts", attempts},
                {"winner", r.winner},
                {"selection", selection_json(r.selection)},
                {"total_samples", r.total_samples},
                {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count()}};
  if (!o.base.report.empty()) write_json(o.base.report, ctx.result, ctx);
}

struct LowerBoundOpts {
  std::size_t dim = 1;
  double eps = 0.1;
  std::size_t n = 16;
  double C = 1.0;
  std::uint64_t seed = 1;
  std::string family;
  std::string report;
  std::string fano;
  std::string learner = "histogram";
  std::vector<std::size_t> m_values{1, 10, 100, 1000, 10000};
  std::size_t trials = 50;
};

void run_lowerbound(const LowerBoundOpts& o, RunContext& ctx) {
  const auto fam = build_family(o.eps, o.dim, o.n, Stream(o.seed).split(0), o.C);
  double min_tv = std::numeric_limits<double>::infinity();
  double max_kl = 0.0;
  for (std::size_t i = 0; i < fam.size(); ++i) {
    for (std::size_t j = i + 1; j < fam.size(); ++j) {
      min_tv = std::min(min_tv, exact_tv(fam[i], fam[j]).value());
      max_kl = std::max(max_kl, exact_kl(fam[i], fam[j]));
    }
  }
  if (!o.family.empty()) {
    std::ostringstream s;
    write_family_json(s, fam);
    write_text(o.family, s.str(), ctx);
  }
  if (!o.report.empty()) {
    std::ostringstream s;
    write_pairs_csv(s, fam);
    write_text(o.report, s.str(), ctx);
  }
  ctx.result = {{"T", fam.front().T()},
                {"cells", fam.front().cells()},
                {"Z", fam.front().normalizer()},
                {"members", fam.size()},
                {"size_within_bound", family_size_within_bound(fam.front().cells(), fam.size())},
                {"min_pair_tv", fam.size() > 1 ? json(min_tv) : json(nullptr)},
                {"max_pair_kl", max_kl}};
  if (!o.fano.empty()) {
    FanoLearner learner;
    if (o.learner == "histogram") {
      learner = histogram_learner;
    } else if (o.learner == "mle") {
      learner = mle_learner;
    } else {
      throw UsageError("learner must be histogram or mle");
    }
    const auto rows = fano_experiment(fam, learner, o.m_values, o.trials, Stream(o.seed).split(1));
    std::ostringstream s;
    write_fano_csv(s, rows);
    write_text(o.fano, s.str(), ctx);
    for (const auto& r : rows) ctx.total_samples += r.m * r.trials;
  }
  if (!family_size_within_bound(fam.front().cells(), fam.size())) {
    std::cerr << "note: N = " << fam.size() << " exceeds 2^{|A|/8} for |A| = " << fam.front().cells() << '\n';
  }
  std::cout << "members " << fam.size() << ", T " << fam.front().T() << ", Z " << fam.front().normalizer()
            << ", min pair tv " << format_double(fam.size() > 1 ? min_tv : 0.0) << ", max pair kl "
            << format_double(max_kl) << '\n';
}

struct EvalTvOpts {
  std::string hyp;
  std::size_t dim = 0;
  std::size_t grid = 0;
  std::size_t mc = 0;
  bool raw = false;
  std::uint64_t seed = 1;
  std::string report;
  DistOptions dist;
};

void run_eval_tv(const EvalTvOpts& o, RunContext& ctx) {
  std::ifstream in(o.hyp);
  if (!in) throw UsageError("cannot open " + o.hyp);
  const HypothesisRecord rec = read_hypothesis_json(in);
  ctx.inputs.push_back(o.hyp);
  const std::size_t d = rec.h.dim();
  if (o.dim != 0 && o.dim != d) throw UsageError("--dim differs from the hypothesis dimension");
  if (!o.dist.samples.empty()) throw UsageError("eval-tv needs a distribution with a density");
  const GroundTruth g = [&] {
    GroundTruth base = load_truth(o.dist.name, d, o.dist.params, ctx);
    if (o.dist.noise.empty()) return base;
    return contaminate(base, load_truth(o.dist.noise, d, o.dist.noise_params, ctx), o.dist.noise_eps);
  }();
  if (!g.has_pdf()) throw UsageError(g.name + " has no density");
  TvOptions opts;
  opts.points_per_axis = o.grid;
  opts.check_a = false;
  if (o.mc > 0) {
    opts.mode = TvMode::montecarlo;
    opts.samples = o.mc;
    opts.seed = o.seed;
  }
  const bool normalize = !o.raw;
  const Box box = hypothesis_box(rec).hull(g.support);
  const auto tv = estimate_tv([&](std::span<const double> x) { return rec.density(x, normalize); }, g.pdf, box, opts);
  std::cout << format_double(tv.value) << '\n';
  ctx.result = {{"tv", tv.value},
                {"std_error", tv.std_error},
                {"hypothesis_mass_in_box", tv.mass_a},
                {"target_mass_in_box", tv.mass_b},
                {"box", {{"lo", box.lo}, {"hi", box.hi}}}};
  if (!o.report.empty()) write_json(o.report, ctx.result, ctx);
}

struct ZooOpts {
  std::size_t dim = 0;
  bool si = false;
  std::string out;
};

void run_zoo(const ZooOpts& o, RunContext& ctx) {
  json members = json::array();
  for (const auto& g : zoo()) {
    if (o.dim != 0 && g.dim != o.dim) continue;
    json j = {{"name", g.name},
              {"d", g.dim},
              {"params", g.params},
              {"c", g.declared.c},
              {"tail", g.declared.tail.describe()},
              {"I_g", tail_integral(g.declared.tail)},
              {"mean", g.mean},
              {"support", {{"lo", g.support.lo}, {"hi", g.support.hi}}}};
    if (o.si && g.has_pdf()) {
      json si = json::object();
      std::vector<double> v(g.dim, 0.0);
      v[0] = 1.0;
      for (double kappa : {0.01, 0.05, 0.1, 0.5}) {
        const auto e = estimate_si(g, v, kappa);
        si[format_double(kappa)] = {{"value", e.value}, {"tolerance", e.tolerance}};
      }
      j["si_axis0"] = si;
    }
    members.push_back(j);
  }
  ctx.result = {{"registry", ground_truth_names()}, {"members", members}};
  if (o.out.empty()) {
    std::cout << ctx.result.dump(2) << '\n';
  } else {
    write_json(o.out, ctx.result, ctx);
  }
}

struct BenchOpts {
  LearnBoundedOpts base;
  std::uint64_t probe = 200000;
};

void run_bench(const BenchOpts& o, RunContext& ctx) {
  const Target t = make_target(o.base.dist, o.base.dim, ctx);
  const double kappa = o.base.kappa > 0.0 ? o.base.kappa : default_kappa(o.base.eps, t.declared);
  const BoundedLearnerParams p{o.base.dim,  o.base.eps, kappa, o.base.delta,
                               o.base.c_T, o.base.c_S, static_cast<std::size_t>(o.base.low_cap)};
  p.validate();
  const auto proj = project_learn_bounded(*t.sampler, p, o.probe, Stream(o.base.seed), default_workers());
  ctx.total_samples = proj.probe_samples;
  ctx.result = {{"kappa", kappa},
                {"derived", derived_json(proj.target)},
                {"method", method_name(proj.method)},
                {"probe_T", proj.probe_T},
                {"probe_samples", proj.probe_samples},
                {"probe_seconds", proj.probe_seconds},
                {"seconds_per_sample", proj.seconds_per_sample},
                {"projected_seconds", proj.projected_seconds},
                {"memory_bytes", proj.memory_bytes}};
  std::cout << ctx.result.dump(2) << '\n';
  if (!o.base.out.empty()) write_json(o.base.out, ctx.result, ctx);
}

void common_learn_options(CLI::App* app, std::size_t& dim, double& eps, double& delta, std::uint64_t& seed) {
  app->add_option("--dim", dim, "dimension")->required()->check(CLI::Range(1, 6));
  app->add_option("--eps", eps, "accuracy")->check(CLI::Range(0.0, 0.5));
  app->add_option("--delta", delta, "failure probability")->check(CLI::Range(0.0, 1.0));
  app->add_option("--seed", seed, "root seed");
}

void learn_options(CLI::App* app, LearnOpts& o) {
  common_learn_options(app, o.dim, o.eps, o.delta, o.seed);
  app->add_option("--candidates", o.candidates, "number of frames D (0 follows the schedule)");
  app->add_flag("--full-schedule", o.full_schedule, "use D = ceil(exp(a I_g) ln(1/delta)) without the desk cap");
  app->add_option("--schedule-constant", o.schedule_constant, "a in the full schedule")->check(CLI::PositiveNumber);
  app->add_option("--kappa", o.kappa, "learner kappa (0 derives it from the class)")->check(CLI::Range(0.0, 0.5));
  app->add_option("--mass-eps", o.mass_eps, "mass estimate accuracy (0 means eps)")->check(CLI::Range(0.0, 1.0));
  app->add_option("--c-t", o.c_T, "multiplier on T")->check(CLI::Range(1.0, 1e6));
  app->add_option("--c-s", o.c_S, "multiplier on S")->check(CLI::Range(1.0, 1e6));
  app->add_option("--draw-factor", o.draw_factor, "tournament draw threshold in units of eps")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--sample-constant", o.sample_constant, "tournament sample constant")->check(CLI::PositiveNumber);
  app->add_option("--out", o.out, "hypothesis JSON")->required();
  app->add_option("--report", o.report, "run report JSON");
}

int run(int argc, char** argv) {
  CLI::App app{"Density estimation for shift-invariant distributions"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", SHIFTLEARN_VERSION);
  std::string manifest_path;
  app.add_option("--manifest", manifest_path, "manifest path (default: <out>.manifest.json or <cmd>.manifest.json)");

  LearnBoundedOpts lb;
  auto* c_lb = app.add_subcommand("learn-bounded", "learn a density supported in B(1/2) from samples");
  common_learn_options(c_lb, lb.dim, lb.eps, lb.delta, lb.seed);
  c_lb->add_option("--kappa", lb.kappa, "shift scale (0 derives it from the class)")->check(CLI::Range(0.0, 0.5));
  c_lb->add_option("--c-t", lb.c_T, "multiplier on T")->check(CLI::Range(1.0, 1e6));
  c_lb->add_option("--c-s", lb.c_S, "multiplier on S")->check(CLI::Range(1.0, 1e6));
  c_lb->add_option("--low-cap", lb.low_cap, "largest frequency lattice allowed")->check(CLI::Range(1.0, 1e10));
  c_lb->add_option("--method", lb.method, "coefficient method")->check(CLI::IsMember({"auto", "direct", "gridded"}));
  c_lb->add_option("--out", lb.out, "hypothesis JSON")->required();
  c_lb->add_option("--report", lb.report, "learner report JSON");
  add_dist_options(c_lb, lb.dist, true);

  LearnOpts ln;
  auto* c_ln = app.add_subcommand("learn", "learn a density of C_SI(c, d, g) from samples");
  learn_options(c_ln, ln);
  add_dist_options(c_ln, ln.dist, true);

  LogConcaveOpts lc;
  lc.base.eps = 0.1;
  auto* c_lc = app.add_subcommand("logconcave", "learn a log-concave density");
  learn_options(c_lc, lc.base);
  c_lc->add_option("--attempts", lc.attempts, "rescale attempts (0 means ceil(log2(1/delta)))");
  c_lc->add_option("--c-base", lc.c_base, "C in c_LC = 16 C^d sqrt(d)")->check(CLI::Range(1.0, 100.0));
  c_lc->add_option("--tail-scale", lc.tail_scale, "tail scale per sqrt(d)")->check(CLI::PositiveNumber);
  c_lc->add_option("--c-r", lc.c_r, "rescale sample constant")->check(CLI::PositiveNumber);
  add_dist_options(c_lc, lc.base.dist, false);

  LowerBoundOpts lo;
  auto* c_lo = app.add_subcommand("lowerbound", "build a checkerboard family and measure it");
  c_lo->add_option("--dim", lo.dim, "dimension")->check(CLI::Range(1, 4));
  c_lo->add_option("--eps", lo.eps, "accuracy")->check(CLI::Range(0.0, 1.0));
  c_lo->add_option("--n", lo.n, "family size")->check(CLI::Range(1, 1000000));
  c_lo->add_option("--C", lo.C, "T = ceil(C / eps)")->check(CLI::PositiveNumber);
  c_lo->add_option("--seed", lo.seed, "root seed");
  c_lo->add_option("--family", lo.family, "family JSON");
  c_lo->add_option("--report", lo.report, "pair metrics CSV");
  c_lo->add_option("--fano", lo.fano, "Fano experiment CSV");
  c_lo->add_option("--learner", lo.learner, "Fano learner")->check(CLI::IsMember({"histogram", "mle"}));
  c_lo->add_option("--m", lo.m_values, "sample sizes for the Fano experiment, comma separated")->delimiter(',');
  c_lo->add_option("--trials", lo.trials, "trials per sample size")->check(CLI::Range(1, 1000000));

  EvalTvOpts ev;
  auto* c_ev = app.add_subcommand("eval-tv", "integral of |h - f| for a stored hypothesis");
  c_ev->add_option("--hyp", ev.hyp, "hypothesis JSON")->required();
  c_ev->add_option("--dim", ev.dim, "dimension (checked against the hypothesis)");
  c_ev->add_option("--grid", ev.grid, "grid points per axis (0 picks a default)")->check(CLI::Range(0, 1 << 24));
  c_ev->add_option("--mc", ev.mc, "Monte Carlo samples instead of a grid");
  c_ev->add_flag("--raw", ev.raw, "do not divide by the stored mass");
  c_ev->add_option("--seed", ev.seed, "Monte Carlo seed");
  c_ev->add_option("--report", ev.report, "report JSON");
  add_dist_options(c_ev, ev.dist, false);

  ZooOpts zo;
  auto* c_zo = app.add_subcommand("zoo", "list the synthetic distributions");
  c_zo->add_option("--dim", zo.dim, "only this dimension (0 for all)");
  c_zo->add_flag("--si", zo.si, "estimate shift-invariance along the first axis");
  c_zo->add_option("--out", zo.out, "JSON output (default stdout)");

  BenchOpts be;
  auto* c_be = app.add_subcommand("bench", "time the bounded learner and project a full run");
  common_learn_options(c_be, be.base.dim, be.base.eps, be.base.delta, be.base.seed);
  c_be->add_option("--kappa", be.base.kappa, "shift scale (0 derives it from the class)")->check(CLI::Range(0.0, 0.5));
  c_be->add_option("--c-t", be.base.c_T, "multiplier on T")->check(CLI::Range(1.0, 1e6));
  c_be->add_option("--c-s", be.base.c_S, "multiplier on S")->check(CLI::Range(1.0, 1e6));
  c_be->add_option("--low-cap", be.base.low_cap, "lattice cap for the probe")->check(CLI::Range(1.0, 1e10));
  c_be->add_option("--probe", be.probe, "probe samples")->check(CLI::Range(1, 1000000000));
  c_be->add_option("--out", be.base.out, "projection JSON");
  add_dist_options(c_be, be.base.dist, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  RunContext ctx;
  ctx.subcommand = sub->get_name();
  ctx.config = config_of(sub);
  const auto started = std::chrono::steady_clock::now();
  int status = 0;
  std::string message;
  std::string default_out;
  try {
    if (sub == c_lb) {
      default_out = lb.out;
      run_learn_bounded(lb, ctx);
    } else if (sub == c_ln) {
      default_out = ln.out;
      run_learn(ln, ctx);
    } else if (sub == c_lc) {
      default_out = lc.base.out;
      run_logconcave(lc, ctx);
    } else if (sub == c_lo) {
      default_out = !lo.report.empty() ? lo.report : lo.family;
      run_lowerbound(lo, ctx);
    } else if (sub == c_ev) {
      default_out = ev.report;
      run_eval_tv(ev, ctx);
    } else if (sub == c_zo) {
      default_out = zo.out;
      run_zoo(zo, ctx);
    } else if (sub == c_be) {
      default_out = be.base.out;
      run_bench(be, ctx);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n' << sub->help();
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    status = 1;
    message = e.what();
  }

  json manifest;
  manifest["tool"] = "shiftlearn";
  manifest["version"] = SHIFTLEARN_VERSION;
  manifest["subcommand"] = ctx.subcommand;
  manifest["argv"] = std::vector<std::string>(argv, argv + argc);
  manifest["config"] = ctx.config;
  manifest["workers"] = default_workers();
  manifest["inputs"] = ctx.inputs;
  manifest["outputs"] = ctx.outputs;
  manifest["status"] = status == 0 ? "ok" : "failed";
  if (status != 0) manifest["error"] = message;
  manifest["total_samples"] = ctx.total_samples;
  manifest["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  manifest["result"] = ctx.result;
  if (manifest_path.empty()) {
    manifest_path = (default_out.empty() ? ctx.subcommand : default_out) + ".manifest.json";
  }
  std::ofstream mf(manifest_path, std::ios::binary);
  if (!mf) {
    std::cerr << "cannot write manifest " << manifest_path << '\n';
    return status == 0 ? 1 : status;
  }
  mf << manifest.dump(2) << '\n';
  return status;
}

} // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << '\n';
    return 1;
  }
}
