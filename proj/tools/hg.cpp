// hg: one binary, nine analyses.  Anything structured (measures, probe
// layouts, tolerances) arrives through a JSON manifest so that every run is a
// diffable document; the command line itself stays thin.
//
// Exit codes: 0 success, 2 validation failure, 3 quadrature failure,
// 4 evaluation at/beyond the maximal time.  Failures also print a single-line
// machine-readable JSON object on stderr.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hg/blowup.hpp"
#include "hg/io.hpp"
#include "hg/kernel.hpp"
#include "hg/longtime.hpp"
#include "hg/trace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

int exit_code_for(hg::errc c) {
  switch (c) {
    case hg::errc::quadrature_failure:
      return 3;
    case hg::errc::beyond_maximal_time:
    case hg::errc::at_maximal_time:
      return 4;
    default:
      return 2;
  }
}

void emit_error(const std::string& code, const std::string& message) {
  json e = {{"error", {{"code", code}, {"message", message}}}};
  std::fprintf(stderr, "%s\n", e.dump().c_str());
}

// ---------------------------------------------------------------------------
// Manifest access helpers.  All schema violations funnel into
// errc::validation_error so they exit with code 2.
// ---------------------------------------------------------------------------

json read_json_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) hg::fail(hg::errc::validation_error, "cannot open " + p.string());
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded())
    hg::fail(hg::errc::validation_error, "invalid JSON in " + p.string());
  return j;
}

const json* find(const json& j, const char* key) {
  if (!j.is_object()) return nullptr;
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

const json& require(const json& j, const char* key) {
  const json* v = find(j, key);
  if (!v)
    hg::fail(hg::errc::validation_error,
             std::string("manifest field '") + key + "' is missing");
  return *v;
}

double as_double(const json& v, const char* what) {
  if (!v.is_number())
    hg::fail(hg::errc::validation_error, std::string(what) + ": expected a number");
  return v.get<double>();
}

int as_int(const json& v, const char* what) {
  if (!v.is_number_integer())
    hg::fail(hg::errc::validation_error, std::string(what) + ": expected an integer");
  return v.get<int>();
}

bool as_bool(const json& v, const char* what) {
  if (!v.is_boolean())
    hg::fail(hg::errc::validation_error, std::string(what) + ": expected a boolean");
  return v.get<bool>();
}

std::string as_string(const json& v, const char* what) {
  if (!v.is_string())
    hg::fail(hg::errc::validation_error, std::string(what) + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> as_double_list(const json& v, const char* what) {
  if (!v.is_array())
    hg::fail(hg::errc::validation_error, std::string(what) + ": expected an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(as_double(e, what));
  return out;
}

// Scalar broadcast: x_min / x_max may be a single number or one entry per axis.
std::vector<double> per_axis(const json& v, int n, const char* what) {
  if (v.is_number()) return std::vector<double>(static_cast<std::size_t>(n), v.get<double>());
  std::vector<double> out = as_double_list(v, what);
  if (static_cast<int>(out.size()) != n)
    hg::fail(hg::errc::validation_error,
             std::string(what) + ": expected " + std::to_string(n) + " entries");
  return out;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const char* where) {
  if (!j.is_object())
    hg::fail(hg::errc::validation_error, std::string(where) + ": expected an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known)
      hg::fail(hg::errc::validation_error,
               std::string(where) + ": unknown field '" + item.key() + "'");
  }
}

hg::QuadratureConfig parse_quadrature(const json& manifest) {
  hg::QuadratureConfig cfg;
  const json* q = find(manifest, "quadrature");
  if (!q) return cfg;
  check_keys(*q,
             {"rel_tol", "abs_tol", "max_nodes_per_axis", "tail_safety",
              "angular_nodes", "force_quadrature", "analytic_rules"},
             "quadrature");
  if (const json* v = find(*q, "rel_tol")) cfg.rel_tol = as_double(*v, "rel_tol");
  if (const json* v = find(*q, "abs_tol")) cfg.abs_tol = as_double(*v, "abs_tol");
  if (const json* v = find(*q, "max_nodes_per_axis"))
    cfg.max_nodes_per_axis = as_int(*v, "max_nodes_per_axis");
  if (const json* v = find(*q, "tail_safety"))
    cfg.tail_safety = as_double(*v, "tail_safety");
  if (const json* v = find(*q, "angular_nodes"))
    cfg.angular_nodes = as_int(*v, "angular_nodes");
  if (const json* v = find(*q, "force_quadrature"))
    cfg.force_quadrature = as_bool(*v, "force_quadrature");
  if (const json* v = find(*q, "analytic_rules"))
    cfg.analytic_rules = as_bool(*v, "analytic_rules");
  cfg.validate();
  return cfg;
}

fs::path resolve(const fs::path& base_dir, const std::string& p) {
  fs::path q(p);
  return q.is_absolute() ? q : base_dir / q;
}

hg::Measure load_measure_field(const json& manifest, const char* key,
                               const fs::path& base_dir) {
  const json& v = require(manifest, key);
  if (v.is_string()) {
    fs::path p = resolve(base_dir, v.get<std::string>());
    if (!fs::exists(p))
      hg::fail(hg::errc::validation_error, "measure file not found: " + p.string());
    return hg::io::load_measure(p.string());
  }
  if (v.is_object()) return hg::io::measure_from_json(v.dump(), base_dir.string());
  hg::fail(hg::errc::validation_error,
           std::string(key) + ": expected a path or an inline measure document");
}

// ---------------------------------------------------------------------------
// Probe layouts.  Three sources compose, emitted in a fixed order so output is
// reproducible: explicit "probes", then "grid" (row-major, first axis
// slowest), then "random_probes" drawn from mt19937_64(seed).
// ---------------------------------------------------------------------------

double unit_draw(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

std::vector<hg::Point> grid_points(const json& g, int n_axes) {
  std::vector<double> lo = per_axis(require(g, "x_min"), n_axes, "grid.x_min");
  std::vector<double> hi = per_axis(require(g, "x_max"), n_axes, "grid.x_max");
  const int m = as_int(require(g, "points_per_axis"), "grid.points_per_axis");
  if (m < 1) hg::fail(hg::errc::validation_error, "grid.points_per_axis must be >= 1");
  std::vector<hg::Point> pts;
  std::vector<int> idx(static_cast<std::size_t>(n_axes), 0);
  for (;;) {
    hg::Point x(static_cast<std::size_t>(n_axes));
    for (int d = 0; d < n_axes; ++d)
      x[static_cast<std::size_t>(d)] =
          m == 1 ? 0.5 * (lo[static_cast<std::size_t>(d)] + hi[static_cast<std::size_t>(d)])
                 : lo[static_cast<std::size_t>(d)] +
                       (hi[static_cast<std::size_t>(d)] - lo[static_cast<std::size_t>(d)]) *
                           idx[static_cast<std::size_t>(d)] / (m - 1);
    pts.push_back(std::move(x));
    int d = n_axes - 1;
    while (d >= 0 && ++idx[static_cast<std::size_t>(d)] == m) {
      idx[static_cast<std::size_t>(d)] = 0;
      --d;
    }
    if (d < 0) break;
  }
  return pts;
}

std::vector<hg::Point> collect_points(const json& manifest, int n_axes,
                                      std::uint64_t seed) {
  std::vector<hg::Point> pts;
  if (const json* p = find(manifest, "probes")) {
    if (!p->is_array())
      hg::fail(hg::errc::validation_error, "probes: expected an array of points");
    for (const auto& e : *p) {
      hg::Point x = as_double_list(e, "probes entry");
      if (static_cast<int>(x.size()) != n_axes)
        hg::fail(hg::errc::validation_error, "probes entry has the wrong dimension");
      pts.push_back(std::move(x));
    }
  }
  if (const json* g = find(manifest, "grid")) {
    check_keys(*g, {"x_min", "x_max", "points_per_axis"}, "grid");
    auto extra = grid_points(*g, n_axes);
    pts.insert(pts.end(), extra.begin(), extra.end());
  }
  if (const json* r = find(manifest, "random_probes")) {
    check_keys(*r, {"count", "x_min", "x_max"}, "random_probes");
    const int count = as_int(require(*r, "count"), "random_probes.count");
    std::vector<double> lo = per_axis(require(*r, "x_min"), n_axes, "random_probes.x_min");
    std::vector<double> hi = per_axis(require(*r, "x_max"), n_axes, "random_probes.x_max");
    std::mt19937_64 eng(seed);
    for (int i = 0; i < count; ++i) {
      hg::Point x(static_cast<std::size_t>(n_axes));
      for (int d = 0; d < n_axes; ++d)
        x[static_cast<std::size_t>(d)] =
            lo[static_cast<std::size_t>(d)] +
            (hi[static_cast<std::size_t>(d)] - lo[static_cast<std::size_t>(d)]) * unit_draw(eng);
      pts.push_back(std::move(x));
    }
  }
  if (pts.empty())
    hg::fail(hg::errc::validation_error,
             "no probes: give 'probes', 'grid', or 'random_probes'");
  return pts;
}

struct EvalProbe {
  hg::Point x;
  double t = 0.0;
};

std::vector<EvalProbe> collect_eval_probes(const json& manifest, int n_axes,
                                           std::uint64_t seed) {
  std::vector<EvalProbe> out;
  if (const json* p = find(manifest, "probes")) {
    if (!p->is_array())
      hg::fail(hg::errc::validation_error, "probes: expected an array");
    for (const auto& e : *p) {
      check_keys(e, {"x", "t"}, "probes entry");
      EvalProbe pr;
      pr.x = as_double_list(require(e, "x"), "probes entry x");
      if (static_cast<int>(pr.x.size()) != n_axes)
        hg::fail(hg::errc::validation_error, "probes entry has the wrong dimension");
      pr.t = as_double(require(e, "t"), "probes entry t");
      out.push_back(std::move(pr));
    }
  }
  if (const json* g = find(manifest, "grid")) {
    check_keys(*g, {"x_min", "x_max", "points_per_axis", "times"}, "grid");
    std::vector<double> times = as_double_list(require(*g, "times"), "grid.times");
    auto pts = grid_points(*g, n_axes);
    for (double t : times)
      for (const auto& x : pts) out.push_back({x, t});
  }
  if (const json* r = find(manifest, "random_probes")) {
    check_keys(*r, {"count", "x_min", "x_max", "t_min", "t_max"}, "random_probes");
    const int count = as_int(require(*r, "count"), "random_probes.count");
    std::vector<double> lo = per_axis(require(*r, "x_min"), n_axes, "random_probes.x_min");
    std::vector<double> hi = per_axis(require(*r, "x_max"), n_axes, "random_probes.x_max");
    const double t0 = as_double(require(*r, "t_min"), "random_probes.t_min");
    const double t1 = as_double(require(*r, "t_max"), "random_probes.t_max");
    std::mt19937_64 eng(seed);
    for (int i = 0; i < count; ++i) {
      EvalProbe pr;
      pr.x.resize(static_cast<std::size_t>(n_axes));
      for (int d = 0; d < n_axes; ++d)
        pr.x[static_cast<std::size_t>(d)] =
            lo[static_cast<std::size_t>(d)] +
            (hi[static_cast<std::size_t>(d)] - lo[static_cast<std::size_t>(d)]) * unit_draw(eng);
      pr.t = t0 + (t1 - t0) * unit_draw(eng);
      out.push_back(std::move(pr));
    }
  }
  if (out.empty())
    hg::fail(hg::errc::validation_error,
             "no probes: give 'probes', 'grid', or 'random_probes'");
  return out;
}

// ---------------------------------------------------------------------------
// CSV output.  Unix newlines, header always present, 17 significant digits.
// ---------------------------------------------------------------------------

// Writes through a temp file and renames on commit() so a failed run never
// leaves a partial CSV behind.
class Csv {
 public:
  explicit Csv(const fs::path& path)
      : path_(path), tmp_(path.string() + ".tmp") {
    if (path.has_parent_path()) {
      std::error_code ec;
      fs::create_directories(path.parent_path(), ec);
    }
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_)
      hg::fail(hg::errc::validation_error, "cannot write " + tmp_.string());
  }
  ~Csv() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
    ++rows_;
  }
  void commit() {
    out_.close();
    if (!out_)
      hg::fail(hg::errc::validation_error, "cannot write " + tmp_.string());
    fs::rename(tmp_, path_);
    committed_ = true;
  }
  // Data rows written so far, excluding the header.
  int data_rows() const { return rows_ - 1; }

 private:
  fs::path path_;
  fs::path tmp_;
  std::ofstream out_;
  int rows_ = 0;
  bool committed_ = false;
};

std::vector<std::string> coord_header(int n_axes) {
  std::vector<std::string> h;
  for (int d = 1; d <= n_axes; ++d) h.push_back("x_" + std::to_string(d));
  return h;
}

std::string fmt(double v) { return hg::io::format_double(v); }

const char* method_name(hg::EvalMethod m) {
  switch (m) {
    case hg::EvalMethod::closed_form: return "closed_form";
    case hg::EvalMethod::radial_quadrature: return "radial_quadrature";
    case hg::EvalMethod::full_quadrature: return "full_quadrature";
  }
  return "unknown";
}

const char* verdict_name(hg::Verdict v) {
  switch (v) {
    case hg::Verdict::GlobalInTime: return "global_in_time";
    case hg::Verdict::Regular: return "regular";
    case hg::Verdict::Blowup: return "blowup";
    case hg::Verdict::Undetermined: return "undetermined";
  }
  return "unknown";
}

const char* behaviour_name(hg::LongtimeBehaviour b) {
  switch (b) {
    case hg::LongtimeBehaviour::BoundedOnParabolas: return "bounded_on_parabolas";
    case hg::LongtimeBehaviour::DecaysToZero: return "decays_to_zero";
    case hg::LongtimeBehaviour::ConvergesTo: return "converges_to";
    case hg::LongtimeBehaviour::DivergesToInfinity: return "diverges_to_infinity";
    case hg::LongtimeBehaviour::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Run plumbing shared by every subcommand.
// ---------------------------------------------------------------------------

struct RunContext {
  std::string command;
  fs::path manifest_path;
  fs::path base_dir;
  json manifest;
  hg::QuadratureConfig cfg;
  std::uint64_t seed = 0;
  fs::path output;
  json nodes = json::object();   // phase name -> quadrature node count
  json result = json::object();
  std::uint64_t nodes_mark = 0;
};

void mark_nodes(RunContext& ctx, const char* phase) {
  const std::uint64_t now = hg::quad_stats::nodes_used();
  ctx.nodes[phase] = now - ctx.nodes_mark;
  ctx.nodes_mark = now;
}

void save_measure_if_requested(const RunContext& ctx, const hg::Measure& mu,
                               json* outputs) {
  const json* v = find(ctx.manifest, "measure_output");
  if (!v) return;
  fs::path p = resolve(ctx.base_dir, as_string(*v, "measure_output"));
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  hg::io::save_measure(mu, p.string());
  (*outputs)["measure"] = p.string();
}

// --------------------------------------------------------------------------

int cmd_evaluate(RunContext& ctx, Csv& csv, json*) {
  check_keys(ctx.manifest,
             {"command", "output", "summary", "quadrature", "seed", "measure",
              "probes", "grid", "random_probes"},
             "manifest");
  hg::Measure mu = load_measure_field(ctx.manifest, "measure", ctx.base_dir);
  auto probes = collect_eval_probes(ctx.manifest, mu.dimension, ctx.seed);

  std::vector<std::string> header = coord_header(mu.dimension);
  header.insert(header.end(), {"t", "value", "est_error", "method"});
  csv.row(header);
  double max_err = 0.0;
  for (const auto& p : probes) {
    hg::SolutionValue v = hg::evaluate(mu, p.x, p.t, ctx.cfg);
    std::vector<std::string> cells;
    for (double c : p.x) cells.push_back(fmt(c));
    cells.push_back(fmt(p.t));
    cells.push_back(fmt(v.value));
    cells.push_back(fmt(v.est_error));
    cells.push_back(method_name(v.method));
    csv.row(cells);
    max_err = std::max(max_err, v.est_error);
  }
  mark_nodes(ctx, "evaluate");
  ctx.result["max_est_error"] = max_err;
  return 0;
}

int cmd_norms(RunContext& ctx, Csv& csv, json*) {
  check_keys(ctx.manifest,
             {"command", "output", "summary", "quadrature", "seed", "measure",
              "eps", "track"},
             "manifest");
  hg::Measure mu = load_measure_field(ctx.manifest, "measure", ctx.base_dir);

  csv.row({"quantity", "parameter", "value"});
  const hg::GrowthIndex gi = hg::growth_index(mu);
  csv.row({"eps0", "", fmt(gi.eps0)});
  csv.row({"attained", "",
           gi.attained == hg::Attainment::yes
               ? "yes"
               : gi.attained == hg::Attainment::no ? "no" : "unknown"});
  csv.row({"source", "",
           gi.source == hg::GrowthIndexSource::analytic ? "analytic" : "estimated"});
  csv.row({"maximal_time", "", fmt(hg::maximal_time(mu))});
  csv.row({"sign", "",
           hg::sign_status(mu) == hg::SignStatus::nonnegative ? "nonnegative"
                                                              : "mixed"});
  csv.row({"btv", "", fmt(hg::btv_norm(mu, ctx.cfg))});
  csv.row({"uniform", "", fmt(hg::uniform_norm(mu, ctx.cfg))});
  if (const json* e = find(ctx.manifest, "eps"))
    for (double eps : as_double_list(*e, "eps"))
      csv.row({"meps", fmt(eps), fmt(hg::meps_norm(mu, eps, ctx.cfg))});
  if (const json* tr = find(ctx.manifest, "track")) {
    check_keys(*tr, {"delta", "times"}, "track");
    const double delta = as_double(require(*tr, "delta"), "track.delta");
    auto times = as_double_list(require(*tr, "times"), "track.times");
    auto vals = hg::norm_blowup_track(mu, delta, times, ctx.cfg);
    for (std::size_t i = 0; i < times.size(); ++i)
      csv.row({"l1eps_track", fmt(times[i]), fmt(vals[i])});
  }
  mark_nodes(ctx, "norms");
  ctx.result["eps0"] = gi.eps0;
  return 0;
}

hg::ConvexSetSpec parse_convex(const json& c) {
  check_keys(c, {"A", "dimension", "x0", "half_spaces"}, "convex");
  hg::ConvexSetSpec spec;
  if (const json* v = find(c, "x0")) spec.x0 = as_double_list(*v, "convex.x0");
  const json& hs = require(c, "half_spaces");
  if (!hs.is_array())
    hg::fail(hg::errc::validation_error, "convex.half_spaces: expected an array");
  for (const auto& h : hs) {
    check_keys(h, {"n", "c", "strict"}, "half_space");
    hg::ConvexSetSpec::HalfSpace piece;
    piece.n = as_double_list(require(h, "n"), "half_space.n");
    piece.c = as_double(require(h, "c"), "half_space.c");
    if (const json* s = find(h, "strict")) piece.strict = as_bool(*s, "half_space.strict");
    spec.half_spaces.push_back(std::move(piece));
  }
  return spec;
}

int cmd_blowup_map(RunContext& ctx, Csv& csv, json* outputs) {
  check_keys(ctx.manifest,
             {"command", "output", "summary", "quadrature", "seed", "measure",
              "convex", "probes", "grid", "random_probes", "measure_output"},
             "manifest");
  hg::Measure mu;
  if (find(ctx.manifest, "convex")) {
    if (find(ctx.manifest, "measure"))
      hg::fail(hg::errc::validation_error, "give either 'measure' or 'convex', not both");
    const json& c = require(ctx.manifest, "convex");
    const double A = as_double(require(c, "A"), "convex.A");
    const int dim = as_int(require(c, "dimension"), "convex.dimension");
    mu = hg::build_convex_regular_data(parse_convex(c), A, dim);
    mark_nodes(ctx, "build");
  } else {
    mu = load_measure_field(ctx.manifest, "measure", ctx.base_dir);
  }
  save_measure_if_requested(ctx, mu, outputs);
  auto points = collect_points(ctx.manifest, mu.dimension, ctx.seed);

  std::vector<std::string> header = coord_header(mu.dimension);
  header.insert(header.end(), {"verdict", "limit_or_blank", "shells_used"});
  csv.row(header);
  json counts = {{"global_in_time", 0}, {"regular", 0}, {"blowup", 0}, {"undetermined", 0}};
  for (const auto& x : points) {
    hg::PointClassification pc = hg::classify_point(mu, x, ctx.cfg);
    std::vector<std::string> cells;
    for (double c : x) cells.push_back(fmt(c));
    cells.push_back(verdict_name(pc.verdict));
    cells.push_back(pc.verdict == hg::Verdict::Regular ? fmt(pc.limit) : "");
    cells.push_back(std::to_string(pc.shells_used));
    csv.row(cells);
    counts[verdict_name(pc.verdict)] = counts[verdict_name(pc.verdict)].get<int>() + 1;
  }
  mark_nodes(ctx, "classify");
  ctx.result["verdict_counts"] = counts;
  return 0;
}

int cmd_oscillate(RunContext& ctx, Csv& csv, json* outputs) {
  check_keys(ctx.manifest,
             {"command", "output", "summary", "quadrature", "seed", "targets",
              "dimension", "measure_output"},
             "manifest");
  auto targets = as_double_list(require(ctx.manifest, "targets"), "targets");
  int dim = 1;
  if (const json* d = find(ctx.manifest, "dimension")) dim = as_int(*d, "dimension");
  auto [mu, spec] = hg::build_oscillating_data(targets, dim);
  mark_nodes(ctx, "build");
  save_measure_if_requested(ctx, mu, outputs);
  auto u0 = hg::trace_at_origin(mu, spec.t, ctx.cfg);
  mark_nodes(ctx, "trace");

  csv.row({"k", "b_k", "r_k", "lambda_k", "t_k", "u0tk", "bound", "pass"});
  bool all_pass = true;
  for (std::size_t k = 0; k < spec.b.size(); ++k) {
    const bool pass = std::abs(u0[k] - spec.b[k]) <= spec.error_bounds[k];
    all_pass = all_pass && pass;
    csv.row({std::to_string(k + 1), fmt(spec.b[k]), fmt(spec.r[k]),
             fmt(spec.lambda[k]), fmt(spec.t[k]), fmt(u0[k]),
             fmt(spec.error_bounds[k]), pass ? "true" : "false"});
  }
  ctx.result["all_pass"] = all_pass;
  return 0;
}

std::vector<double> parse_times(const json& manifest) {
  if (const json* t = find(manifest, "times"))
    return as_double_list(*t, "times");
  const json& g = require(manifest, "geomspace");
  check_keys(g, {"t_min", "t_max", "count"}, "geomspace");
  const double lo = as_double(require(g, "t_min"), "geomspace.t_min");
  const double hi = as_double(require(g, "t_max"), "geomspace.t_max");
  const int count = as_int(require(g, "count"), "geomspace.count");
  if (!(lo > 0.0) || !(hi > lo) || count < 2)
    hg::fail(hg::errc::validation_error,
             "geomspace needs 0 < t_min < t_max and count >= 2");
  std::vector<double> out;
  for (int i = 0; i < count; ++i)
    out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
  return out;
}

int cmd_trace(RunContext& ctx, Csv& csv, json*) {
  check_keys(ctx.manifest,
             {"command", "output", "summary", "quadrature", "seed", "measure",
              "times", "geomspace"},
             "manifest");
  hg::Measure mu = load_measure_field(ctx.manifest, "measure", ctx.base_dir);
  auto times = parse_times(ctx.manifest);
  auto vals = hg::trace_at_origin(mu, times, ctx.cfg);
  mark_nodes(ctx, "trace");
  csv.row({"t", "u0t"});
  for (std::size_t i = 0; i < times.size(); ++i)
    csv.row({fmt(times[i]), fmt(vals[i])});
  return 0;
}

int cmd_trace_solve(RunContext& ctx, Csv& csv, json*) {
  check_keys(ctx.manifest,
             {"command", "output", "summary", "quadrature", "seed",
              "gamma_coeffs", "C", "tau", "horizon", "truncation", "x",
              "x_grid", "times"},
             "manifest");
  auto coeffs = as_double_list(require(ctx.manifest, "gamma_coeffs"), "gamma_coeffs");
  const double C = as_double(require(ctx.manifest, "C"), "C");
  const double tau = as_double(require(ctx.manifest, "tau"), "tau");
  const double horizon = as_double(require(ctx.manifest, "horizon"), "horizon");
  int truncation = 64;
  if (const json* t = find(ctx.manifest, "truncation"))
    truncation = as_int(*t, "truncation");
  hg::TraceSeries s = hg::build_trace_solution(coeffs, C, tau, horizon, truncation);

  std::vector<double> xs;
  if (const json* x = find(ctx.manifest, "x")) xs = as_double_list(*x, "x");
  if (const json* g = find(ctx.manifest, "x_grid")) {
    check_keys(*g, {"x_min", "x_max", "count"}, "x_grid");
    const double lo = as_double(require(*g, "x_min"), "x_grid.x_min");
    const double hi = as_double(require(*g, "x_max"), "x_grid.x_max");
    const int count = as_int(require(*g, "count"), "x_grid.count");
    if (count < 2)
      hg::fail(hg::errc::validation_error, "x_grid.count must be >= 2");
    for (int i = 0; i < count; ++i)
      xs.push_back(lo + (hi - lo) * i / (count - 1));
  }
  if (xs.empty())
    hg::fail(hg::errc::validation_error, "no sample points: give 'x' or 'x_grid'");
  auto times = as_double_list(require(ctx.manifest, "times"), "times");

  csv.row({"x", "t", "u", "residual"});
  double max_res = 0.0;
  for (double t : times)
    for (double x : xs) {
      hg::SolutionValue v = hg::eval_trace_solution(s, x, t, ctx.cfg);
      const double res = hg::verify_trace(s, {t}, {x}, ctx.cfg);
      max_res = std::max(max_res, res);
      csv.row({fmt(x), fmt(t), fmt(v.value), fmt(res)});
    }
  mark_nodes(ctx, "trace-solve");
  ctx.result["max_residual"] = max_res;
  return 0;
}

int cmd_classify(RunContext& ctx, Csv& csv, json*) {
  check_keys(ctx.manifest,
             {"command", "output", "summary", "quadrature", "seed", "measure",
              "k_max"},
             "manifest");
  hg::Measure mu = load_measure_field(ctx.manifest, "measure", ctx.base_dir);
  int k_max = 12;
  if (const json* k = find(ctx.manifest, "k_max")) k_max = as_int(*k, "k_max");
  hg::LongtimeVerdict v = hg::classify_longtime(mu, k_max, ctx.cfg);
  mark_nodes(ctx, "classify");

  csv.row({"k", "R", "annulus_average", "ball_average"});
  for (std::size_t k = 0; k < v.ball_averages.size(); ++k)
    csv.row({std::to_string(k), fmt(std::ldexp(1.0, static_cast<int>(k))),
             fmt(v.annulus_averages[k]), fmt(v.ball_averages[k])});
  ctx.result["behaviour"] = behaviour_name(v.behaviour);
  if (v.behaviour == hg::LongtimeBehaviour::ConvergesTo)
    ctx.result["limit"] = v.limit;
  ctx.result["positive_liminf"] = v.positive_liminf;
  ctx.result["trace_times"] = {1.0, 10.0, 100.0};
  ctx.result["trace_samples"] = v.trace_samples;
  return 0;
}

int cmd_shadow(RunContext& ctx, Csv& csv, json* outputs) {
  check_keys(ctx.manifest,
             {"command", "output", "summary", "quadrature", "seed", "inner",
              "osc", "targets", "dimension", "radius", "times", "probes",
              "grid", "random_probes", "measure_output"},
             "manifest");
  hg::Measure inner = load_measure_field(ctx.manifest, "inner", ctx.base_dir);
  hg::Measure osc;
  if (find(ctx.manifest, "targets")) {
    if (find(ctx.manifest, "osc"))
      hg::fail(hg::errc::validation_error, "give either 'osc' or 'targets', not both");
    auto targets = as_double_list(require(ctx.manifest, "targets"), "targets");
    osc = hg::build_oscillating_data(targets, inner.dimension).first;
  } else {
    osc = load_measure_field(ctx.manifest, "osc", ctx.base_dir);
  }
  const double radius = as_double(require(ctx.manifest, "radius"), "radius");
  hg::Measure spliced = hg::splice_shadow(inner, osc, radius);
  mark_nodes(ctx, "build");
  save_measure_if_requested(ctx, spliced, outputs);

  auto points = collect_points(ctx.manifest, inner.dimension, ctx.seed);
  auto times = as_double_list(require(ctx.manifest, "times"), "times");
  std::vector<std::string> header = coord_header(inner.dimension);
  header.insert(header.end(), {"t", "spliced", "inner", "diff"});
  csv.row(header);
  double sup_diff = 0.0;
  for (double t : times)
    for (const auto& x : points) {
      const double us = hg::evaluate(spliced, x, t, ctx.cfg).value;
      const double ui = hg::evaluate(inner, x, t, ctx.cfg).value;
      const double diff = std::abs(us - ui);
      sup_diff = std::max(sup_diff, diff);
      std::vector<std::string> cells;
      for (double c : x) cells.push_back(fmt(c));
      cells.insert(cells.end(), {fmt(t), fmt(us), fmt(ui), fmt(diff)});
      csv.row(cells);
    }
  mark_nodes(ctx, "evaluate");
  ctx.result["sup_diff"] = sup_diff;
  return 0;
}

int cmd_rescale(RunContext& ctx, Csv& csv, json*) {
  check_keys(ctx.manifest,
             {"command", "output", "summary", "quadrature", "seed", "measure",
              "lambdas", "probes", "grid", "random_probes"},
             "manifest");
  hg::Measure mu = load_measure_field(ctx.manifest, "measure", ctx.base_dir);
  auto lambdas = as_double_list(require(ctx.manifest, "lambdas"), "lambdas");
  auto points = collect_points(ctx.manifest, mu.dimension, ctx.seed);

  csv.row({"lambda", "residual"});
  double max_res = 0.0;
  for (double lambda : lambdas) {
    const double r = hg::rescaling_residual(mu, lambda, points, ctx.cfg);
    max_res = std::max(max_res, r);
    csv.row({fmt(lambda), fmt(r)});
  }
  mark_nodes(ctx, "rescale");
  ctx.result["max_residual"] = max_res;
  return 0;
}

// --------------------------------------------------------------------------

using CommandFn = int (*)(RunContext&, Csv&, json*);

CommandFn command_fn(const std::string& name) {
  if (name == "evaluate") return cmd_evaluate;
  if (name == "norms") return cmd_norms;
  if (name == "blowup-map") return cmd_blowup_map;
  if (name == "oscillate") return cmd_oscillate;
  if (name == "trace") return cmd_trace;
  if (name == "trace-solve") return cmd_trace_solve;
  if (name == "classify") return cmd_classify;
  if (name == "shadow") return cmd_shadow;
  if (name == "rescale") return cmd_rescale;
  return nullptr;
}

int run_manifest(std::string command, const std::string& manifest_arg) {
  const auto t_start = std::chrono::steady_clock::now();
  RunContext ctx;
  ctx.manifest_path = fs::path(manifest_arg);
  ctx.base_dir = ctx.manifest_path.has_parent_path() ? ctx.manifest_path.parent_path()
                                                     : fs::path(".");
  ctx.manifest = read_json_file(ctx.manifest_path);

  if (const json* c = find(ctx.manifest, "command")) {
    const std::string declared = as_string(*c, "command");
    if (command.empty())
      command = declared;
    else if (declared != command)
      hg::fail(hg::errc::validation_error,
               "manifest declares command '" + declared + "' but '" + command +
                   "' was invoked");
  }
  if (command.empty())
    hg::fail(hg::errc::validation_error, "manifest field 'command' is missing");
  CommandFn fn = command_fn(command);
  if (!fn)
    hg::fail(hg::errc::validation_error, "unknown command '" + command + "'");
  ctx.command = command;

  ctx.cfg = parse_quadrature(ctx.manifest);
  if (const json* s = find(ctx.manifest, "seed")) {
    if (!s->is_number_integer() || s->get<std::int64_t>() < 0)
      hg::fail(hg::errc::validation_error, "seed: expected a nonnegative integer");
    ctx.seed = s->get<std::uint64_t>();
  }
  ctx.output = resolve(ctx.base_dir, as_string(require(ctx.manifest, "output"), "output"));

  hg::quad_stats::reset();
  ctx.nodes_mark = 0;
  json outputs = {{"csv", ctx.output.string()}};
  int rc;
  {
    Csv csv(ctx.output);
    rc = fn(ctx, csv, &outputs);
    outputs["rows"] = csv.data_rows();
    csv.commit();
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  json summary = {
      {"schema", "hg-run-v1"},
      {"command", ctx.command},
      {"inputs", {{"manifest", manifest_arg}, {"document", ctx.manifest}}},
      {"outputs", outputs},
      {"versions", {{"hg", kVersion}, {"measure_format", 1}, {"hgrd", 1}}},
      {"wall_time_seconds", wall},
      {"quadrature_nodes", ctx.nodes},
      {"result", ctx.result},
  };
  fs::path summary_path = find(ctx.manifest, "summary")
                              ? resolve(ctx.base_dir,
                                        as_string(*find(ctx.manifest, "summary"), "summary"))
                              : fs::path(ctx.output.string() + ".summary.json");
  std::ofstream s_out(summary_path, std::ios::binary | std::ios::trunc);
  if (!s_out)
    hg::fail(hg::errc::validation_error, "cannot write " + summary_path.string());
  s_out << summary.dump(2) << '\n';
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heat-kernel analyses for measure-valued initial data"};
  app.set_version_flag("--version", std::string("hg ") + kVersion);
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* desc;
  };
  const Sub subs[] = {
      {"evaluate", "evaluate u(x,t) on a batch of probes"},
      {"norms", "growth index and weighted norms of a measure"},
      {"blowup-map", "classify probe points at the maximal time"},
      {"oscillate", "build oscillating long-time data and check its trace"},
      {"trace", "origin trace u(0,t) over a time list"},
      {"trace-solve", "even-power series solution from a prescribed trace"},
      {"classify", "long-time behaviour from dyadic mass averages"},
      {"shadow", "splice data behind a ball and compare solutions"},
      {"rescale", "parabolic rescaling residuals"},
      {"run", "dispatch on the manifest's own 'command' field"},
  };
  std::string manifest;
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.desc);
    sub->add_option("manifest", manifest, "path to a JSON run manifest")
        ->required()
        ->check(CLI::ExistingFile);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("usage_error", e.what());
    return 2;
  }

  std::string command = app.get_subcommands().front()->get_name();
  if (command == "run") command.clear();
  try {
    return run_manifest(command, manifest);
  } catch (const hg::error& e) {
    emit_error(hg::errc_name(e.code()), e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    emit_error("internal_error", e.what());
    return 1;
  }
}
