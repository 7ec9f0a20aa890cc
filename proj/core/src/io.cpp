#include "hg/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "hg/error.hpp"
#include "json.hpp"

namespace hg {

const char* errc_name(errc c) noexcept {
  switch (c) {
    case errc::validation_error: return "validation_error";
    case errc::dimension_mismatch: return "dimension_mismatch";
    case errc::dimension_unsupported: return "dimension_unsupported";
    case errc::index_too_small: return "index_too_small";
    case errc::quadrature_failure: return "quadrature_failure";
    case errc::beyond_maximal_time: return "beyond_maximal_time";
    case errc::at_maximal_time: return "at_maximal_time";
    case errc::insufficient_shells: return "insufficient_shells";
    case errc::order_unsupported: return "order_unsupported";
    case errc::signed_data_unsupported: return "signed_data_unsupported";
    case errc::not_factored: return "not_factored";
    case errc::unsupported_restriction: return "unsupported_restriction";
    case errc::tail_not_closed: return "tail_not_closed";
    case errc::inconsistent_bound: return "inconsistent_bound";
  }
  return "unknown_error";
}

}  // namespace hg

namespace hg::io {

namespace {

using nlohmann::json;

json point_to_json(const Point& p) {
  json a = json::array();
  for (double c : p) a.push_back(c);
  return a;
}

Point point_from_json(const json& j) {
  if (!j.is_array()) fail(errc::validation_error, "expected a coordinate array");
  Point p;
  for (const auto& c : j) p.push_back(c.get<double>());
  return p;
}

json modifier_to_json(const Modifier& m) {
  json j;
  std::visit(
      [&](const auto& mod) {
        using T = std::decay_t<decltype(mod)>;
        if constexpr (std::is_same_v<T, ModOne>) {
          j["kind"] = "one";
        } else if constexpr (std::is_same_v<T, ModPowerDecay>) {
          j["kind"] = "power_decay";
          j["alpha"] = mod.alpha;
        } else if constexpr (std::is_same_v<T, ModExpDecay>) {
          j["kind"] = "exp_decay";
          j["gamma"] = mod.gamma;
        } else if constexpr (std::is_same_v<T, ModStretchedExpDecay>) {
          j["kind"] = "stretched_exp_decay";
          j["gamma"] = mod.gamma;
          j["alpha"] = mod.alpha;
        } else {
          j["kind"] = "exp_power_decay";
          j["gamma"] = mod.gamma;
          j["alpha"] = mod.alpha;
        }
      },
      m);
  return j;
}

Modifier modifier_from_json(const json& j) {
  const std::string kind = j.value("kind", "one");
  if (kind == "one") return ModOne{};
  if (kind == "power_decay") return ModPowerDecay{j.at("alpha").get<double>()};
  if (kind == "exp_decay") return ModExpDecay{j.at("gamma").get<double>()};
  if (kind == "stretched_exp_decay")
    return ModStretchedExpDecay{j.at("gamma").get<double>(),
                                j.at("alpha").get<double>()};
  if (kind == "exp_power_decay")
    return ModExpPowerDecay{j.at("gamma").get<double>(),
                            j.at("alpha").get<double>()};
  fail(errc::validation_error, "unknown modifier kind '" + kind + "'");
}

struct SidecarPlan {
  std::string hint;   // empty: embed samples inline
  int count = 0;      // grids seen so far
  std::vector<std::pair<std::string, const GridDensity*>> files;
  std::string next(const GridDensity& g) {
    std::string name = hint;
    if (count > 0) name += "." + std::to_string(count);
    ++count;
    files.emplace_back(name, &g);
    return name;
  }
};

json body_to_json(const Measure& mu, SidecarPlan& plan);

json measure_node(const Measure& mu, SidecarPlan& plan) {
  json j;
  j["dimension"] = mu.dimension;
  j["body"] = body_to_json(mu, plan);
  return j;
}

json body_to_json(const Measure& mu, SidecarPlan& plan) {
  json j;
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, DiracComb>) {
          j["kind"] = "dirac_comb";
          json atoms = json::array();
          for (const auto& a : body.atoms)
            atoms.push_back(
                {{"location", point_to_json(a.location)}, {"weight", a.weight}});
          j["atoms"] = std::move(atoms);
        } else if constexpr (std::is_same_v<T, ExpQuadDensity>) {
          j["kind"] = "exp_quad";
          j["A"] = body.A;
          j["b"] = point_to_json(body.b);
          j["center"] = point_to_json(body.center);
          j["modifier"] = modifier_to_json(body.modifier);
        } else if constexpr (std::is_same_v<T, AnnulusSum>) {
          j["kind"] = "annulus_sum";
          json terms = json::array();
          for (const auto& t : body.terms)
            terms.push_back({{"b", t.b}, {"lambda", t.lambda}, {"r", t.r}});
          j["terms"] = std::move(terms);
        } else if constexpr (std::is_same_v<T, HalfSpacePiece>) {
          j["kind"] = "half_space";
          j["n"] = point_to_json(body.n);
          j["c"] = body.c;
          j["strict"] = body.strict;
          j["A"] = body.A;
          j["x0"] = point_to_json(body.x0);
        } else if constexpr (std::is_same_v<T, GridDensity>) {
          j["kind"] = "grid";
          j["support_radius"] = body.support_radius;
          j["cells_per_axis"] = body.cells_per_axis;
          if (plan.hint.empty()) {
            json samples = json::array();
            for (double s : body.samples) samples.push_back(s);
            j["samples"] = std::move(samples);
          } else {
            j["samples_file"] = plan.next(body);
          }
        } else {  // Sum
          j["kind"] = "sum";
          json comps = json::array();
          for (const auto& [c, sub] : body.components)
            comps.push_back(
                {{"coefficient", c}, {"measure", measure_node(*sub, plan)}});
          j["components"] = std::move(comps);
        }
      },
      mu.body);
  return j;
}

Measure measure_from_node(const json& j, const std::string& base_dir);

Measure body_from_json(int N, const json& j, const std::string& base_dir) {
  const std::string kind = j.value("kind", "");
  if (kind == "dirac_comb") {
    DiracComb out;
    for (const auto& a : j.value("atoms", json::array()))
      out.atoms.push_back(
          {point_from_json(a.at("location")), a.at("weight").get<double>()});
    return Measure{N, std::move(out)};
  }
  if (kind == "exp_quad") {
    ExpQuadDensity out;
    out.A = j.at("A").get<double>();
    if (j.contains("b")) out.b = point_from_json(j.at("b"));
    if (j.contains("center")) out.center = point_from_json(j.at("center"));
    if (j.contains("modifier")) out.modifier = modifier_from_json(j.at("modifier"));
    return Measure{N, std::move(out)};
  }
  if (kind == "annulus_sum") {
    AnnulusSum out;
    for (const auto& t : j.value("terms", json::array()))
      out.terms.push_back({t.at("b").get<double>(), t.at("lambda").get<double>(),
                           t.at("r").get<double>()});
    return Measure{N, std::move(out)};
  }
  if (kind == "half_space") {
    HalfSpacePiece out;
    out.n = point_from_json(j.at("n"));
    out.c = j.at("c").get<double>();
    out.strict = j.value("strict", false);
    out.A = j.at("A").get<double>();
    if (j.contains("x0")) out.x0 = point_from_json(j.at("x0"));
    return Measure{N, std::move(out)};
  }
  if (kind == "grid") {
    GridDensity out;
    out.support_radius = j.at("support_radius").get<double>();
    out.cells_per_axis = j.at("cells_per_axis").get<int>();
    if (j.contains("samples")) {
      for (const auto& s : j.at("samples")) out.samples.push_back(s.get<double>());
    } else if (j.contains("samples_file")) {
      const std::filesystem::path p =
          std::filesystem::path(base_dir) / j.at("samples_file").get<std::string>();
      int n = 0, cells = 0;
      out.samples = read_hgrd(p.string(), &n, &cells);
      if (n != N || cells != out.cells_per_axis)
        fail(errc::validation_error, "sidecar header disagrees with the document");
    } else {
      fail(errc::validation_error, "grid needs samples or samples_file");
    }
    return Measure{N, std::move(out)};
  }
  if (kind == "sum") {
    std::vector<std::pair<double, Measure>> comps;
    for (const auto& c : j.value("components", json::array()))
      comps.emplace_back(c.at("coefficient").get<double>(),
                         measure_from_node(c.at("measure"), base_dir));
    return make_sum(N, comps);
  }
  fail(errc::validation_error, "unknown measure kind '" + kind + "'");
}

Measure measure_from_node(const json& j, const std::string& base_dir) {
  if (!j.contains("dimension") || !j.contains("body"))
    fail(errc::validation_error, "measure document needs dimension and body");
  const int N = j.at("dimension").get<int>();
  return body_from_json(N, j.at("body"), base_dir);
}

}  // namespace

std::string measure_to_json(const Measure& mu, const std::string& sidecar_hint) {
  SidecarPlan plan;
  plan.hint = sidecar_hint;
  json j = measure_node(mu, plan);
  return j.dump(2) + "\n";
}

Measure measure_from_json(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(errc::validation_error, std::string("measure document is not JSON: ") + e.what());
  }
  try {
    Measure mu = measure_from_node(j, base_dir);
    validate(mu);
    return mu;
  } catch (const json::exception& e) {
    fail(errc::validation_error, std::string("malformed measure document: ") + e.what());
  }
}

void save_measure(const Measure& mu, const std::string& path) {
  const std::filesystem::path p(path);
  SidecarPlan plan;
  plan.hint = p.stem().string() + ".hgrd";
  json j = measure_node(mu, plan);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::validation_error, "cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
  for (const auto& [name, grid] : plan.files) {
    const std::filesystem::path side = p.parent_path() / name;
    write_hgrd(side.string(), mu.dimension, grid->cells_per_axis, grid->samples);
  }
}

Measure load_measure(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::validation_error, "cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return measure_from_json(text,
                           std::filesystem::path(path).parent_path().string());
}

void write_hgrd(const std::string& path, int dimension, int cells_per_axis,
                const std::vector<double>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::validation_error, "cannot open '" + path + "' for writing");
  const char magic[4] = {'H', 'G', 'R', 'D'};
  out.write(magic, 4);
  const std::uint32_t header[3] = {1u, static_cast<std::uint32_t>(dimension),
                                   static_cast<std::uint32_t>(cells_per_axis)};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(samples.data()),
            static_cast<std::streamsize>(samples.size() * sizeof(double)));
  if (!out) fail(errc::validation_error, "short write to '" + path + "'");
}

std::vector<double> read_hgrd(const std::string& path, int* dimension,
                              int* cells_per_axis) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::validation_error, "cannot open '" + path + "'");
  char magic[4] = {};
  std::uint32_t header[3] = {};
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in || std::memcmp(magic, "HGRD", 4) != 0)
    fail(errc::validation_error, "'" + path + "' is not a sample sidecar");
  if (header[0] != 1u)
    fail(errc::validation_error, "unsupported sidecar version");
  const int N = static_cast<int>(header[1]);
  const int cells = static_cast<int>(header[2]);
  if (N < 1 || N > 3 || cells < 1 || cells > 100000)
    fail(errc::validation_error, "sidecar header out of range");
  std::size_t count = 1;
  for (int d = 0; d < N; ++d) count *= static_cast<std::size_t>(cells);
  std::vector<double> samples(count);
  in.read(reinterpret_cast<char*>(samples.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) fail(errc::validation_error, "sidecar truncated");
  if (dimension) *dimension = N;
  if (cells_per_axis) *cells_per_axis = cells;
  return samples;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace hg::io
