#include "commfield/config.hpp"

#include "commfield/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace commfield {

using nlohmann::json;

namespace {

std::string type_name(const json& v) { return v.type_name(); }

// Reads keys out of one JSON object, records resolved values in `echo` and rejects
// whatever it was not asked for.
class Reader {
 public:
  Reader(const json& object, std::string prefix, json& echo) : obj_(object), prefix_(std::move(prefix)), echo_(echo) {
    if (!obj_.is_object()) throw ConfigError("config: '" + where() + "' must be an object");
    if (!echo_.is_object()) echo_ = json::object();
  }

  std::string key_path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  bool has(const std::string& key) const { return obj_.contains(key); }

  double number(const std::string& key, double fallback) {
    const double v = has(key) ? as_number(take(key), key) : fallback;
    echo_[key] = v;
    return v;
  }

  Index integer(const std::string& key, Index fallback) {
    Index v = fallback;
    if (has(key)) {
      const json& j = take(key);
      if (!j.is_number_integer()) throw ConfigError("config: '" + key_path(key) + "' must be an integer");
      v = j.get<Index>();
    }
    echo_[key] = v;
    return v;
  }

  bool flag(const std::string& key, bool fallback) {
    bool v = fallback;
    if (has(key)) {
      const json& j = take(key);
      if (!j.is_boolean()) throw ConfigError("config: '" + key_path(key) + "' must be true or false");
      v = j.get<bool>();
    }
    echo_[key] = v;
    return v;
  }

  std::string text(const std::string& key, const std::string& fallback) {
    std::string v = fallback;
    if (has(key)) {
      const json& j = take(key);
      if (!j.is_string()) throw ConfigError("config: '" + key_path(key) + "' must be a string");
      v = j.get<std::string>();
    }
    echo_[key] = v;
    return v;
  }

  std::string required_text(const std::string& key) {
    if (!has(key)) throw ConfigError("config: missing key '" + key_path(key) + "'");
    return text(key, "");
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback, std::size_t size = 0) {
    std::vector<double> v = std::move(fallback);
    if (has(key)) {
      const json& j = take(key);
      if (!j.is_array()) throw ConfigError("config: '" + key_path(key) + "' must be an array of numbers");
      v.clear();
      for (const auto& e : j) v.push_back(as_number(e, key));
    }
    if (size && v.size() != size)
      throw ConfigError("config: '" + key_path(key) + "' must have " + std::to_string(size) + " entries");
    echo_[key] = v;
    return v;
  }

  std::vector<Index> integers(const std::string& key, std::vector<Index> fallback) {
    std::vector<Index> v = std::move(fallback);
    if (has(key)) {
      const json& j = take(key);
      if (!j.is_array()) throw ConfigError("config: '" + key_path(key) + "' must be an array of integers");
      v.clear();
      for (const auto& e : j) {
        if (!e.is_number_integer()) throw ConfigError("config: '" + key_path(key) + "' must be an array of integers");
        v.push_back(e.get<Index>());
      }
    }
    echo_[key] = v;
    return v;
  }

  Point point(const std::string& key, const Point& fallback) {
    const auto v = numbers(key, {fallback.x(), fallback.y()}, 2);
    return {v[0], v[1]};
  }

  std::vector<std::string> texts(const std::string& key, std::vector<std::string> fallback) {
    std::vector<std::string> v = std::move(fallback);
    if (has(key)) {
      const json& j = take(key);
      if (!j.is_array()) throw ConfigError("config: '" + key_path(key) + "' must be an array of strings");
      v.clear();
      for (const auto& e : j) {
        if (!e.is_string()) throw ConfigError("config: '" + key_path(key) + "' must be an array of strings");
        v.push_back(e.get<std::string>());
      }
    }
    echo_[key] = v;
    return v;
  }

  /// Raw value, marked as read; the caller echoes it.
  const json& take(const std::string& key) {
    used_.insert(key);
    return obj_.at(key);
  }

  Reader child(const std::string& key) { return Reader(take(key), key_path(key), echo_[key]); }

  json& echo() { return echo_; }

  void finish() const {
    for (const auto& [key, value] : obj_.items())
      if (!used_.count(key)) throw ConfigError("config: unknown key '" + key_path(key) + "'");
  }

 private:
  std::string where() const { return prefix_.empty() ? "<root>" : prefix_; }

  double as_number(const json& j, const std::string& key) const {
    if (!j.is_number()) throw ConfigError("config: '" + key_path(key) + "' must be a number, got " + type_name(j));
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError("config: '" + key_path(key) + "' must be finite");
    return v;
  }

  const json& obj_;
  std::string prefix_;
  json& echo_;
  std::set<std::string> used_;
};

void require(bool ok, const Reader& r, const std::string& key, const std::string& what) {
  if (!ok) throw ValidationError("config: '" + r.key_path(key) + "' " + what);
}

Box read_box(Reader& r, const std::string& key, const Box& fallback) {
  const auto v = r.numbers(key, {fallback.xmin, fallback.xmax, fallback.ymin, fallback.ymax}, 4);
  require(v[1] > v[0] && v[3] > v[2], r, key, "must be [xmin, xmax, ymin, ymax] with xmin < xmax and ymin < ymax");
  return {v[0], v[1], v[2], v[3]};
}

double positive(Reader& r, const std::string& key, double fallback) {
  const double v = r.number(key, fallback);
  require(v > 0, r, key, "must be positive");
  return v;
}

double non_negative(Reader& r, const std::string& key, double fallback) {
  const double v = r.number(key, fallback);
  require(v >= 0, r, key, "must be non-negative");
  return v;
}

Index count(Reader& r, const std::string& key, Index fallback) {
  const Index v = r.integer(key, fallback);
  require(v >= 1, r, key, "must be >= 1");
  return v;
}

std::vector<Index> grid_list(Reader& r, const std::string& key, std::vector<Index> fallback) {
  const auto v = r.integers(key, std::move(fallback));
  require(!v.empty(), r, key, "must not be empty");
  for (Index g : v) require(g >= 1, r, key, "entries must be >= 1");
  return v;
}

// ---------------------------------------------------------------------------

void read_cloak(Reader& r, RunConfig& c) {
  CloakScenario& s = c.cloak;
  s.domain = read_box(r, "domain", s.domain);
  s.source_x_max = r.number("source_x_max", s.source_x_max);
  require(s.source_x_max > s.domain.xmin && s.source_x_max < s.domain.xmax, r, "source_x_max",
          "must lie strictly inside the domain's x range");
  s.source_f = r.number("source_f", s.source_f);
  s.cloak.center = r.point("center", s.cloak.center);
  s.cloak.a = positive(r, "a", s.cloak.a);
  s.cloak.b = positive(r, "b", s.cloak.b);
  require(s.cloak.a < s.cloak.b, r, "a", "must be less than 'b'");
  s.cloak.epsilon = r.number("epsilon", s.cloak.epsilon);
  require(s.cloak.epsilon > 0 && s.cloak.epsilon < 1, r, "epsilon", "must be in (0, 1)");
  const Point& ctr = s.cloak.center;
  require(ctr.x() - s.cloak.b > s.source_x_max && ctr.x() + s.cloak.b < s.domain.xmax &&
              ctr.y() - s.cloak.b > s.domain.ymin && ctr.y() + s.cloak.b < s.domain.ymax,
          r, "center", "must keep the disk of radius 'b' strictly inside the source-free area");
  s.rho = positive(r, "rho", s.rho);
  s.alpha = positive(r, "alpha", s.alpha);
  s.beta = non_negative(r, "beta", s.beta);
  s.blanket_factor = r.number("blanket_factor", s.blanket_factor);
  require(s.blanket_factor > 0 && s.blanket_factor < 1, r, "blanket_factor", "must be in (0, 1)");
  s.nx = count(r, "nx", s.nx);
  s.ny = count(r, "ny", s.ny);
  s.quadrature_subcells = count(r, "quadrature_subcells", s.quadrature_subcells);
  s.dt = positive(r, "dt", s.dt);
  s.t_snapshot = positive(r, "t_snapshot", s.t_snapshot);
  s.transient = r.flag("transient", s.transient);

  std::vector<std::string> names;
  for (auto v : s.variants) names.push_back(to_string(v));
  s.variants.clear();
  for (const auto& n : r.texts("variants", names)) {
    if (n == "original") s.variants.push_back(CloakVariant::original);
    else if (n == "blanket") s.variants.push_back(CloakVariant::blanket);
    else if (n == "cloaked") s.variants.push_back(CloakVariant::cloaked);
    else throw ConfigError("config: 'variants' has unknown cloak variant '" + n + "'");
  }
  require(!s.variants.empty(), r, "variants", "must not be empty");

  c.epsilon_sweep = r.numbers("epsilon_sweep", {});
  for (double e : c.epsilon_sweep) require(e > 0 && e < 1, r, "epsilon_sweep", "entries must be in (0, 1)");
  c.consistency_samples = r.integer("consistency_samples", c.consistency_samples);
  require(c.consistency_samples >= 0, r, "consistency_samples", "must be >= 0");
  s.validate();
}

void read_bender_spec(Reader& r, BenderSpec& spec) {
  spec.k = positive(r, "k", spec.k);
  spec.a = positive(r, "a", spec.a);
  spec.phi = r.number("phi", spec.phi);
  require(spec.phi > 0 && spec.phi <= 2 * kPi, r, "phi", "must be in (0, 2 pi]");
  spec.r1 = positive(r, "r1", spec.r1);
}

void read_bender(Reader& r, RunConfig& c) {
  BenderScenario& s = c.bender;
  read_bender_spec(r, s.spec);
  std::vector<std::string> names;
  for (auto v : s.variants) names.push_back(to_string(v));
  s.variants.clear();
  for (const auto& n : r.texts("variants", names)) {
    if (n == "homogeneous-arc") s.variants.push_back(BenderVariant::homogeneous_arc);
    else if (n == "eq8-derived") s.variants.push_back(BenderVariant::eq8_derived);
    else if (n == "eq11-paper") s.variants.push_back(BenderVariant::eq11_paper);
    else throw ConfigError("config: 'variants' has unknown bender variant '" + n + "'");
  }
  require(!s.variants.empty(), r, "variants", "must not be empty");
  if (std::find(s.variants.begin(), s.variants.end(), BenderVariant::eq11_paper) != s.variants.end()) {
    require(std::abs(s.spec.phi - kPi / 2) <= 1e-12, r, "phi",
            "must be pi/2 when the eq11-paper variant is selected (its closed form only holds for phi = pi/2, k = 1)");
    require(std::abs(s.spec.k - 1.0) <= 1e-12, r, "k", "must be 1 when the eq11-paper variant is selected");
  }
  s.u_input = positive(r, "u_input", s.u_input);
  s.rho = positive(r, "rho", s.rho);
  s.alpha = positive(r, "alpha", s.alpha);
  s.beta = non_negative(r, "beta", s.beta);
  s.nr = count(r, "nr", s.nr);
  s.ntheta = count(r, "ntheta", s.ntheta);
  s.dt = positive(r, "dt", s.dt);
  s.t_end = positive(r, "t_end", s.t_end);
  s.snapshot_interval = positive(r, "snapshot_interval", s.snapshot_interval);
  s.arrival_dt = positive(r, "arrival_dt", s.arrival_dt);
  s.arrival_t_max = positive(r, "arrival_t_max", s.arrival_t_max);
  s.threshold = r.number("threshold", s.threshold);
  require(s.threshold > 0 && s.threshold < 1, r, "threshold", "must be in (0, 1)");
  s.validate();
}

void read_pullback(Reader& r, RunConfig& c) {
  PullbackScenario& s = c.pullback;
  const std::string map = r.text("map", to_string(s.map));
  if (map == "scale") s.map = PullbackMap::scale;
  else if (map == "affine") s.map = PullbackMap::affine;
  else if (map == "bender") s.map = PullbackMap::bender;
  else throw ConfigError("config: 'map' must be one of scale, affine, bender (got '" + map + "')");
  s.domain = read_box(r, "domain", s.domain);
  s.scale = positive(r, "scale", s.scale);
  const auto lin = r.numbers("linear", {s.linear(0, 0), s.linear(0, 1), s.linear(1, 0), s.linear(1, 1)}, 4);
  s.linear << lin[0], lin[1], lin[2], lin[3];
  require(s.linear.determinant() > 0, r, "linear", "must have a positive determinant");
  s.offset = r.point("offset", s.offset);
  read_bender_spec(r, s.bender);
  s.rho = positive(r, "rho", s.rho);
  s.alpha = positive(r, "alpha", s.alpha);
  s.beta = non_negative(r, "beta", s.beta);
  s.u_left = r.number("u_left", s.u_left);
  s.grids = grid_list(r, "grids", s.grids);
  s.validate();
}

void read_convergence(Reader& r, RunConfig& c) {
  ConvergenceScenario& s = c.convergence;
  const std::string b = r.text("benchmark", to_string(s.benchmark));
  if (b == "reaction-diffusion") s.benchmark = Benchmark::reaction_diffusion;
  else if (b == "pullback-scale") s.benchmark = Benchmark::pullback_scale;
  else if (b == "pullback-bender") s.benchmark = Benchmark::pullback_bender;
  else throw ConfigError("config: 'benchmark' must be one of reaction-diffusion, pullback-scale, pullback-bender");
  s.beta = positive(r, "beta", s.beta);
  s.grids = grid_list(r, "grids", s.grids);
  require(s.grids.size() >= 3, r, "grids", "needs at least three entries");
  for (std::size_t k = 1; k < s.grids.size(); ++k)
    require(s.grids[k] == 2 * s.grids[k - 1], r, "grids", "must double from one entry to the next");
}

// --- custom -----------------------------------------------------------------

// Unset keys keep the values of `p`; alpha is a number or [xx, xy, yy].
ParameterSample read_params(Reader& r, ParameterSample p) {
  p.rho = non_negative(r, "rho", p.rho);
  if (r.has("alpha") && r.take("alpha").is_array()) {
    const auto a = r.numbers("alpha", {}, 3);
    p.alpha = {a[0], a[1], a[2]};
  } else if (r.has("alpha") || p.alpha.is_isotropic()) {
    p.alpha = SymTensor2<double>::isotropic(non_negative(r, "alpha", p.alpha.xx));
  } else {
    r.echo()["alpha"] = {p.alpha.xx, p.alpha.xy, p.alpha.yy};
  }
  require(is_admissible(p), r, "alpha", "must be symmetric positive definite");
  p.beta = non_negative(r, "beta", p.beta);
  p.f = r.number("f", p.f);
  r.finish();
  return p;
}

CloakSpec read_cloak_spec(Reader& r) {
  CloakSpec spec;
  spec.center = r.point("center", spec.center);
  spec.a = positive(r, "a", spec.a);
  spec.b = positive(r, "b", spec.b);
  require(spec.a < spec.b, r, "a", "must be less than 'b'");
  spec.epsilon = r.number("epsilon", spec.epsilon);
  require(spec.epsilon > 0 && spec.epsilon < 1, r, "epsilon", "must be in (0, 1)");
  return spec;
}

Region read_region(Reader& r) {
  const std::string shape = r.required_text("shape");
  Region region;
  if (shape == "rectangle") {
    const auto x = r.numbers("x", {}, 2), y = r.numbers("y", {}, 2);
    region = Rectangle{x[0], x[1], y[0], y[1]};
  } else if (shape == "disk") {
    region = Disk{r.point("center", Point(0, 0)), positive(r, "radius", 1.0)};
  } else if (shape == "annulus") {
    region = Annulus{r.point("center", Point(0, 0)), positive(r, "inner", 1.0), positive(r, "outer", 2.0)};
  } else if (shape == "annular-sector") {
    const Point c = r.point("center", Point(0, 0));
    const double ri = positive(r, "inner", 1.0), ro = positive(r, "outer", 2.0);
    const auto th = r.numbers("theta", {0.0, kPi / 2}, 2);
    region = AnnularSector{c, ri, ro, th[0], th[1]};
  } else if (shape == "half-plane") {
    region = HalfPlane{r.point("normal", Point(1, 0)), r.number("offset", 0.0)};
  } else {
    throw ConfigError("config: '" + r.key_path("shape") + "' has unknown shape '" + shape + "'");
  }
  try {
    validate(region);
  } catch (const Error& e) {
    throw ValidationError("config: '" + r.key_path("shape") + "': " + e.what());
  }
  return region;
}

ParameterField read_materials(Reader& r, const Box& bounds) {
  const ParameterSample unit{1.0, SymTensor2<double>::isotropic(1.0), 0.0, 0.0};
  ParameterSample fallback;
  if (r.has("default")) {
    Reader d = r.child("default");
    fallback = read_params(d, unit);
  } else {
    json empty = json::object();
    Reader d(empty, r.key_path("default"), r.echo()["default"]);
    fallback = read_params(d, unit);
  }
  std::vector<RegionRule> entries;
  if (r.has("regions")) {
    const json& list = r.take("regions");
    if (!list.is_array()) throw ConfigError("config: '" + r.key_path("regions") + "' must be an array");
    json& echo_list = r.echo()["regions"] = json::array();
    for (std::size_t k = 0; k < list.size(); ++k) {
      echo_list.push_back(json::object());
      Reader e(list[k], r.key_path("regions") + "[" + std::to_string(k) + "]", echo_list.back());
      const Region region = read_region(e);
      const bool has_params = e.has("params"), has_cloak = e.has("cloak");
      if (has_params == has_cloak)
        throw ConfigError("config: '" + e.key_path("params") + "': give exactly one of 'params' or 'cloak'");
      if (has_params) {
        Reader p = e.child("params");
        entries.push_back({region, constant_rule(read_params(p, fallback))});
      } else {
        Reader cl = e.child("cloak");
        const CloakSpec spec = read_cloak_spec(cl);
        ParameterSample base = fallback;
        if (cl.has("base")) {
          Reader b = cl.child("base");
          base = read_params(b, fallback);
        }
        cl.finish();
        entries.push_back({region, cloak_rule(spec, base)});
      }
      e.finish();
    }
  }
  r.finish();
  return piecewise_params(std::move(entries), constant_rule(fallback), bounds);
}

Mapping read_map(Reader& r) {
  const std::string kind = r.required_text("kind");
  Mapping m = identity_mapping();
  if (kind == "identity") {
    m = identity_mapping();
  } else if (kind == "scale") {
    m = scale_mapping(positive(r, "factor", 2.0));
  } else if (kind == "affine") {
    const auto lin = r.numbers("linear", {1, 0, 0, 1}, 4);
    const Point off = r.point("offset", Point(0, 0));
    Eigen::Matrix2d a;
    a << lin[0], lin[1], lin[2], lin[3];
    require(a.determinant() > 0, r, "linear", "must have a positive determinant");
    m = affine_mapping(a, off);
  } else if (kind == "cloak") {
    m = cloak_mapping(read_cloak_spec(r));
  } else if (kind == "bender") {
    BenderSpec spec;
    read_bender_spec(r, spec);
    m = bender_mapping(spec);
  } else {
    throw ConfigError("config: '" + r.key_path("kind") + "' has unknown map '" + kind + "'");
  }
  r.finish();
  return m;
}

void read_custom(Reader& r, RunConfig& c) {
  CustomScenario& s = c.custom;
  {
    json empty = json::object();
    const bool given = r.has("mesh");
    Reader m = given ? r.child("mesh") : Reader(empty, "mesh", r.echo()["mesh"]);
    const std::string kind = m.text("kind", "cartesian");
    if (kind == "cartesian") {
      const auto x = m.numbers("x", {0.0, 1.0}, 2), y = m.numbers("y", {0.0, 1.0}, 2);
      require(x[1] > x[0], m, "x", "must be increasing");
      require(y[1] > y[0], m, "y", "must be increasing");
      s.mesh = build_cartesian_mesh({x[0], x[1]}, {y[0], y[1]}, count(m, "nx", 32), count(m, "ny", 32));
    } else if (kind == "annular-sector") {
      const double r1 = positive(m, "r1", 1.0);
      const double r2 = positive(m, "r2", 2.0);
      require(r2 > r1, m, "r2", "must exceed 'r1'");
      const double phi = m.number("phi", kPi / 2);
      require(phi > 0 && phi <= 2 * kPi, m, "phi", "must be in (0, 2 pi]");
      s.mesh = build_annular_sector_mesh(r1, r2, phi, count(m, "nr", 32), count(m, "ntheta", 32));
    } else {
      throw ConfigError("config: 'mesh.kind' must be cartesian or annular-sector");
    }
    m.finish();
  }
  {
    json empty = json::object();
    Reader mat = r.has("materials") ? r.child("materials") : Reader(empty, "materials", r.echo()["materials"]);
    s.params = read_materials(mat, Box::unbounded());
  }
  if (r.has("map")) {
    Reader m = r.child("map");
    s.map = read_map(m);
  }
  if (!r.has("boundary")) throw ConfigError("config: missing key 'boundary'");
  {
    Reader b = r.child("boundary");
    const json& raw = r.take("boundary");
    for (const auto& [tag, value] : raw.items()) {
      if (!s.mesh.boundary_tags.count(tag))
        throw ConfigError("config: unknown key 'boundary." + tag + "' (not a boundary tag of this mesh)");
      if (value.is_string() && value.get<std::string>() == "insulated") {
        b.take(tag);
        b.echo()[tag] = "insulated";
        s.bcs[tag] = insulated();
        continue;
      }
      Reader t = b.child(tag);
      const bool d = t.has("dirichlet"), n = t.has("neumann");
      if (d == n) throw ConfigError("config: 'boundary." + tag + "' needs exactly one of 'dirichlet' or 'neumann'");
      if (d) s.bcs[tag] = dirichlet(t.number("dirichlet", 0.0));
      else s.bcs[tag] = neumann(t.number("neumann", 0.0));
      t.finish();
    }
    for (const auto& [tag, edges] : s.mesh.boundary_tags)
      if (!s.bcs.count(tag)) throw ConfigError("config: missing key 'boundary." + tag + "'");
  }
  const std::string mode = r.text("mode", "steady");
  if (mode == "steady") s.mode = SolveMode::steady;
  else if (mode == "transient") s.mode = SolveMode::transient;
  else throw ConfigError("config: 'mode' must be steady or transient");
  s.dt = positive(r, "dt", s.dt);
  s.t_end = positive(r, "t_end", s.t_end);
  s.snapshot_times = r.numbers("snapshot_times", {});
  for (double t : s.snapshot_times) require(t >= 0 && t <= s.t_end, r, "snapshot_times", "entries must be in [0, t_end]");
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::cloak: return "cloak";
    case ScenarioKind::bender: return "bender";
    case ScenarioKind::pullback: return "pullback";
    case ScenarioKind::convergence: return "convergence";
    case ScenarioKind::custom: return "custom";
  }
  return "?";
}

ScenarioKind scenario_kind(const std::string& name) {
  for (auto k : {ScenarioKind::cloak, ScenarioKind::bender, ScenarioKind::pullback, ScenarioKind::convergence,
                 ScenarioKind::custom})
    if (to_string(k) == name) return k;
  throw ConfigError("config: 'scenario' must be one of cloak, bender, pullback, convergence, custom (got '" + name + "')");
}

RunConfig parse_config(const std::string& text, std::optional<ScenarioKind> expected) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    std::string detail = e.what();
    if (const auto p = detail.find("syntax error"); p != std::string::npos) detail = detail.substr(p);
    throw ConfigError("config: line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + detail);
  }
  RunConfig c;
  Reader r(doc, "", c.echo);
  if (!r.has("scenario") && !expected) throw ConfigError("config: missing key 'scenario'");
  const std::string name = r.text("scenario", expected ? to_string(*expected) : "");
  c.kind = scenario_kind(name);
  if (expected && c.kind != *expected)
    throw ConfigError("config: 'scenario' is '" + name + "' but the command is '" + to_string(*expected) + "'");

  {
    json empty = json::object();
    Reader o = r.has("outputs") ? r.child("outputs") : Reader(empty, "outputs", c.echo["outputs"]);
    c.outputs.field_csv = o.flag("field_csv", c.outputs.field_csv);
    c.outputs.vtk = o.flag("vtk", c.outputs.vtk);
    c.outputs.pgm = o.flag("pgm", c.outputs.pgm);
    c.outputs.contours = o.flag("contours", c.outputs.contours);
    c.outputs.metrics = o.flag("metrics", c.outputs.metrics);
    o.finish();
  }

  switch (c.kind) {
    case ScenarioKind::cloak: read_cloak(r, c); break;
    case ScenarioKind::bender: read_bender(r, c); break;
    case ScenarioKind::pullback: read_pullback(r, c); break;
    case ScenarioKind::convergence: read_convergence(r, c); break;
    case ScenarioKind::custom: read_custom(r, c); break;
  }
  r.finish();
  return c;
}

json config_to_json(const RunConfig& config) { return config.echo; }

// ---------------------------------------------------------------------------

namespace {

std::string sweep_key(double eps, const char* metric) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "epsilon_sweep/%.3e/%s", eps, metric);
  return buf;
}

}  // namespace

ScenarioOutput run_scenario(const RunConfig& c, std::uint64_t seed) {
  ScenarioOutput out;
  switch (c.kind) {
    case ScenarioKind::cloak: {
      CloakExperiment ex = run_cloak_experiment(c.cloak);
      out.report = std::move(ex.report);
      const Mesh& mesh = out.meshes.emplace_back(std::move(ex.mesh));
      for (const auto& run : ex.runs) {
        out.fields.push_back({to_string(run.variant), &mesh, run.steady.values});
        if (run.transient) out.fields.push_back({to_string(run.variant) + "_transient", &mesh, run.transient->values});
      }
      if (!c.epsilon_sweep.empty()) {
        const auto sweep = cloak_epsilon_study(c.cloak, c.epsilon_sweep);
        bool leak_ok = true, mismatch_ok = true;
        for (std::size_t k = 0; k < sweep.size(); ++k) {
          out.report.summary[sweep_key(sweep[k].epsilon, "exterior_mismatch")] = sweep[k].exterior_mismatch;
          out.report.summary[sweep_key(sweep[k].epsilon, "interior_leakage")] = sweep[k].interior_leakage;
          if (k > 0 && sweep[k].epsilon < sweep[k - 1].epsilon) {
            if (sweep[k].interior_leakage > sweep[k - 1].interior_leakage) leak_ok = false;
            if (sweep[k].exterior_mismatch > sweep[k - 1].exterior_mismatch) mismatch_ok = false;
          }
        }
        out.report.summary["epsilon_sweep/leakage_nonincreasing"] = leak_ok ? 1.0 : 0.0;
        out.report.summary["epsilon_sweep/mismatch_nonincreasing"] = mismatch_ok ? 1.0 : 0.0;
      }
      if (c.consistency_samples > 0) {
        const ParameterSample base{c.cloak.rho, SymTensor2<double>::isotropic(c.cloak.alpha), c.cloak.beta, 0.0};
        out.report.summary["closed_form_consistency_error"] =
            cloak_consistency_error(c.cloak.cloak, base, c.consistency_samples, seed);
      }
      break;
    }
    case ScenarioKind::bender: {
      BenderExperiment ex = run_bender_experiment(c.bender);
      out.report = std::move(ex.report);
      const Mesh& mesh = out.meshes.emplace_back(std::move(ex.mesh));
      for (const auto& run : ex.runs) {
        out.fields.push_back({to_string(run.variant), &mesh, run.steady.values});
        out.fields.push_back({to_string(run.variant) + "_transient", &mesh, run.transient.values});
      }
      break;
    }
    case ScenarioKind::pullback: {
      PullbackExperiment ex = run_pullback_experiment(c.pullback);
      out.report = std::move(ex.report);
      PullbackResult& finest = ex.runs.back();
      const Mesh& original = out.meshes.emplace_back(std::move(finest.original_mesh));
      const Mesh& mapped = out.meshes.emplace_back(std::move(finest.mapped_mesh));
      out.fields.push_back({"original", &original, finest.original.values});
      out.fields.push_back({"transformed", &mapped, finest.transformed.values});
      break;
    }
    case ScenarioKind::convergence: {
      out.report = run_convergence_experiment(c.convergence).report;
      break;
    }
    case ScenarioKind::custom: {
      CustomExperiment ex = run_custom_experiment(c.custom);
      out.report = std::move(ex.report);
      const Mesh& mesh = out.meshes.emplace_back(std::move(ex.mesh));
      out.fields.push_back({"custom", &mesh, ex.solution.values});
      break;
    }
  }
  out.report.provenance["seed"] = static_cast<double>(seed);
  return out;
}

}  // namespace commfield
