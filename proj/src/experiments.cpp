#include "commfield/experiments.hpp"

#include "commfield/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

namespace commfield {

namespace {

void require_size(const Mesh& mesh, const Eigen::VectorXd& u, const char* where) {
  if (u.size() != mesh.node_count())
    throw ComparisonError(std::string(where) + ": field size does not match the mesh");
}

}  // namespace

// ---------------------------------------------------------------------------
// Metrics

double exterior_mismatch(const Mesh& mesh, const Eigen::VectorXd& ua, const Eigen::VectorXd& ub,
                         const PointPredicate& region) {
  require_size(mesh, ua, "exterior_mismatch");
  require_size(mesh, ub, "exterior_mismatch");
  double diff = 0.0, ref = 0.0;
  for (Index i = 0; i < mesh.node_count(); ++i) {
    if (!region(mesh.nodes[static_cast<std::size_t>(i)])) continue;
    diff += (ua(i) - ub(i)) * (ua(i) - ub(i));
    ref += ua(i) * ua(i);
  }
  if (diff == 0.0) return 0.0;
  if (ref == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(diff / ref);
}

double max_abs_in(const Mesh& mesh, const Eigen::VectorXd& u, const PointPredicate& region) {
  require_size(mesh, u, "max_abs_in");
  double m = 0.0;
  for (Index i = 0; i < mesh.node_count(); ++i)
    if (region(mesh.nodes[static_cast<std::size_t>(i)])) m = std::max(m, std::abs(u(i)));
  return m;
}

std::vector<double> crossing_times(const std::vector<Snapshot>& snapshots, std::span<const Index> probes,
                                   double threshold, double u_input) {
  if (!(threshold > 0 && threshold < 1)) throw ValidationError("crossing_times: threshold must be in (0, 1)");
  if (snapshots.empty()) throw ValidationError("crossing_times: no snapshots");
  const double target = threshold * u_input;
  std::vector<double> times;
  times.reserve(probes.size());
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const Index node = probes[p];
    std::optional<double> hit;
    if (snapshots.front().values(node) >= target) hit = snapshots.front().time;
    for (std::size_t k = 1; k < snapshots.size() && !hit; ++k) {
      const double v0 = snapshots[k - 1].values(node), v1 = snapshots[k].values(node);
      if (v1 >= target) {
        const double t0 = snapshots[k - 1].time, t1 = snapshots[k].time;
        hit = v1 > v0 ? t0 + (target - v0) / (v1 - v0) * (t1 - t0) : t1;
      }
    }
    if (!hit) {
      std::ostringstream msg;
      msg << "probe " << p << " (node " << node << ") never reaches " << target;
      throw NonArrivalError(p, msg.str());
    }
    times.push_back(*hit);
  }
  return times;
}

double arrival_spread(const std::vector<double>& times) {
  if (times.size() < 2) throw ValidationError("arrival_spread: need at least two probes");
  const auto [lo, hi] = std::minmax_element(times.begin(), times.end());
  const double mean = std::accumulate(times.begin(), times.end(), 0.0) / static_cast<double>(times.size());
  if (*hi == *lo) return 0.0;
  return (*hi - *lo) / mean;
}

double arrival_spread(const std::vector<Snapshot>& snapshots, std::span<const Index> probes, double threshold,
                      double u_input) {
  return arrival_spread(crossing_times(snapshots, probes, threshold, u_input));
}

double contour_straightness(const Mesh& mesh, const Eigen::VectorXd& u) {
  if (mesh.layout != MeshLayout::annular_sector)
    throw UnsupportedError("contour_straightness: needs an annular-sector mesh");
  require_size(mesh, u, "contour_straightness");
  const double range = u.maxCoeff() - u.minCoeff();
  if (range == 0.0) return 0.0;
  double worst = 0.0;
  for (Index i = 0; i <= mesh.ni; ++i) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (Index j = 0; j <= mesh.nj; ++j) {
      const double v = u(mesh.node_index(i, j));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    worst = std::max(worst, hi - lo);
  }
  return worst / range;
}

double l2_error(const Mesh& mesh, const Eigen::VectorXd& u, const std::function<double(const Point&)>& exact) {
  require_size(mesh, u, "l2_error");
  static const double q = std::sqrt(0.6);
  const double pts[3] = {-q, 0.0, q};
  const double wts[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  double sum = 0.0;
  for (Index e = 0; e < mesh.element_count(); ++e) {
    const auto coords = element_coordinates(mesh, e);
    const auto& nodes = mesh.elements[static_cast<std::size_t>(e)];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const Point xi(pts[a], pts[b]);
        const auto n = shape_values(xi);
        double uh = 0.0;
        for (std::size_t k = 0; k < 4; ++k) uh += n[k] * u(nodes[k]);
        const double err = uh - exact(bilinear_map(coords, xi));
        sum += wts[a] * wts[b] * element_jacobian(coords, xi).determinant() * err * err;
      }
  }
  return std::sqrt(sum);
}

// ---------------------------------------------------------------------------
// Oracles

double solve_rod_1d(const RodProblem& rod, double t, double x) {
  const double L = rod.length;
  if (t <= 0.0) return x <= 0.0 ? rod.u_left : 0.0;
  const double m = std::sqrt(rod.beta / rod.alpha);
  double steady;
  if (m == 0.0) {
    steady = rod.u_left * (1.0 - x / L);
  } else {
    // sinh(m (L - x)) / sinh(m L) without overflow
    steady = rod.u_left * std::exp(-m * x) * -std::expm1(-2.0 * m * (L - x)) / -std::expm1(-2.0 * m * L);
  }
  double series = 0.0;
  for (long n = 1; n < 100'000'000; ++n) {
    const double k = static_cast<double>(n) * kPi / L;
    const double coeff = 2.0 / L * rod.u_left * k / (m * m + k * k);
    const double decay = std::exp(-(rod.alpha * k * k + rod.beta) / rod.rho * t);
    series += coeff * decay * std::sin(k * x);
    const double k_next = k + kPi / L;
    const double bound = 2.0 / L * std::abs(rod.u_left) * k_next / (m * m + k_next * k_next) *
                         std::exp(-(rod.alpha * k_next * k_next + rod.beta) / rod.rho * t);
    if (bound < 1e-12) break;
  }
  return steady - series;
}

// ---------------------------------------------------------------------------
// Pullback identity

PullbackResult pullback_solve(const Mapping& map, const ParameterField& base, const BoundaryCondition& bcs,
                              const Box& domain, Index nx, Index ny, ParameterRule outside_image) {
  Mesh original = build_cartesian_mesh({domain.xmin, domain.xmax}, {domain.ymin, domain.ymax}, nx, ny);
  Mesh mapped = map_mesh(original, map);

  BoundaryCondition mapped_bcs;
  for (const auto& [tag, data] : bcs) {
    if (const auto* d = std::get_if<Dirichlet>(&data)) {
      auto value = d->value;
      mapped_bcs[tag] = Dirichlet{[value, map](const Point& y) { return value(map.inverse(y)); }};
    } else {
      if (std::get<Neumann>(data).flux != 0.0)
        throw UnsupportedError("pullback_check: only insulated Neumann boundaries are supported");
      mapped_bcs[tag] = insulated();
    }
  }

  const ParameterField pushed = pushed_forward_field(map, base, std::move(outside_image));
  FieldSolution u = solve_steady(assemble_system(original, base, bcs));
  FieldSolution v = solve_steady(assemble_system(mapped, pushed, mapped_bcs));
  const double mismatch = exterior_mismatch(original, u.values, v.values, [](const Point&) { return true; });
  return {mismatch, std::move(original), std::move(mapped), std::move(u), std::move(v)};
}

double pullback_check(const Mapping& map, const ParameterField& base, const BoundaryCondition& bcs,
                      const Box& domain, Index nx, Index ny) {
  return pullback_solve(map, base, bcs, domain, nx, ny).mismatch;
}

// ---------------------------------------------------------------------------
// Convergence

ConvergenceResult convergence_study(const std::function<double(Index)>& scenario, std::span<const Index> grids) {
  if (grids.size() < 3) throw ValidationError("convergence_study: need at least three grids");
  for (std::size_t k = 1; k < grids.size(); ++k)
    if (grids[k] != 2 * grids[k - 1]) throw ValidationError("convergence_study: grids must double");
  ConvergenceResult out;
  for (Index g : grids) out.points.push_back({g, scenario(g)});

  bool positive = true;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : out.points) {
    if (!(p.metric > 0)) positive = false;
    const double x = std::log(static_cast<double>(p.grid));
    const double y = -std::log(p.metric);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(out.points.size());
  out.fitted_order = positive ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

double reaction_diffusion_error(Index n, double beta) {
  const Mesh mesh = build_cartesian_mesh({0.0, 1.0}, {0.0, 1.0}, n, n);
  const BoundaryCondition bcs{{"left", dirichlet(1.0)}, {"right", dirichlet(0.0)}, {"top", insulated()},
                              {"bottom", insulated()}};
  const FieldSolution u = solve_steady(assemble_system(mesh, homogeneous_params(1.0, 1.0, beta, 0.0), bcs));
  const double m = std::sqrt(beta);
  return l2_error(mesh, u.values, [m](const Point& p) { return std::sinh(m * (1.0 - p.x())) / std::sinh(m); });
}

double rod_transient_error(Index n, double dt, const std::vector<double>& times) {
  const Mesh mesh = build_cartesian_mesh({0.0, 1.0}, {0.0, 1.0}, n, n);
  const BoundaryCondition bcs{{"left", dirichlet(1.0)}, {"right", dirichlet(0.0)}, {"top", insulated()},
                              {"bottom", insulated()}};
  const AssembledSystem sys = assemble_system(mesh, homogeneous_params(1.0, 1.0, 0.0, 0.0), bcs);
  FieldSolution u0;
  u0.values = Eigen::VectorXd::Zero(mesh.node_count());
  const double t_end = *std::max_element(times.begin(), times.end());
  const FieldSolution run = run_transient(sys, u0, dt, t_end, times);
  const RodProblem rod{};
  double worst = 0.0;
  for (const auto& snap : run.snapshots) {
    if (std::find(times.begin(), times.end(), snap.time) == times.end()) continue;
    for (Index i = 0; i < mesh.node_count(); ++i)
      worst = std::max(worst, std::abs(snap.values(i) - solve_rod_1d(rod, snap.time, mesh.nodes[static_cast<std::size_t>(i)].x())));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Cloak scenario

std::string to_string(CloakVariant v) {
  switch (v) {
    case CloakVariant::original: return "original";
    case CloakVariant::blanket: return "blanket";
    case CloakVariant::cloaked: return "cloaked";
  }
  return "?";
}

void CloakScenario::validate() const {
  cloak.validate();
  if (!(domain.xmax > domain.xmin && domain.ymax > domain.ymin)) throw ValidationError("cloak scenario: empty domain");
  if (!(rho > 0 && alpha > 0 && beta >= 0)) throw ValidationError("cloak scenario: need rho > 0, alpha > 0, beta >= 0");
  if (!(blanket_factor > 0 && blanket_factor < 1)) throw ValidationError("cloak scenario: blanket_factor must be in (0, 1)");
  if (nx < 1 || ny < 1) throw ValidationError("cloak scenario: grid counts must be >= 1");
  if (!(dt > 0 && t_snapshot > 0)) throw ValidationError("cloak scenario: dt and t_snapshot must be positive");
  const Point& c = cloak.center;
  const double b = cloak.b;
  if (!(c.x() - b > source_x_max && c.x() + b < domain.xmax && c.y() - b > domain.ymin && c.y() + b < domain.ymax))
    throw ValidationError("cloak scenario: cloak disk must lie strictly inside the source-free area");
  if (!(source_x_max > domain.xmin)) throw ValidationError("cloak scenario: empty source area");
}

ParameterField cloak_scenario_params(const CloakScenario& s, CloakVariant variant) {
  const ParameterSample base{s.rho, SymTensor2<double>::isotropic(s.alpha), s.beta, 0.0};
  ParameterSample source = base;
  source.f = s.source_f;
  const Region shell = Annulus{s.cloak.center, s.cloak.a, s.cloak.b};
  const Region area_one = HalfPlane{Point(1.0, 0.0), s.source_x_max};

  std::vector<RegionRule> entries;
  if (variant == CloakVariant::blanket) {
    ParameterSample blanket = base;
    blanket.alpha = SymTensor2<double>::isotropic(s.alpha * s.blanket_factor);
    entries.push_back({shell, constant_rule(blanket)});
  } else if (variant == CloakVariant::cloaked) {
    entries.push_back({shell, cloak_rule(s.cloak, base)});
  }
  entries.push_back({area_one, constant_rule(source)});
  return piecewise_params(std::move(entries), constant_rule(base), s.domain);
}

BoundaryCondition cloak_scenario_bcs() {
  return {{"left", dirichlet(0.0)}, {"right", dirichlet(0.0)}, {"top", dirichlet(0.0)}, {"bottom", dirichlet(0.0)}};
}

PointPredicate cloak_exterior_region(const CloakScenario& s) {
  return [c = s.cloak.center, b = s.cloak.b, x1 = s.source_x_max](const Point& p) {
    return p.x() > x1 && (p - c).norm() > b;
  };
}

PointPredicate cloak_interior_region(const CloakScenario& s) {
  return [c = s.cloak.center, r = 0.9 * s.cloak.a](const Point& p) { return (p - c).norm() <= r; };
}

CloakExperiment run_cloak_experiment(const CloakScenario& s) {
  s.validate();
  CloakExperiment out;
  out.mesh = build_cartesian_mesh({s.domain.xmin, s.domain.xmax}, {s.domain.ymin, s.domain.ymax}, s.nx, s.ny);
  const BoundaryCondition bcs = cloak_scenario_bcs();

  for (CloakVariant v : s.variants) {
    const AssembledSystem sys = assemble_system(out.mesh, cloak_scenario_params(s, v), bcs, {s.quadrature_subcells});
    CloakRun run{v, solve_steady(sys), std::nullopt};
    if (s.transient) {
      FieldSolution u0;
      u0.values = Eigen::VectorXd::Zero(out.mesh.node_count());
      run.transient = run_transient(sys, u0, s.dt, s.t_snapshot, {});
    }
    out.runs.push_back(std::move(run));
  }

  auto& report = out.report;
  report.scenario = "cloak";
  const auto exterior = cloak_exterior_region(s);
  const auto interior = cloak_interior_region(s);
  const auto original = std::find_if(out.runs.begin(), out.runs.end(),
                                     [](const CloakRun& r) { return r.variant == CloakVariant::original; });
  for (const auto& run : out.runs) {
    auto& m = report.variants[to_string(run.variant)];
    m["interior_leakage"] = max_abs_in(out.mesh, run.steady.values, interior);
    m["cg_iterations"] = static_cast<double>(run.steady.iterations);
    if (run.transient) m["interior_leakage_transient"] = max_abs_in(out.mesh, run.transient->values, interior);
    if (original != out.runs.end()) {
      m["exterior_mismatch"] = exterior_mismatch(out.mesh, original->steady.values, run.steady.values, exterior);
      if (run.transient && original->transient)
        m["exterior_mismatch_transient"] =
            exterior_mismatch(out.mesh, original->transient->values, run.transient->values, exterior);
    }
  }
  const auto& vs = report.variants;
  if (vs.count("blanket") && vs.count("cloaked") && vs.at("blanket").count("exterior_mismatch")) {
    const auto& bl = vs.at("blanket");
    const auto& cl = vs.at("cloaked");
    report.summary["blanket_over_cloaked_mismatch"] = bl.at("exterior_mismatch") / cl.at("exterior_mismatch");
    if (bl.count("exterior_mismatch_transient"))
      report.summary["blanket_over_cloaked_mismatch_transient"] =
          bl.at("exterior_mismatch_transient") / cl.at("exterior_mismatch_transient");
  }
  report.provenance = {{"nx", static_cast<double>(s.nx)},
                       {"ny", static_cast<double>(s.ny)},
                       {"dt", s.dt},
                       {"t_snapshot", s.t_snapshot},
                       {"epsilon", s.cloak.epsilon},
                       {"a", s.cloak.a},
                       {"b", s.cloak.b},
                       {"blanket_factor", s.blanket_factor},
                       {"cg_tolerance", SolverSettings{}.tolerance}};
  return out;
}

std::vector<EpsilonPoint> cloak_epsilon_study(const CloakScenario& scenario, const std::vector<double>& epsilons) {
  CloakScenario s = scenario;
  s.validate();
  const Mesh mesh = build_cartesian_mesh({s.domain.xmin, s.domain.xmax}, {s.domain.ymin, s.domain.ymax}, s.nx, s.ny);
  const BoundaryCondition bcs = cloak_scenario_bcs();
  const FieldSolution original = solve_steady(assemble_system(mesh, cloak_scenario_params(s, CloakVariant::original), bcs, {s.quadrature_subcells}));
  std::vector<EpsilonPoint> out;
  for (double eps : epsilons) {
    s.cloak.epsilon = eps;
    s.validate();
    const FieldSolution u = solve_steady(assemble_system(mesh, cloak_scenario_params(s, CloakVariant::cloaked), bcs, {s.quadrature_subcells}));
    out.push_back({eps, exterior_mismatch(mesh, original.values, u.values, cloak_exterior_region(s)),
                   max_abs_in(mesh, u.values, cloak_interior_region(s))});
  }
  return out;
}

double cloak_consistency_error(const CloakSpec& spec, const ParameterSample& base, Index samples,
                               std::uint64_t seed, bool finite_difference) {
  spec.validate();
  if (samples < 1) throw ValidationError("cloak_consistency_error: samples must be >= 1");
  const Mapping map = cloak_mapping(spec);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r_lo = spec.a + spec.epsilon * spec.a;
  auto flat = [](const ParameterSample& p) {
    Eigen::Matrix<double, 6, 1> v;
    v << p.rho, p.alpha.xx, p.alpha.xy, p.alpha.yy, p.beta, p.f;
    return v;
  };
  double worst = 0.0;
  for (Index k = 0; k < samples; ++k) {
    // (r_lo, b]: 1 - unit lies in (0, 1].
    const double rp = r_lo + (spec.b - r_lo) * (1.0 - unit(rng));
    const double theta = 2.0 * kPi * unit(rng);
    const Point image = spec.center + rp * Point(std::cos(theta), std::sin(theta));
    const Point pre = map.inverse(image);
    const Eigen::Matrix2d A = finite_difference ? finite_difference_jacobian(map, pre) : jacobian_at(map, pre);
    const auto ref = flat(push_forward(base, A));
    const auto got = flat(cloak_params(spec, base, image));
    worst = std::max(worst, (got - ref).norm() / ref.norm());
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Bender scenario

std::string to_string(BenderVariant v) {
  switch (v) {
    case BenderVariant::homogeneous_arc: return "homogeneous-arc";
    case BenderVariant::eq8_derived: return "eq8-derived";
    case BenderVariant::eq11_paper: return "eq11-paper";
  }
  return "?";
}

void BenderScenario::validate() const {
  spec.validate();
  if (std::find(variants.begin(), variants.end(), BenderVariant::eq11_paper) != variants.end() &&
      (std::abs(spec.phi - kPi / 2) > 1e-12 || std::abs(spec.k - 1.0) > 1e-12))
    throw ValidationError("bender scenario: the eq11-paper variant requires phi = pi/2 and k = 1");
  if (!(rho > 0 && alpha > 0 && beta >= 0)) throw ValidationError("bender scenario: need rho > 0, alpha > 0, beta >= 0");
  if (nr < 1 || ntheta < 1) throw ValidationError("bender scenario: grid counts must be >= 1");
  if (!(dt > 0 && t_end > 0 && snapshot_interval > 0 && arrival_dt > 0 && arrival_t_max > 0))
    throw ValidationError("bender scenario: time parameters must be positive");
  if (!(threshold > 0 && threshold < 1)) throw ValidationError("bender scenario: threshold must be in (0, 1)");
  if (!(u_input > 0)) throw ValidationError("bender scenario: u_input must be positive");
}

ParameterField bender_scenario_params(const BenderScenario& s, BenderVariant variant) {
  const ParameterField base = homogeneous_params(s.rho, s.alpha, s.beta, 0.0);
  switch (variant) {
    case BenderVariant::homogeneous_arc:
      return base;
    case BenderVariant::eq8_derived:
      return pushed_forward_field(bender_mapping(s.spec), base);
    case BenderVariant::eq11_paper: {
      const ParameterSample sample{s.rho, SymTensor2<double>::isotropic(s.alpha), s.beta, 0.0};
      return ParameterField({}, [spec = s.spec, sample](const Point& p) { return bender_params_paper(spec, sample, p); },
                            Box::unbounded());
    }
  }
  throw UnsupportedError("bender: unknown variant");
}

BoundaryCondition bender_scenario_bcs(const BenderScenario& s, bool outlet_insulated) {
  return {{"AD", dirichlet(s.u_input)},
          {"CB", outlet_insulated ? BoundaryData{insulated()} : BoundaryData{dirichlet(0.0)}},
          {"inner-arc", insulated()},
          {"outer-arc", insulated()}};
}

namespace {

// Advances in chunks of 200 steps, doubling dt per chunk, until every probe has crossed.
std::vector<double> run_until_arrival(const AssembledSystem& sys, std::span<const Index> probes, const BenderScenario& s) {
  constexpr Index kChunk = 200;
  const double target = s.threshold * s.u_input;
  std::vector<std::optional<double>> hit(probes.size());
  std::vector<double> prev(probes.size(), 0.0);

  FieldSolution state;
  state.values = Eigen::VectorXd::Zero(sys.size());
  double t = 0.0, dt = s.arrival_dt;
  while (true) {
    std::vector<double> times;
    for (Index k = 1; k <= kChunk; ++k) times.push_back(static_cast<double>(k) * dt);
    FieldSolution chunk = run_transient(sys, state, dt, static_cast<double>(kChunk) * dt, times);
    double t_prev = t;
    for (const auto& snap : chunk.snapshots) {
      const double ts = t + snap.time;
      for (std::size_t p = 0; p < probes.size(); ++p) {
        const double v = snap.values(probes[p]);
        if (!hit[p] && v >= target) hit[p] = v > prev[p] ? t_prev + (target - prev[p]) / (v - prev[p]) * (ts - t_prev) : ts;
        prev[p] = v;
      }
      t_prev = ts;
    }
    t += static_cast<double>(kChunk) * dt;
    state.values = chunk.values;
    if (std::all_of(hit.begin(), hit.end(), [](const auto& h) { return h.has_value(); })) break;
    if (t >= s.arrival_t_max) {
      const auto miss = static_cast<std::size_t>(std::find(hit.begin(), hit.end(), std::nullopt) - hit.begin());
      std::ostringstream msg;
      msg << "bender arrival: probe " << miss << " did not reach " << target << " by t = " << t;
      throw NonArrivalError(miss, msg.str());
    }
    dt *= 2.0;
  }
  std::vector<double> out;
  for (const auto& h : hit) out.push_back(*h);
  return out;
}

}  // namespace

BenderExperiment run_bender_experiment(const BenderScenario& s) {
  s.validate();
  BenderExperiment out;
  out.mesh = build_annular_sector_mesh(s.spec.r1, s.spec.r2(), s.spec.phi, s.nr, s.ntheta);
  const Mesh& mesh = out.mesh;

  std::vector<Index> probes;
  for (Index j = 0; j <= mesh.nj; ++j) probes.push_back(mesh.node_index(mesh.ni, j));

  std::vector<double> times;
  for (Index k = 1; static_cast<double>(k) * s.snapshot_interval <= s.t_end * (1 + 1e-12); ++k)
    times.push_back(std::min(s.t_end, static_cast<double>(k) * s.snapshot_interval));

  const RodProblem rod{s.spec.length(), s.alpha, s.rho, s.beta, s.u_input};
  const BoundaryCondition through = bender_scenario_bcs(s, false);
  const BoundaryCondition closed = bender_scenario_bcs(s, true);

  for (BenderVariant v : s.variants) {
    const ParameterField params = bender_scenario_params(s, v);
    const AssembledSystem sys = assemble_system(mesh, params, through);
    BenderRun run{v, solve_steady(sys), {}, {}};
    FieldSolution u0;
    u0.values = Eigen::VectorXd::Zero(mesh.node_count());
    run.transient = run_transient(sys, u0, s.dt, s.t_end, times);
    run.arrival_times = run_until_arrival(assemble_system(mesh, params, closed), probes, s);

    auto& m = out.report.variants[to_string(v)];
    m["contour_straightness"] = contour_straightness(mesh, run.steady.values);
    double straight_t = 0.0, rod_err = 0.0;
    for (const auto& snap : run.transient.snapshots) {
      if (snap.time <= 0.0) continue;
      straight_t = std::max(straight_t, contour_straightness(mesh, snap.values));
      for (Index i = 0; i <= mesh.ni; ++i) {
        const double x = s.spec.length() * static_cast<double>(i) / static_cast<double>(mesh.ni);
        const double ref = solve_rod_1d(rod, snap.time, x);
        for (Index j = 0; j <= mesh.nj; ++j)
          rod_err = std::max(rod_err, std::abs(snap.values(mesh.node_index(i, j)) - ref) / s.u_input);
      }
    }
    m["contour_straightness_transient"] = straight_t;
    m["rod_mismatch"] = rod_err;
    m["arrival_spread"] = arrival_spread(run.arrival_times);
    m["arrival_time_min"] = *std::min_element(run.arrival_times.begin(), run.arrival_times.end());
    m["arrival_time_max"] = *std::max_element(run.arrival_times.begin(), run.arrival_times.end());
    out.runs.push_back(std::move(run));
  }

  const auto& vs = out.report.variants;
  if (vs.count("homogeneous-arc") && vs.count("eq8-derived")) {
    const double eq8 = vs.at("eq8-derived").at("arrival_spread");
    out.report.summary["arrival_spread_ratio"] =
        eq8 > 0 ? vs.at("homogeneous-arc").at("arrival_spread") / eq8 : std::numeric_limits<double>::infinity();
  }
  out.report.scenario = "bender";
  out.report.provenance = {{"nr", static_cast<double>(s.nr)},
                           {"ntheta", static_cast<double>(s.ntheta)},
                           {"dt", s.dt},
                           {"t_end", s.t_end},
                           {"arrival_dt", s.arrival_dt},
                           {"threshold", s.threshold},
                           {"k", s.spec.k},
                           {"a", s.spec.a},
                           {"phi", s.spec.phi},
                           {"r1", s.spec.r1},
                           {"cg_tolerance", SolverSettings{}.tolerance}};
  return out;
}

// ---------------------------------------------------------------------------
// Pullback scenario

namespace {

std::string grid_key(const char* prefix, Index n) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s_%04lld", prefix, static_cast<long long>(n));
  return buf;
}

void check_grids(const std::vector<Index>& grids, const char* where) {
  if (grids.empty()) throw ValidationError(std::string(where) + ": grids must not be empty");
  for (Index g : grids)
    if (g < 1) throw ValidationError(std::string(where) + ": grid sizes must be >= 1");
}

}  // namespace

std::string to_string(PullbackMap m) {
  switch (m) {
    case PullbackMap::scale: return "scale";
    case PullbackMap::affine: return "affine";
    case PullbackMap::bender: return "bender";
  }
  return "?";
}

void PullbackScenario::validate() const {
  if (!(domain.xmax > domain.xmin && domain.ymax > domain.ymin) || !domain.is_finite())
    throw ValidationError("pullback scenario: domain must be a finite nonempty rectangle");
  if (!(rho > 0 && alpha > 0 && beta >= 0)) throw ValidationError("pullback scenario: need rho > 0, alpha > 0, beta >= 0");
  if (map == PullbackMap::scale && !(scale > 0)) throw ValidationError("pullback scenario: scale must be positive");
  if (map == PullbackMap::bender) bender.validate();
  check_grids(grids, "pullback scenario");
  mapping();
}

Mapping PullbackScenario::mapping() const {
  switch (map) {
    case PullbackMap::scale: return scale_mapping(scale);
    case PullbackMap::affine: return affine_mapping(linear, offset);
    case PullbackMap::bender: return bender_mapping(bender);
  }
  throw UnsupportedError("pullback: unknown map");
}

Box PullbackScenario::original_domain() const { return map == PullbackMap::bender ? bender.plate() : domain; }

PullbackExperiment run_pullback_experiment(const PullbackScenario& s) {
  s.validate();
  const Mapping map = s.mapping();
  const Box box = s.original_domain();
  const ParameterField base = homogeneous_params(s.rho, s.alpha, s.beta, 0.0);
  const BoundaryCondition bcs{{"left", dirichlet(s.u_left)}, {"right", dirichlet(0.0)}, {"top", insulated()},
                              {"bottom", insulated()}};
  PullbackExperiment out;
  auto& m = out.report.variants[to_string(s.map)];
  bool decreasing = true;
  for (std::size_t k = 0; k < s.grids.size(); ++k) {
    const Index n = s.grids[k];
    out.runs.push_back(pullback_solve(map, base, bcs, box, n, n));
    m[grid_key("mismatch", n)] = out.runs.back().mismatch;
    if (k > 0 && !(out.runs[k].mismatch < out.runs[k - 1].mismatch)) decreasing = false;
  }
  out.report.scenario = "pullback";
  out.report.summary["finest_mismatch"] = out.runs.back().mismatch;
  out.report.summary["strictly_decreasing"] = decreasing ? 1.0 : 0.0;
  out.report.provenance = {{"grid_count", static_cast<double>(s.grids.size())},
                           {"rho", s.rho},
                           {"alpha", s.alpha},
                           {"beta", s.beta},
                           {"cg_tolerance", SolverSettings{}.tolerance}};
  return out;
}

// ---------------------------------------------------------------------------
// Convergence scenario

std::string to_string(Benchmark b) {
  switch (b) {
    case Benchmark::reaction_diffusion: return "reaction-diffusion";
    case Benchmark::pullback_scale: return "pullback-scale";
    case Benchmark::pullback_bender: return "pullback-bender";
  }
  return "?";
}

void ConvergenceScenario::validate() const {
  if (!(beta > 0)) throw ValidationError("convergence scenario: beta must be positive");
  check_grids(grids, "convergence scenario");
  if (grids.size() < 3) throw ValidationError("convergence scenario: need at least three grids");
  for (std::size_t k = 1; k < grids.size(); ++k)
    if (grids[k] != 2 * grids[k - 1]) throw ValidationError("convergence scenario: grids must double");
}

ConvergenceExperiment run_convergence_experiment(const ConvergenceScenario& s) {
  s.validate();
  std::function<double(Index)> metric;
  switch (s.benchmark) {
    case Benchmark::reaction_diffusion:
      metric = [beta = s.beta](Index n) { return reaction_diffusion_error(n, beta); };
      break;
    case Benchmark::pullback_scale:
    case Benchmark::pullback_bender: {
      PullbackScenario p;
      p.map = s.benchmark == Benchmark::pullback_scale ? PullbackMap::scale : PullbackMap::bender;
      metric = [p](Index n) {
        const BoundaryCondition bcs{{"left", dirichlet(p.u_left)}, {"right", dirichlet(0.0)}, {"top", insulated()},
                                    {"bottom", insulated()}};
        return pullback_check(p.mapping(), homogeneous_params(p.rho, p.alpha, p.beta, 0.0), bcs,
                              p.original_domain(), n, n);
      };
      break;
    }
  }
  ConvergenceExperiment out;
  out.result = convergence_study(metric, s.grids);
  auto& m = out.report.variants[to_string(s.benchmark)];
  for (const auto& pt : out.result.points) m[grid_key("metric", pt.grid)] = pt.metric;
  for (std::size_t k = 1; k < out.result.points.size(); ++k) {
    const auto& prev = out.result.points[k - 1];
    const auto& cur = out.result.points[k];
    if (cur.metric > 0) m[grid_key("ratio", cur.grid)] = prev.metric / cur.metric;
  }
  out.report.scenario = "convergence";
  if (std::isfinite(out.result.fitted_order)) out.report.summary["fitted_order"] = out.result.fitted_order;
  out.report.provenance = {{"grid_count", static_cast<double>(s.grids.size())},
                           {"cg_tolerance", SolverSettings{}.tolerance}};
  if (s.benchmark == Benchmark::reaction_diffusion) out.report.provenance["beta"] = s.beta;
  return out;
}

// ---------------------------------------------------------------------------
// Custom scenario

CustomExperiment run_custom_experiment(const CustomScenario& s) {
  if (s.mode == SolveMode::transient) {
    if (!(s.dt > 0 && s.t_end > 0)) throw ValidationError("custom scenario: dt and t_end must be positive");
  }
  CustomExperiment out;
  out.mesh = s.map ? map_mesh(s.mesh, *s.map) : s.mesh;
  const ParameterField params = s.map ? pushed_forward_field(*s.map, s.params) : s.params;
  const AssembledSystem sys = assemble_system(out.mesh, params, s.bcs);
  if (s.mode == SolveMode::steady) {
    out.solution = solve_steady(sys);
  } else {
    FieldSolution u0;
    u0.values = Eigen::VectorXd::Zero(out.mesh.node_count());
    out.solution = run_transient(sys, u0, s.dt, s.t_end, s.snapshot_times);
  }
  const auto& u = out.solution.values;
  auto& m = out.report.variants["custom"];
  m["u_min"] = u.minCoeff();
  m["u_max"] = u.maxCoeff();
  m["u_mean"] = u.mean();
  m["cg_iterations"] = static_cast<double>(out.solution.iterations);
  out.report.scenario = "custom";
  out.report.provenance = {{"nodes", static_cast<double>(out.mesh.node_count())},
                           {"elements", static_cast<double>(out.mesh.element_count())},
                           {"cg_tolerance", SolverSettings{}.tolerance}};
  if (s.mode == SolveMode::transient) {
    out.report.provenance["dt"] = s.dt;
    out.report.provenance["t_end"] = s.t_end;
  }
  return out;
}

}  // namespace commfield
