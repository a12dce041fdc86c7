// Acceptance suite: one PASS/FAIL line per criterion, preceded by the measured values.

#include "commfield/config.hpp"
#include "commfield/error.hpp"
#include "commfield/experiments.hpp"

#include <Eigen/Dense>

#include <cstdio>
#include <random>
#include <string>
#include <vector>

using namespace commfield;

namespace {

class Criterion {
 public:
  Criterion(int id, std::string title) : id_(id), title_(std::move(title)) {}

  void at_most(const std::string& what, double value, double limit) {
    record(what, value, "<=", limit, value <= limit);
  }
  void at_least(const std::string& what, double value, double limit) {
    record(what, value, ">=", limit, value >= limit);
  }
  void within(const std::string& what, double value, double lo, double hi) {
    const bool ok = value >= lo && value <= hi;
    std::printf("  %-58s %.6e in [%g, %g]%s\n", what.c_str(), value, lo, hi, ok ? "" : "  <-- violated");
    pass_ = pass_ && ok;
  }
  void holds(const std::string& what, bool ok) {
    std::printf("  %-58s %s\n", what.c_str(), ok ? "yes" : "no  <-- violated");
    pass_ = pass_ && ok;
  }
  void info(const std::string& what, double value) { std::printf("  %-58s %.6e (not gated)\n", what.c_str(), value); }

  bool finish() const {
    std::printf("%s criterion %d: %s\n", pass_ ? "PASS" : "FAIL", id_, title_.c_str());
    std::fflush(stdout);
    return pass_;
  }

 private:
  void record(const std::string& what, double value, const char* op, double limit, bool ok) {
    std::printf("  %-58s %.6e %s %g%s\n", what.c_str(), value, op, limit, ok ? "" : "  <-- violated");
    pass_ = pass_ && ok;
  }

  int id_;
  std::string title_;
  bool pass_{true};
};

BoundaryCondition rod_bcs(double left = 1.0) {
  return {{"left", dirichlet(left)}, {"right", dirichlet(0.0)}, {"top", insulated()}, {"bottom", insulated()}};
}

std::string grid_label(const char* prefix, Index n) { return std::string(prefix) + " " + std::to_string(n); }

bool closed_form_consistency() {
  Criterion c(1, "closed-form cloak parameters equal the push-forward through the cloak map");
  const ParameterSample unit{1.0, SymTensor2<double>::isotropic(1.0), 1.0, 0.0};
  const ParameterSample scenario{1.0, SymTensor2<double>::isotropic(1.0), 1.0, 1.0};
  c.at_most("unit base, a=1 b=2 eps=1e-3, 1000 points", cloak_consistency_error({{0, 0}, 1.0, 2.0, 1e-3}, unit, 1000, 1),
            1e-8);
  c.at_most("scenario cloak, a=0.6 b=1.2 eps=1e-3, 1000 points",
            cloak_consistency_error({{5, 2}, 0.6, 1.2, 1e-3}, scenario, 1000, 2), 1e-8);
  c.at_most("a=0.3 b=2.5 eps=1e-2, 1000 points", cloak_consistency_error({{-1, 3}, 0.3, 2.5, 1e-2}, unit, 1000, 3),
            1e-8);
  c.info("same, finite-difference Jacobian", cloak_consistency_error({{0, 0}, 1.0, 2.0, 1e-3}, unit, 1000, 1, true));
  return c.finish();
}

bool solver_benchmarks() {
  Criterion c(2, "analytic solver benchmarks");
  {
    const Mesh mesh = build_cartesian_mesh({0, 1}, {0, 1}, 32, 32);
    const auto u = solve_steady(assemble_system(mesh, homogeneous_params(1, 1, 0, 0), rod_bcs())).values;
    double err = 0.0;
    for (Index i = 0; i < mesh.node_count(); ++i)
      err = std::max(err, std::abs(u(i) - (1.0 - mesh.nodes[static_cast<std::size_t>(i)].x())));
    c.at_most("Laplace u = 1 - x, 32x32, max nodal error", err, 1e-10);
  }
  {
    double prev = reaction_diffusion_error(16);
    for (Index n : {32, 64, 128}) {
      const double e = reaction_diffusion_error(n);
      c.within(grid_label("sinh benchmark L2 error ratio at", n), prev / e, 3.5, 4.5);
      prev = e;
    }
  }
  {
    std::vector<double> times;
    for (int k = 1; k <= 20; ++k) times.push_back(0.05 * k);
    c.at_most("rod step response vs series, 128, dt 1e-3, max error", rod_transient_error(128, 1e-3, times), 0.01);
  }
  {
    const Mesh mesh = build_cartesian_mesh({0, 1}, {0, 1}, 32, 2);
    const auto sys = assemble_system(mesh, homogeneous_params(1, 1, 0, 0), rod_bcs());
    FieldSolution u0;
    u0.values = Eigen::VectorXd::Zero(mesh.node_count());
    std::vector<Eigen::VectorXd> runs;
    for (double dt : {0.02, 0.01, 0.005, 0.0025}) runs.push_back(run_transient(sys, u0, dt, 0.2, {}).values);
    for (std::size_t k = 0; k + 2 < runs.size(); ++k)
      c.within("backward Euler successive-difference ratio " + std::to_string(k + 1),
               (runs[k] - runs[k + 1]).cwiseAbs().maxCoeff() / (runs[k + 1] - runs[k + 2]).cwiseAbs().maxCoeff(),
               1.7, 2.3);
  }
  return c.finish();
}

bool pullback_identity() {
  Criterion c(3, "pullback identity for the scaling and bender maps");
  const double floor = 1e-9;
  for (PullbackMap map : {PullbackMap::scale, PullbackMap::bender}) {
    PullbackScenario s;
    s.map = map;
    s.grids = {16, 32, 64, 128};
    const auto out = run_pullback_experiment(s);
    bool monotone = true;
    for (std::size_t k = 0; k < out.runs.size(); ++k) {
      c.info(to_string(map) + " mismatch at " + std::to_string(s.grids[k]), out.runs[k].mismatch);
      if (k > 0 && !(out.runs[k].mismatch < out.runs[k - 1].mismatch || out.runs[k - 1].mismatch <= floor))
        monotone = false;
    }
    c.at_most(to_string(map) + " mismatch at 128", out.runs.back().mismatch, 0.02);
    c.holds(to_string(map) + " decreasing over 16-128 (floor 1e-9)", monotone);
  }
  return c.finish();
}

bool cloak_invisibility() {
  Criterion c(4, "cloak invisibility at 192x96");
  const CloakScenario s;
  const auto out = run_cloak_experiment(s);
  const auto& cl = out.report.variants.at("cloaked");
  const auto& bl = out.report.variants.at("blanket");
  c.at_most("cloaked exterior mismatch, steady", cl.at("exterior_mismatch"), 0.05);
  c.at_most("cloaked exterior mismatch, t = 1", cl.at("exterior_mismatch_transient"), 0.05);
  c.at_least("blanket / cloaked mismatch, steady", bl.at("exterior_mismatch") / cl.at("exterior_mismatch"), 5.0);
  c.at_least("blanket / cloaked mismatch, t = 1",
             bl.at("exterior_mismatch_transient") / cl.at("exterior_mismatch_transient"), 5.0);
  const auto sweep = cloak_epsilon_study(s, {1e-2, 1e-3, 1e-4});
  bool monotone = true;
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    char label[80];
    std::snprintf(label, sizeof label, "interior max|u| at eps = %.0e", sweep[k].epsilon);
    c.info(label, sweep[k].interior_leakage);
    if (k > 0 && sweep[k].interior_leakage > sweep[k - 1].interior_leakage) monotone = false;
  }
  c.holds("interior max|u| non-increasing over eps 1e-2, 1e-3, 1e-4", monotone);
  return c.finish();
}

bool bender_synchrony() {
  Criterion c(5, "bender synchrony");
  const BenderScenario s;
  const auto out = run_bender_experiment(s);
  const auto& eq8 = out.report.variants.at("eq8-derived");
  const auto& homo = out.report.variants.at("homogeneous-arc");
  const auto& eq11 = out.report.variants.at("eq11-paper");
  c.at_most("eq8-derived contour straightness, steady", eq8.at("contour_straightness"), 0.02);
  c.at_most("eq8-derived contour straightness, transient", eq8.at("contour_straightness_transient"), 0.02);
  c.at_most("eq8-derived arrival spread at threshold 0.5", eq8.at("arrival_spread"), 0.02);
  c.at_least("homogeneous-arc spread / eq8-derived spread", homo.at("arrival_spread") / eq8.at("arrival_spread"),
             10.0);
  c.at_most("eq8-derived vs rod series, max error", eq8.at("rod_mismatch"), 0.02);
  c.info("eq11-paper contour straightness", eq11.at("contour_straightness"));
  c.info("eq11-paper arrival spread", eq11.at("arrival_spread"));
  c.info("eq11-paper vs rod series", eq11.at("rod_mismatch"));
  return c.finish();
}

bool determinism() {
  Criterion c(6, "identical configs give byte-identical reports");
  const std::vector<std::pair<std::string, std::string>> configs{
      {"cloak", R"({"scenario": "cloak", "epsilon_sweep": [0.01, 0.001]})"},
      {"bender", R"({"scenario": "bender", "nr": 32, "ntheta": 32})"},
      {"pullback", R"({"scenario": "pullback"})"},
      {"convergence", R"({"scenario": "convergence"})"},
      {"custom", R"({"scenario": "custom", "mesh": {"nx": 48, "ny": 24, "x": [0, 2]}, "mode": "transient",
                     "materials": {"regions": [{"shape": "disk", "center": [1, 0.5], "radius": 0.3,
                                                "params": {"alpha": [3, 1, 2], "f": 1}}]},
                     "boundary": {"left": {"dirichlet": 1}, "right": {"dirichlet": 0},
                                  "top": "insulated", "bottom": {"neumann": 0.2}}})"}};
  for (const auto& [name, text] : configs) {
    const RunConfig cfg = parse_config(text);
    const std::string a = format_report(run_scenario(cfg, 42).report, cfg.echo);
    const std::string b = format_report(run_scenario(parse_config(text), 42).report, cfg.echo);
    c.holds(name + " report identical across runs", a == b);
  }
  return c.finish();
}

bool property_suites() {
  Criterion c(7, "property suites");
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0), entry(-3.0, 3.0), angle(0.0, kPi);

  auto random_sample = [&]() {
    const double l1 = std::exp(8.0 * unit(rng) - 4.0), l2 = std::exp(8.0 * unit(rng) - 4.0);
    return ParameterSample{std::exp(4.0 * unit(rng) - 2.0), principal_to_cartesian(l1, l2, angle(rng)),
                           unit(rng), entry(rng)};
  };
  auto random_jacobian = [&]() {
    Eigen::Matrix2d a;
    do {
      a << entry(rng), entry(rng), entry(rng), entry(rng);
    } while (!(a.determinant() > 1e-3));
    return a;
  };
  auto flat = [](const ParameterSample& p) {
    Eigen::Matrix<double, 6, 1> v;
    v << p.rho, p.alpha.xx, p.alpha.xy, p.alpha.yy, p.beta, p.f;
    return v;
  };

  auto moderate_jacobian = [&]() {
    Eigen::Matrix2d a;
    do {
      a << entry(rng), entry(rng), entry(rng), entry(rng);
    } while (!(a.determinant() > 1e-2 * a.squaredNorm()));
    return a;
  };
  auto moderate_sample = [&]() {
    return ParameterSample{0.1 + 2.9 * unit(rng), principal_to_cartesian(0.1 + 2.9 * unit(rng), 0.1 + 2.9 * unit(rng), angle(rng)),
                           unit(rng), entry(rng)};
  };

  int spd_failures = 0;
  double chain = 0.0, chain_wide = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const ParameterSample s = random_sample();
    const Eigen::Matrix2d a = random_jacobian(), b = random_jacobian();
    const ParameterSample p = push_forward(s, a);
    if (!(p.alpha.eigenvalues()(0) > 0.0 && p.rho > 0.0 && p.beta >= 0.0 && is_admissible(p))) ++spd_failures;
    const auto twice = flat(push_forward(p, b)), once = flat(push_forward(s, Eigen::Matrix2d(b * a)));
    chain_wide = std::max(chain_wide, (twice - once).norm() / once.norm());

    const ParameterSample m = moderate_sample();
    const Eigen::Matrix2d ma = moderate_jacobian(), mb = moderate_jacobian();
    const auto m2 = flat(push_forward(push_forward(m, ma), mb)), m1 = flat(push_forward(m, Eigen::Matrix2d(mb * ma)));
    chain = std::max(chain, (m2 - m1).norm() / m1.norm());
  }
  c.at_most("SPD lost in 10^4 push-forwards (count)", spd_failures, 0);
  c.info("chain rule, wide sampling (det A > 1e-3), relative error", chain_wide);
  c.at_most("chain rule, 10^4 pairs with det A > 1e-2 |A|^2, rel. error", chain, 1e-12);

  {
    double worst = 0.0;
    Eigen::Matrix2d lin;
    lin << 1.5, 0.5, -0.2, 1.0;
    const Mapping outer = scale_mapping(2.0), inner = affine_mapping(lin, Eigen::Vector2d(0.3, 0.1));
    const Mapping both = compose(outer, inner);
    for (int k = 0; k < 1000; ++k) {
      const Point x(entry(rng), entry(rng));
      const Eigen::Matrix2d expect = jacobian_at(outer, inner(x)) * jacobian_at(inner, x);
      worst = std::max(worst, (jacobian_at(both, x) - expect).norm() / expect.norm());
    }
    c.at_most("composed-map Jacobian vs product, relative error", worst, 1e-12);
  }

  {
    bool bounded = true;
    for (double beta : {0.0, 4.0}) {
      const Mesh mesh = build_cartesian_mesh({0, 1}, {0, 1}, 64, 64);
      const auto sys = assemble_system(mesh, homogeneous_params(1, 1, beta, 0), rod_bcs());
      const auto u = solve_steady(sys).values;
      bounded = bounded && u.minCoeff() >= -1e-9 && u.maxCoeff() <= 1.0 + 1e-9;
      FieldSolution u0;
      u0.values = Eigen::VectorXd::Zero(mesh.node_count());
      for (const auto& snap : run_transient(sys, u0, 0.01, 0.5, {0.1, 0.2, 0.3, 0.4}).snapshots)
        bounded = bounded && snap.values.minCoeff() >= -1e-9 && snap.values.maxCoeff() <= 1.0 + 1e-9;
    }
    c.holds("homogeneous benchmarks stay within boundary data (1e-9)", bounded);
  }

  {
    double worst = 0.0;
    for (const BenderSpec spec : {BenderSpec{}, BenderSpec{2.0, 0.5, kPi / 3, 1.5}}) {
      const Mesh sector = build_annular_sector_mesh(spec.r1, spec.r2(), spec.phi, 128, 128);
      const Box plate = spec.plate();
      const Mesh mapped =
          map_mesh(build_cartesian_mesh({plate.xmin, plate.xmax}, {plate.ymin, plate.ymax}, 128, 128), bender_mapping(spec));
      for (std::size_t k = 0; k < sector.nodes.size(); ++k)
        worst = std::max(worst, (sector.nodes[k] - mapped.nodes[k]).norm());
    }
    c.at_most("sector mesh vs mapped plate grid, max node distance", worst, 1e-12);
  }
  return c.finish();
}

}  // namespace

int main() {
  using Check = bool (*)();
  const Check checks[] = {closed_form_consistency, solver_benchmarks, pullback_identity, cloak_invisibility,
                          bender_synchrony,        determinism,       property_suites};
  int failed = 0;
  int id = 0;
  for (Check check : checks) {
    ++id;
    try {
      if (!check()) ++failed;
    } catch (const std::exception& e) {
      std::printf("  error: %s\nFAIL criterion %d: raised an exception\n", e.what(), id);
      ++failed;
    }
  }
  std::printf("%d of %d criteria passed\n", id - failed, id);
  return failed == 0 ? 0 : 1;
}
