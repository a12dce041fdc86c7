#pragma once

#include "commfield/solver.hpp"
#include "commfield/transform.hpp"

#include <functional>
#include <map>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace commfield {

using PointPredicate = std::function<bool(const Point&)>;

/// Metrics record of one experiment. Metric and provenance maps are ordered so the
/// serialized report is deterministic.
struct ExperimentReport {
  std::string scenario;
  std::map<std::string, std::map<std::string, double>> variants;
  std::map<std::string, double> summary;
  std::map<std::string, double> provenance;
};

// ---------------------------------------------------------------------------
// Metrics

/// sqrt(sum (ua - ub)^2) / sqrt(sum ua^2) over mesh nodes inside the region; 0/0 -> 0.
double exterior_mismatch(const Mesh& mesh, const Eigen::VectorXd& ua, const Eigen::VectorXd& ub,
                         const PointPredicate& region);

/// max |u| over nodes inside the region (0 if none).
double max_abs_in(const Mesh& mesh, const Eigen::VectorXd& u, const PointPredicate& region);

/// First time each probe reaches threshold * u_input, linearly interpolated between
/// snapshots. Throws NonArrivalError naming the first probe that never crosses.
std::vector<double> crossing_times(const std::vector<Snapshot>& snapshots, std::span<const Index> probes,
                                   double threshold, double u_input = 1.0);

/// (max - min) / mean of the crossing times.
double arrival_spread(const std::vector<double>& times);
double arrival_spread(const std::vector<Snapshot>& snapshots, std::span<const Index> probes, double threshold,
                      double u_input = 1.0);

/// Worst radial variation of u along a constant-angle mesh line, over the global range of u.
/// Only defined for annular-sector meshes.
double contour_straightness(const Mesh& mesh, const Eigen::VectorXd& u);

/// Continuous L2 norm of (u_h - exact) with 3x3 Gauss quadrature per element.
double l2_error(const Mesh& mesh, const Eigen::VectorXd& u, const std::function<double(const Point&)>& exact);

// ---------------------------------------------------------------------------
// Oracles

struct RodProblem {
  double length{1};
  double alpha{1};
  double rho{1};
  double beta{0};
  double u_left{1};
};

/// Rod initially at zero, u(0) = u_left and u(L) = 0 for t > 0; Fourier sine series about
/// the steady profile, summed until the bound on the next term drops below 1e-12.
double solve_rod_1d(const RodProblem& rod, double t, double x);

// ---------------------------------------------------------------------------
// Pullback identity

struct PullbackResult {
  double mismatch;
  Mesh original_mesh;
  Mesh mapped_mesh;
  FieldSolution original;
  FieldSolution transformed;
};

/// Solves on the original rectangle and on its image (pushed-forward materials, mapped
/// mesh, Dirichlet data read through the inverse map), then compares nodewise.
/// Nonzero Neumann data is rejected. `outside_image` supplies materials where the mapped
/// mesh leaves the exact image of the map (the cloak core).
PullbackResult pullback_solve(const Mapping& map, const ParameterField& base, const BoundaryCondition& bcs,
                              const Box& domain, Index nx, Index ny, ParameterRule outside_image = {});

double pullback_check(const Mapping& map, const ParameterField& base, const BoundaryCondition& bcs,
                      const Box& domain, Index nx, Index ny);

// ---------------------------------------------------------------------------
// Convergence

struct ConvergencePoint {
  Index grid;
  double metric;
};

struct ConvergenceResult {
  std::vector<ConvergencePoint> points;
  /// Least-squares slope of -log(metric) against log(grid); NaN if any metric is <= 0.
  double fitted_order;
};

/// Needs at least three grids, each double the previous.
ConvergenceResult convergence_study(const std::function<double(Index)>& scenario, std::span<const Index> grids);

/// Steady reaction-diffusion on the unit square: u'' = beta u, u(0) = 1, u(1) = 0,
/// insulated top/bottom. Returns the L2 error against sinh(m(1-x))/sinh(m), m = sqrt(beta).
double reaction_diffusion_error(Index n, double beta = 4.0);

/// 2D rod step response on an n x 4 grid of the unit square against solve_rod_1d;
/// returns the max nodal error over the given snapshot times.
double rod_transient_error(Index n, double dt, const std::vector<double>& times);

// ---------------------------------------------------------------------------
// Cloak scenario

enum class CloakVariant { original, blanket, cloaked };
std::string to_string(CloakVariant v);

struct CloakScenario {
  Box domain{0.0, 8.0, 0.0, 4.0};
  double source_x_max{1.0};  // area I: x <= source_x_max
  double source_f{1.0};
  CloakSpec cloak{{5.0, 2.0}, 0.6, 1.2, 1e-3};
  double rho{1.0};
  double alpha{1.0};
  double beta{1.0};
  double blanket_factor{1e-6};
  Index nx{192};
  Index ny{96};
  Index quadrature_subcells{1};
  double dt{0.01};
  double t_snapshot{1.0};
  bool transient{true};
  std::vector<CloakVariant> variants{CloakVariant::original, CloakVariant::blanket, CloakVariant::cloaked};

  void validate() const;
};

ParameterField cloak_scenario_params(const CloakScenario& scenario, CloakVariant variant);
/// u = 0 on all four sides.
BoundaryCondition cloak_scenario_bcs();
/// Area II without the disk r' <= b.
PointPredicate cloak_exterior_region(const CloakScenario& scenario);
/// r' <= 0.9 a.
PointPredicate cloak_interior_region(const CloakScenario& scenario);

struct CloakRun {
  CloakVariant variant;
  FieldSolution steady;
  std::optional<FieldSolution> transient;  // final values are the t_snapshot field
};

struct CloakExperiment {
  Mesh mesh;
  std::vector<CloakRun> runs;
  ExperimentReport report;
};

CloakExperiment run_cloak_experiment(const CloakScenario& scenario);

struct EpsilonPoint {
  double epsilon;
  double exterior_mismatch;
  double interior_leakage;
};

/// Steady cloaked-vs-original metrics for each regularization epsilon at a fixed grid.
std::vector<EpsilonPoint> cloak_epsilon_study(const CloakScenario& scenario, const std::vector<double>& epsilons);

/// Worst relative difference between cloak_params and push_forward through cloak_mapping
/// at `samples` uniform random shell points with r' in (a + eps a, b]. The Jacobian is the
/// closed form unless `finite_difference` is set.
double cloak_consistency_error(const CloakSpec& spec, const ParameterSample& base, Index samples,
                               std::uint64_t seed, bool finite_difference = false);

// ---------------------------------------------------------------------------
// Bender scenario

enum class BenderVariant { homogeneous_arc, eq8_derived, eq11_paper };
std::string to_string(BenderVariant v);

struct BenderScenario {
  BenderSpec spec{};
  std::vector<BenderVariant> variants{BenderVariant::homogeneous_arc, BenderVariant::eq8_derived,
                                      BenderVariant::eq11_paper};
  double u_input{1.0};
  double rho{1.0};
  double alpha{1.0};
  double beta{0.0};
  Index nr{64};
  Index ntheta{64};
  double dt{1e-3};
  double t_end{1.0};
  double snapshot_interval{0.05};
  double arrival_dt{5e-3};
  double arrival_t_max{200.0};
  double threshold{0.5};

  void validate() const;
};

ParameterField bender_scenario_params(const BenderScenario& scenario, BenderVariant variant);
/// AD held at u_input, arcs insulated, CB held at 0 or insulated.
BoundaryCondition bender_scenario_bcs(const BenderScenario& scenario, bool outlet_insulated);

struct BenderRun {
  BenderVariant variant;
  FieldSolution steady;       // CB held at 0
  FieldSolution transient;    // CB held at 0, snapshots every snapshot_interval
  std::vector<double> arrival_times;  // CB insulated, one per CB node
};

struct BenderExperiment {
  Mesh mesh;
  std::vector<BenderRun> runs;
  ExperimentReport report;
};

BenderExperiment run_bender_experiment(const BenderScenario& scenario);

// ---------------------------------------------------------------------------
// Pullback scenario

enum class PullbackMap { scale, affine, bender };
std::string to_string(PullbackMap m);

/// Homogeneous base on a rectangle: u = u_left on the left side, 0 on the right, top and
/// bottom insulated. The bender map uses its own plate as the rectangle.
struct PullbackScenario {
  PullbackMap map{PullbackMap::bender};
  Box domain{0.0, 1.0, 0.0, 1.0};
  double scale{2.0};
  Eigen::Matrix2d linear{{1.5, 0.5}, {0.0, 1.0}};
  Eigen::Vector2d offset{0.0, 0.0};
  BenderSpec bender{};
  double rho{1.0};
  double alpha{1.0};
  double beta{1.0};
  double u_left{1.0};
  std::vector<Index> grids{16, 32, 64, 128};

  void validate() const;
  Mapping mapping() const;
  Box original_domain() const;
};

struct PullbackExperiment {
  std::vector<PullbackResult> runs;  // one per grid
  ExperimentReport report;
};

PullbackExperiment run_pullback_experiment(const PullbackScenario& scenario);

// ---------------------------------------------------------------------------
// Convergence scenario

enum class Benchmark { reaction_diffusion, pullback_scale, pullback_bender };
std::string to_string(Benchmark b);

struct ConvergenceScenario {
  Benchmark benchmark{Benchmark::reaction_diffusion};
  double beta{4.0};
  std::vector<Index> grids{16, 32, 64, 128};

  void validate() const;
};

struct ConvergenceExperiment {
  ConvergenceResult result;
  ExperimentReport report;
};

ConvergenceExperiment run_convergence_experiment(const ConvergenceScenario& scenario);

// ---------------------------------------------------------------------------
// Custom scenario

enum class SolveMode { steady, transient };

/// Materials are given on `mesh`; with a map, the mesh is mapped and the materials pushed
/// forward before solving. Boundary data is applied on the solved mesh.
struct CustomScenario {
  Mesh mesh;
  ParameterField params{homogeneous_params(1.0, 1.0, 0.0, 0.0)};
  std::optional<Mapping> map;
  BoundaryCondition bcs;
  SolveMode mode{SolveMode::steady};
  double dt{0.01};
  double t_end{1.0};
  std::vector<double> snapshot_times;
};

struct CustomExperiment {
  Mesh mesh;  // the mesh the field lives on
  FieldSolution solution;
  ExperimentReport report;
};

CustomExperiment run_custom_experiment(const CustomScenario& scenario);

}  // namespace commfield
