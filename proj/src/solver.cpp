#include "commfield/solver.hpp"

#include "commfield/error.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace commfield {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

constexpr double kGauss = 0.57735026918962576451;

// Free/constrained partition of a matrix: A_ff and A_fd (columns over all Dirichlet nodes).
struct Partition {
  std::vector<Index> free_of_node;  // -1 for Dirichlet nodes
  std::vector<Index> free_nodes;
  std::vector<Index> dirichlet_nodes;
  Eigen::VectorXd dirichlet_values;  // packed, aligned with dirichlet_nodes
};

Partition partition(const AssembledSystem& sys) {
  Partition p;
  p.free_of_node.assign(static_cast<std::size_t>(sys.size()), -1);
  for (Index i = 0; i < sys.size(); ++i) {
    if (sys.is_dirichlet[static_cast<std::size_t>(i)]) {
      p.dirichlet_nodes.push_back(i);
    } else {
      p.free_of_node[static_cast<std::size_t>(i)] = static_cast<Index>(p.free_nodes.size());
      p.free_nodes.push_back(i);
    }
  }
  p.dirichlet_values.resize(static_cast<Index>(p.dirichlet_nodes.size()));
  for (std::size_t k = 0; k < p.dirichlet_nodes.size(); ++k)
    p.dirichlet_values(static_cast<Index>(k)) = sys.dirichlet_values(p.dirichlet_nodes[k]);
  return p;
}

// Returns A_ff and accumulates A_fd u_d into `coupling`.
SpMat reduce(const SpMat& a, const Partition& p, const Eigen::VectorXd& full_dirichlet, Eigen::VectorXd& coupling) {
  const auto nf = static_cast<Index>(p.free_nodes.size());
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(a.nonZeros()));
  coupling = Eigen::VectorXd::Zero(nf);
  for (Index col = 0; col < a.outerSize(); ++col) {
    const Index fc = p.free_of_node[static_cast<std::size_t>(col)];
    for (SpMat::InnerIterator it(a, col); it; ++it) {
      const Index fr = p.free_of_node[static_cast<std::size_t>(it.row())];
      if (fr < 0) continue;
      if (fc >= 0)
        trips.emplace_back(fr, fc, it.value());
      else
        coupling(fr) += it.value() * full_dirichlet(col);
    }
  }
  SpMat out(nf, nf);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

Eigen::VectorXd gather(const Eigen::VectorXd& full, const Partition& p) {
  Eigen::VectorXd out(static_cast<Index>(p.free_nodes.size()));
  for (std::size_t k = 0; k < p.free_nodes.size(); ++k) out(static_cast<Index>(k)) = full(p.free_nodes[k]);
  return out;
}

void scatter(const Eigen::VectorXd& free_values, const Partition& p, Eigen::VectorXd& full) {
  for (std::size_t k = 0; k < p.free_nodes.size(); ++k) full(p.free_nodes[k]) = free_values(static_cast<Index>(k));
  for (std::size_t k = 0; k < p.dirichlet_nodes.size(); ++k)
    full(p.dirichlet_nodes[k]) = p.dirichlet_values(static_cast<Index>(k));
}

using Cg = Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>>;

void configure(Cg& cg, Index n, const SolverSettings& settings) {
  cg.setTolerance(settings.tolerance);
  cg.setMaxIterations(std::max<Index>(1, settings.max_iterations_per_unknown * n));
}

void check(const Cg& cg, const char* where) {
  if (cg.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << where << ": CG did not converge (" << cg.iterations() << " iterations, relative residual "
        << cg.error() << ")";
    throw SolverError(msg.str());
  }
}

}  // namespace

Dirichlet dirichlet(double value) {
  return {[value](const Point&) { return value; }};
}
Dirichlet dirichlet(std::function<double(const Point&)> value) { return {std::move(value)}; }
Neumann neumann(double flux) { return {flux}; }
Neumann insulated() { return {0.0}; }

Index AssembledSystem::dirichlet_count() const {
  return static_cast<Index>(std::count(is_dirichlet.begin(), is_dirichlet.end(), 1));
}

AssembledSystem assemble_system(const Mesh& mesh, const ParameterField& params, const BoundaryCondition& bcs,
                                const AssemblyOptions& options) {
  if (options.quadrature_subcells < 1) throw ValidationError("assemble_system: quadrature_subcells must be >= 1");
  for (const auto& [tag, edges] : mesh.boundary_tags)
    if (!bcs.count(tag)) throw ConfigError("assemble_system: boundary tag '" + tag + "' has no condition");
  for (const auto& [tag, data] : bcs)
    if (!mesh.boundary_tags.count(tag)) throw ConfigError("assemble_system: unknown boundary tag '" + tag + "'");

  const Index n = mesh.node_count();
  AssembledSystem sys;
  sys.load = Eigen::VectorXd::Zero(n);
  std::vector<Triplet> k_trips, m_trips;
  k_trips.reserve(static_cast<std::size_t>(16 * mesh.element_count()));
  m_trips.reserve(static_cast<std::size_t>(16 * mesh.element_count()));

  // 2x2 Gauss on each of m x m reference sub-cells.
  const Index m = options.quadrature_subcells;
  const double weight = 1.0 / static_cast<double>(m * m);
  std::vector<Point> gauss;
  gauss.reserve(static_cast<std::size_t>(4 * m * m));
  for (Index q = 0; q < m; ++q)
    for (Index p = 0; p < m; ++p)
      for (const Point& g : {Point(-kGauss, -kGauss), Point(kGauss, -kGauss), Point(kGauss, kGauss), Point(-kGauss, kGauss)})
        gauss.emplace_back(-1.0 + (2.0 * static_cast<double>(p) + 1.0 + g.x()) / static_cast<double>(m),
                           -1.0 + (2.0 * static_cast<double>(q) + 1.0 + g.y()) / static_cast<double>(m));
  for (Index e = 0; e < mesh.element_count(); ++e) {
    const auto coords = element_coordinates(mesh, e);
    Eigen::Matrix4d ke = Eigen::Matrix4d::Zero();
    Eigen::Matrix4d me = Eigen::Matrix4d::Zero();
    Eigen::Vector4d fe = Eigen::Vector4d::Zero();
    for (const auto& xi : gauss) {
      const Eigen::Matrix2d jac = element_jacobian(coords, xi);
      if (!(jac.determinant() > 0)) throw GeometryError("assemble_system: inverted element");
      const double det = weight * jac.determinant();
      const auto nv = shape_values(xi);
      const Eigen::Vector4d phi(nv[0], nv[1], nv[2], nv[3]);
      const Eigen::Matrix<double, 2, 4> grad = jac.transpose().inverse() * shape_gradients(xi);
      const Point x = coords * phi;
      const ParameterSample s = params.sample(x);
      const double scale = std::max({1.0, std::abs(s.alpha.xx), std::abs(s.alpha.yy)});
      if (!is_admissible(s, 1e-12 * scale)) {
        std::ostringstream msg;
        msg << "assemble_system: inadmissible material at (" << x.x() << ", " << x.y() << ")";
        throw MaterialError(msg.str());
      }
      ke += det * (grad.transpose() * s.alpha.matrix() * grad + s.beta * phi * phi.transpose());
      me += det * s.rho * phi * phi.transpose();
      fe += det * s.f * phi;
      sys.total_decay += det * s.beta;
    }
    const auto& nodes = mesh.elements[static_cast<std::size_t>(e)];
    for (int a = 0; a < 4; ++a) {
      sys.load(nodes[static_cast<std::size_t>(a)]) += fe(a);
      for (int b = 0; b < 4; ++b) {
        k_trips.emplace_back(nodes[static_cast<std::size_t>(a)], nodes[static_cast<std::size_t>(b)], ke(a, b));
        m_trips.emplace_back(nodes[static_cast<std::size_t>(a)], nodes[static_cast<std::size_t>(b)], me(a, b));
      }
    }
  }
  sys.stiffness.resize(n, n);
  sys.stiffness.setFromTriplets(k_trips.begin(), k_trips.end());
  sys.mass.resize(n, n);
  sys.mass.setFromTriplets(m_trips.begin(), m_trips.end());

  // Neumann flux, exact for constant flux on straight edges.
  for (const auto& [tag, data] : bcs) {
    if (const auto* nm = std::get_if<Neumann>(&data); nm && nm->flux != 0.0) {
      for (const auto& edge : mesh.boundary_tags.at(tag)) {
        const double len = (mesh.nodes[static_cast<std::size_t>(edge[1])] - mesh.nodes[static_cast<std::size_t>(edge[0])]).norm();
        sys.load(edge[0]) += 0.5 * nm->flux * len;
        sys.load(edge[1]) += 0.5 * nm->flux * len;
      }
    }
  }

  sys.is_dirichlet.assign(static_cast<std::size_t>(n), 0);
  sys.dirichlet_values = Eigen::VectorXd::Zero(n);
  for (const auto& [tag, data] : bcs) {  // std::map: lexicographic tag order
    const auto* d = std::get_if<Dirichlet>(&data);
    if (!d) continue;
    if (!d->value) throw ConfigError("assemble_system: Dirichlet condition on '" + tag + "' has no value");
    for (const auto& edge : mesh.boundary_tags.at(tag))
      for (Index node : edge) {
        auto& flag = sys.is_dirichlet[static_cast<std::size_t>(node)];
        if (flag) continue;
        flag = 1;
        sys.dirichlet_values(node) = d->value(mesh.nodes[static_cast<std::size_t>(node)]);
      }
  }
  return sys;
}

FieldSolution solve_steady(const AssembledSystem& system, const SolverSettings& settings) {
  if (system.dirichlet_count() == 0 && !(system.total_decay > 0))
    throw SetupError("solve_steady: singular system (no Dirichlet nodes and no decay)");
  const Partition p = partition(system);
  Eigen::VectorXd coupling;
  const SpMat k_ff = reduce(system.stiffness, p, system.dirichlet_values, coupling);
  for (Index i = 0; i < k_ff.rows(); ++i)
    if (!(k_ff.coeff(i, i) > 0)) throw SetupError("solve_steady: free node with zero stiffness diagonal");
  const Eigen::VectorXd rhs = gather(system.load, p) - coupling;

  Cg cg;
  configure(cg, k_ff.rows(), settings);
  cg.compute(k_ff);
  const Eigen::VectorXd u_free = cg.solve(rhs);
  check(cg, "solve_steady");

  FieldSolution out;
  out.values = Eigen::VectorXd::Zero(system.size());
  scatter(u_free, p, out.values);
  out.iterations = cg.iterations();
  return out;
}

FieldSolution run_transient(const AssembledSystem& system, const FieldSolution& u0, double dt, double t_end,
                            std::vector<double> snapshot_times, const SolverSettings& settings) {
  if (!(dt > 0)) throw ValidationError("run_transient: dt must be positive");
  if (!(t_end >= 0)) throw ValidationError("run_transient: t_end must be >= 0");
  if (u0.values.size() != system.size()) throw ValidationError("run_transient: u0 size does not match the system");
  std::sort(snapshot_times.begin(), snapshot_times.end());
  snapshot_times.erase(std::unique(snapshot_times.begin(), snapshot_times.end()), snapshot_times.end());
  if (!snapshot_times.empty() && (snapshot_times.front() < 0 || snapshot_times.back() > t_end))
    throw ValidationError("run_transient: snapshot times must lie in [0, t_end]");
  if (snapshot_times.empty() || snapshot_times.back() != t_end) snapshot_times.push_back(t_end);

  const Partition p = partition(system);
  Eigen::VectorXd k_coupling, m_coupling;
  const SpMat k_ff = reduce(system.stiffness, p, system.dirichlet_values, k_coupling);
  const SpMat m_ff = reduce(system.mass, p, system.dirichlet_values, m_coupling);
  for (Index i = 0; i < m_ff.rows(); ++i)
    if (!(m_ff.coeff(i, i) > 0)) throw ValidationError("run_transient: density must be positive on free nodes");
  const Eigen::VectorXd forcing = gather(system.load, p) - k_coupling;

  FieldSolution out;
  Eigen::VectorXd u_full = u0.values;
  scatter(gather(u0.values, p), p, u_full);
  Eigen::VectorXd u = gather(u_full, p);

  std::size_t next_snap = 0;
  auto record_until = [&](double t_lo, const Eigen::VectorXd& lo, double t_hi, const Eigen::VectorXd& hi) {
    while (next_snap < snapshot_times.size() && snapshot_times[next_snap] <= t_hi) {
      const double ts = snapshot_times[next_snap];
      const double w = t_hi > t_lo ? (ts - t_lo) / (t_hi - t_lo) : 1.0;
      Eigen::VectorXd full(system.size());
      scatter(((1.0 - w) * lo + w * hi).eval(), p, full);
      out.snapshots.push_back({ts, std::move(full)});
      ++next_snap;
    }
  };
  record_until(0.0, u, 0.0, u);

  const Index full_steps = static_cast<Index>(std::floor(t_end / dt * (1 + 1e-12)));
  const bool partial = t_end - static_cast<double>(full_steps) * dt > 1e-12 * dt;
  const Index total_steps = full_steps + (partial ? 1 : 0);

  double t = 0.0;
  Index taken = 0;
  auto advance = [&](double step, Index count) {
    const SpMat a = m_ff + step * k_ff;
    Cg cg;
    configure(cg, a.rows(), settings);
    cg.compute(a);
    for (Index s = 0; s < count; ++s) {
      const Eigen::VectorXd rhs = m_ff * u + step * forcing;
      Eigen::VectorXd next = cg.solveWithGuess(rhs, u);
      check(cg, "run_transient");
      out.iterations += cg.iterations();
      const double t_next = ++taken == total_steps ? t_end : t + step;
      record_until(t, u, t_next, next);
      u = std::move(next);
      t = t_next;
    }
  };
  if (full_steps > 0) advance(dt, full_steps);
  if (partial) advance(t_end - t, 1);
  record_until(t, u, t_end, u);

  out.values = Eigen::VectorXd::Zero(system.size());
  scatter(u, p, out.values);
  return out;
}

double sample_solution(const Mesh& mesh, const FieldSolution& solution, const Point& p) {
  if (solution.values.size() != mesh.node_count())
    throw ValidationError("sample_solution: solution size does not match the mesh");
  const Location loc = locate_point(mesh, p);
  const auto n = shape_values(loc.local);
  const auto& e = mesh.elements[static_cast<std::size_t>(loc.element)];
  double v = 0.0;
  for (int k = 0; k < 4; ++k) v += n[static_cast<std::size_t>(k)] * solution.values(e[static_cast<std::size_t>(k)]);
  return v;
}

}  // namespace commfield
