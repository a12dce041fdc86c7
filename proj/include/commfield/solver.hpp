#pragma once

#include "commfield/material.hpp"
#include "commfield/mesh.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace commfield {

struct Dirichlet {
  std::function<double(const Point&)> value;
};

/// Prescribed flux into the domain, (alpha grad u) . n_out; zero means insulated.
struct Neumann {
  double flux{0};
};

using BoundaryData = std::variant<Dirichlet, Neumann>;

Dirichlet dirichlet(double value);
Dirichlet dirichlet(std::function<double(const Point&)> value);
Neumann neumann(double flux);
Neumann insulated();

/// One condition per boundary tag. A node shared by several tags takes Dirichlet
/// data over Neumann; between two Dirichlet tags the lexicographically first wins.
using BoundaryCondition = std::map<std::string, BoundaryData>;

struct AssembledSystem {
  Eigen::SparseMatrix<double> stiffness;  // diffusion + decay
  Eigen::SparseMatrix<double> mass;       // density
  Eigen::VectorXd load;                   // sources + Neumann flux
  std::vector<char> is_dirichlet;
  Eigen::VectorXd dirichlet_values;
  double total_decay{0};  // integral of beta over the domain

  Index size() const { return static_cast<Index>(load.size()); }
  Index dirichlet_count() const;
};

struct Snapshot {
  double time;
  Eigen::VectorXd values;
};

struct FieldSolution {
  Eigen::VectorXd values;
  std::vector<Snapshot> snapshots;
  Index iterations{0};  // total CG iterations spent producing this solution
};

struct SolverSettings {
  double tolerance{1e-10};
  Index max_iterations_per_unknown{20};
};

struct AssemblyOptions {
  /// Each element is split into m x m reference sub-cells with 2x2 Gauss points apiece.
  Index quadrature_subcells{1};
};

/// Bilinear finite elements; materials are sampled at every quadrature point. Throws
/// MaterialError for inadmissible samples and ConfigError when the boundary conditions
/// do not cover the mesh tags exactly.
AssembledSystem assemble_system(const Mesh& mesh, const ParameterField& params, const BoundaryCondition& bcs,
                                const AssemblyOptions& options = {});

/// Jacobi-preconditioned CG on the Dirichlet-eliminated system, zero initial guess.
FieldSolution solve_steady(const AssembledSystem& system, const SolverSettings& settings = {});

/// Backward Euler, (M + dt K) u^{n+1} = M u^n + dt b, from u0 (Dirichlet values imposed).
/// Requested snapshot times are linearly interpolated between the bracketing steps; a
/// snapshot at t_end is always recorded. The last step is shortened to land on t_end.
FieldSolution run_transient(const AssembledSystem& system, const FieldSolution& u0, double dt, double t_end,
                            std::vector<double> snapshot_times, const SolverSettings& settings = {});

/// Bilinear interpolation of the nodal field at a point.
double sample_solution(const Mesh& mesh, const FieldSolution& solution, const Point& p);

}  // namespace commfield
