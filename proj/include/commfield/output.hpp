#pragma once

#include "commfield/experiments.hpp"
#include "commfield/mesh.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace commfield {

/// Nodal field as stored in a field CSV.
struct FieldTable {
  std::vector<Point> nodes;
  std::vector<double> values;
};

FieldTable field_table(const Mesh& mesh, const Eigen::VectorXd& u);

/// Header "x,y,u", then one row per node, 17 significant digits.
std::string format_field_csv(const FieldTable& table);
std::string format_field_csv(const Mesh& mesh, const Eigen::VectorXd& u);
/// Throws IoError on a malformed document.
FieldTable parse_field_csv(const std::string& text);

/// Legacy ASCII VTK structured grid with point data "u".
std::string format_vtk(const Mesh& mesh, const Eigen::VectorXd& u, const std::string& title);

/// Binary 8-bit PGM with one pixel per node, highest lattice row on top. Linear min-max
/// scaling; a constant field is all zeros.
std::string format_pgm(const Mesh& mesh, const Eigen::VectorXd& u);

/// min + k (max - min) / (count + 1) for k = 1..count; empty for a constant field.
std::vector<double> contour_levels(double min, double max, int count = 20);

struct ContourLine {
  double level;
  std::vector<Point> points;  // closed loops repeat the first point at the end
};

/// Marching squares over the structured lattice, segments chained into polylines.
/// Saddle cells are split by the sign of the cell-centre average.
std::vector<ContourLine> extract_contours(const Mesh& mesh, const Eigen::VectorXd& u,
                                          const std::vector<double>& levels);

/// Header "level,polyline,x,y"; polylines are numbered from 0 across all levels.
std::string format_contours_csv(const std::vector<ContourLine>& lines);

/// Report fields plus the config echo under "config".
nlohmann::json report_to_json(const ExperimentReport& report, const nlohmann::json& config_echo);
std::string format_report(const ExperimentReport& report, const nlohmann::json& config_echo);

struct OutputToggles {
  bool field_csv{true};
  bool vtk{true};
  bool pgm{true};
  bool contours{true};
  bool metrics{true};
};

/// One named field on its mesh; the name becomes the file stem.
struct NamedField {
  std::string name;
  const Mesh* mesh;
  Eigen::VectorXd values;
};

/// Writes the enabled files into `dir` (created if needed) and returns their paths.
/// Throws IoError naming the path on failure.
std::vector<std::filesystem::path> emit_outputs(const std::filesystem::path& dir, const ExperimentReport& report,
                                                const std::vector<NamedField>& fields,
                                                const nlohmann::json& config_echo, const OutputToggles& toggles = {});

void write_file(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace commfield
