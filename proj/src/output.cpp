#include "commfield/output.hpp"

#include "commfield/error.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace commfield {

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_structured(const Mesh& mesh, const Eigen::VectorXd& u, const char* where) {
  if (mesh.ni < 1 || mesh.nj < 1 || mesh.node_count() != (mesh.ni + 1) * (mesh.nj + 1))
    throw ValidationError(std::string(where) + ": mesh is not a structured lattice");
  if (u.size() != mesh.node_count()) throw ValidationError(std::string(where) + ": field size does not match the mesh");
}

double parse_number(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    throw IoError("field CSV line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  return v;
}

}  // namespace

FieldTable field_table(const Mesh& mesh, const Eigen::VectorXd& u) {
  if (u.size() != mesh.node_count()) throw ValidationError("field_table: field size does not match the mesh");
  return {mesh.nodes, std::vector<double>(u.data(), u.data() + u.size())};
}

std::string format_field_csv(const FieldTable& table) {
  if (table.nodes.size() != table.values.size()) throw ValidationError("format_field_csv: size mismatch");
  std::string out = "x,y,u\n";
  for (std::size_t i = 0; i < table.nodes.size(); ++i)
    out += g17(table.nodes[i].x()) + ',' + g17(table.nodes[i].y()) + ',' + g17(table.values[i]) + '\n';
  return out;
}

std::string format_field_csv(const Mesh& mesh, const Eigen::VectorXd& u) {
  return format_field_csv(field_table(mesh, u));
}

FieldTable parse_field_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "x,y,u") throw IoError("field CSV: missing header 'x,y,u'");
  FieldTable t;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos)
      throw IoError("field CSV line " + std::to_string(number) + ": expected three columns");
    const std::string_view v(line);
    t.nodes.emplace_back(parse_number(v.substr(0, c1), number), parse_number(v.substr(c1 + 1, c2 - c1 - 1), number));
    t.values.push_back(parse_number(v.substr(c2 + 1), number));
  }
  return t;
}

std::string format_vtk(const Mesh& mesh, const Eigen::VectorXd& u, const std::string& title) {
  require_structured(mesh, u, "format_vtk");
  std::string out = "# vtk DataFile Version 3.0\n" + (title.empty() ? std::string("u") : title) + "\nASCII\n";
  out += "DATASET STRUCTURED_GRID\n";
  out += "DIMENSIONS " + std::to_string(mesh.ni + 1) + ' ' + std::to_string(mesh.nj + 1) + " 1\n";
  out += "POINTS " + std::to_string(mesh.node_count()) + " double\n";
  for (const auto& p : mesh.nodes) out += g17(p.x()) + ' ' + g17(p.y()) + " 0\n";
  out += "POINT_DATA " + std::to_string(mesh.node_count()) + "\nSCALARS u double 1\nLOOKUP_TABLE default\n";
  for (Index i = 0; i < u.size(); ++i) out += g17(u(i)) + '\n';
  return out;
}

std::string format_pgm(const Mesh& mesh, const Eigen::VectorXd& u) {
  require_structured(mesh, u, "format_pgm");
  const Index w = mesh.ni + 1, h = mesh.nj + 1;
  const double lo = u.minCoeff(), hi = u.maxCoeff();
  std::string out = "P5\n" + std::to_string(w) + ' ' + std::to_string(h) + "\n255\n";
  for (Index j = h - 1; j >= 0; --j)
    for (Index i = 0; i < w; ++i) {
      const double v = hi > lo ? (u(mesh.node_index(i, j)) - lo) / (hi - lo) : 0.0;
      out += static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v)));
    }
  return out;
}

std::vector<double> contour_levels(double min, double max, int count) {
  std::vector<double> out;
  if (!(max > min) || count < 1) return out;
  for (int k = 1; k <= count; ++k) out.push_back(min + k * (max - min) / (count + 1));
  return out;
}

std::vector<ContourLine> extract_contours(const Mesh& mesh, const Eigen::VectorXd& u,
                                          const std::vector<double>& levels) {
  require_structured(mesh, u, "extract_contours");
  const Index n = mesh.node_count();
  std::vector<ContourLine> out;

  for (double level : levels) {
    // Segment endpoints are identified by the lattice edge they sit on.
    std::vector<std::array<Index, 2>> seg_edges;
    std::map<Index, Point> edge_point;
    std::map<Index, std::vector<std::size_t>> edge_segs;
    auto crossing = [&](Index a, Index b) {
      const Index key = std::min(a, b) * n + std::max(a, b);
      if (!edge_point.count(key)) {
        const double t = (level - u(a)) / (u(b) - u(a));
        const Point& pa = mesh.nodes[static_cast<std::size_t>(a)];
        const Point& pb = mesh.nodes[static_cast<std::size_t>(b)];
        edge_point[key] = pa + t * (pb - pa);
      }
      return key;
    };
    auto add = [&](Index e0, Index e1) {
      edge_segs[e0].push_back(seg_edges.size());
      edge_segs[e1].push_back(seg_edges.size());
      seg_edges.push_back({e0, e1});
    };

    for (Index j = 0; j < mesh.nj; ++j)
      for (Index i = 0; i < mesh.ni; ++i) {
        const std::array<Index, 4> c{mesh.node_index(i, j), mesh.node_index(i + 1, j), mesh.node_index(i + 1, j + 1),
                                     mesh.node_index(i, j + 1)};
        std::array<bool, 4> above{};
        for (int k = 0; k < 4; ++k) above[static_cast<std::size_t>(k)] = u(c[static_cast<std::size_t>(k)]) > level;
        std::vector<Index> hits;  // crossed edges in counter-clockwise order
        for (int k = 0; k < 4; ++k) {
          const auto a = static_cast<std::size_t>(k), b = static_cast<std::size_t>((k + 1) % 4);
          if (above[a] != above[b]) hits.push_back(crossing(c[a], c[b]));
        }
        if (hits.size() == 2) {
          add(hits[0], hits[1]);
        } else if (hits.size() == 4) {
          // Edge k joins corners k and k+1. If corner 0 and the centre agree, the loop
          // around corner 1 and the one around corner 3 are cut off separately.
          const double centre = 0.25 * (u(c[0]) + u(c[1]) + u(c[2]) + u(c[3]));
          if ((centre > level) == above[0]) {
            add(hits[0], hits[1]);
            add(hits[2], hits[3]);
          } else {
            add(hits[3], hits[0]);
            add(hits[1], hits[2]);
          }
        }
      }

    std::vector<char> used(seg_edges.size(), 0);
    auto walk = [&](std::size_t first, Index start_edge) {
      ContourLine line{level, {edge_point.at(start_edge)}};
      Index at = start_edge;
      std::size_t seg = first;
      while (true) {
        used[seg] = 1;
        const Index next = seg_edges[seg][0] == at ? seg_edges[seg][1] : seg_edges[seg][0];
        line.points.push_back(edge_point.at(next));
        at = next;
        const auto& around = edge_segs.at(at);
        const auto it = std::find_if(around.begin(), around.end(), [&](std::size_t s) { return !used[s]; });
        if (it == around.end()) break;
        seg = *it;
      }
      out.push_back(std::move(line));
    };
    // Open polylines start at boundary edges (one incident segment); what remains are loops.
    for (std::size_t s = 0; s < seg_edges.size(); ++s)
      for (Index e : seg_edges[s])
        if (!used[s] && edge_segs.at(e).size() == 1) walk(s, e);
    for (std::size_t s = 0; s < seg_edges.size(); ++s)
      if (!used[s]) walk(s, seg_edges[s][0]);
  }
  return out;
}

std::string format_contours_csv(const std::vector<ContourLine>& lines) {
  std::string out = "level,polyline,x,y\n";
  for (std::size_t k = 0; k < lines.size(); ++k)
    for (const auto& p : lines[k].points)
      out += g17(lines[k].level) + ',' + std::to_string(k) + ',' + g17(p.x()) + ',' + g17(p.y()) + '\n';
  return out;
}

nlohmann::json report_to_json(const ExperimentReport& report, const nlohmann::json& config_echo) {
  nlohmann::json j;
  j["scenario"] = report.scenario;
  j["variants"] = report.variants;
  j["summary"] = report.summary;
  j["provenance"] = report.provenance;
  j["config"] = config_echo;
  return j;
}

std::string format_report(const ExperimentReport& report, const nlohmann::json& config_echo) {
  return report_to_json(report, config_echo).dump(2) + '\n';
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing: " + std::strerror(errno));
  f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  f.close();
  if (!f) throw IoError("write failed: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::filesystem::path> emit_outputs(const std::filesystem::path& dir, const ExperimentReport& report,
                                                const std::vector<NamedField>& fields,
                                                const nlohmann::json& config_echo, const OutputToggles& toggles) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::filesystem::path& p, const std::string& contents) {
    write_file(p, contents);
    written.push_back(p);
  };
  for (const auto& f : fields) {
    if (toggles.field_csv) put(dir / (f.name + ".csv"), format_field_csv(*f.mesh, f.values));
    if (toggles.vtk) put(dir / (f.name + ".vtk"), format_vtk(*f.mesh, f.values, f.name));
    if (toggles.pgm) put(dir / (f.name + ".pgm"), format_pgm(*f.mesh, f.values));
    if (toggles.contours) {
      const auto levels = contour_levels(f.values.minCoeff(), f.values.maxCoeff());
      put(dir / (f.name + "_contours.csv"), format_contours_csv(extract_contours(*f.mesh, f.values, levels)));
    }
  }
  if (toggles.metrics) put(dir / "metrics.json", format_report(report, config_echo));
  return written;
}

}  // namespace commfield
