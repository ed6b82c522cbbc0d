#include "flowtopo/vtk.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace flowtopo {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

void write_vtk(const std::string& path, const VtkOutput& out) {
  const Mesh& mesh = *out.mesh;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << "# vtk DataFile Version 3.0\nflowtopo fields\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  f << "POINTS " << mesh.num_vertices() << " double\n";
  for (int v = 0; v < mesh.num_vertices(); ++v)
    f << fmt(mesh.vertex(v).x()) << " " << fmt(mesh.vertex(v).y()) << " 0\n";
  f << "CELLS " << mesh.num_triangles() << " " << 4 * mesh.num_triangles() << "\n";
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.tri(t);
    f << "3 " << tri[0] << " " << tri[1] << " " << tri[2] << "\n";
  }
  f << "CELL_TYPES " << mesh.num_triangles() << "\n";
  for (int t = 0; t < mesh.num_triangles(); ++t) f << "5\n";

  if (!out.point_fields.empty()) {
    f << "POINT_DATA " << mesh.num_vertices() << "\n";
    for (const auto& [name, field] : out.point_fields) {
      if (field->space->is_vector()) {
        f << "VECTORS " << name << " double\n";
        for (int v = 0; v < mesh.num_vertices(); ++v)
          f << fmt(field->coeff[2 * v]) << " " << fmt(field->coeff[2 * v + 1]) << " 0\n";
      } else {
        f << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (int v = 0; v < mesh.num_vertices(); ++v) f << fmt(field->coeff[v]) << "\n";
      }
    }
  }
  if (!out.cell_fields.empty()) {
    f << "CELL_DATA " << mesh.num_triangles() << "\n";
    for (const auto& [name, values] : out.cell_fields) {
      f << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : values) f << fmt(v) << "\n";
    }
  }
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
  f << "\n";
  char buf[32];
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
      f << (i ? "," : "") << buf;
    }
    f << "\n";
  }
}

}  // namespace flowtopo
