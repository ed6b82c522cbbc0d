#pragma once

#include <string>
#include <vector>

#include "flowtopo/space.hpp"

namespace flowtopo {

// Legacy ASCII VTK unstructured-grid writer. Scalar P1 fields become point
// data; velocity fields are sampled at the vertices and written as vectors.
// Cell data entries carry one value per triangle.
struct VtkOutput {
  const Mesh* mesh = nullptr;
  std::vector<std::pair<std::string, const Field*>> point_fields;
  std::vector<std::pair<std::string, std::vector<double>>> cell_fields;
};

void write_vtk(const std::string& path, const VtkOutput& out);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace flowtopo
