#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace flowtopo {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

struct BoundaryEdge {
  int edge = -1;      // global edge index
  int tri = -1;       // owning triangle
  int v0 = -1, v1 = -1;
  Vec2 normal = Vec2::Zero();  // outward unit normal
  double length = 0.0;
};

// Structured triangulation of [0,width] x [0,height]. Each grid cell is split
// along the right diagonal into two positively oriented triangles. Unique
// edges are enumerated in first-appearance order over the triangle loop, so
// the numbering is reproducible.
class Mesh {
 public:
  static Mesh structured(int nx, int ny, double width, double height);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(tris_.size()); }
  int num_edges() const { return static_cast<int>(edge_verts_.size()); }

  const Vec2& vertex(int v) const { return vertices_[v]; }
  const std::array<int, 3>& tri(int t) const { return tris_[t]; }
  const std::array<int, 3>& tri_edges(int t) const { return tri_edges_[t]; }
  const std::array<int, 2>& edge(int e) const { return edge_verts_[e]; }
  Vec2 edge_midpoint(int e) const {
    return 0.5 * (vertices_[edge_verts_[e][0]] + vertices_[edge_verts_[e][1]]);
  }

  double tri_area(int t) const { return areas_[t]; }
  // Jacobian of the affine reference map [p1-p0, p2-p0].
  const Mat2& tri_jacobian(int t) const { return jacobians_[t]; }
  const Mat2& tri_jacobian_inv_t(int t) const { return jac_inv_t_[t]; }

  bool vertex_on_boundary(int v) const { return vertex_boundary_[v]; }
  bool edge_on_boundary(int e) const { return edge_boundary_[e]; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }

  double measure() const { return measure_; }
  double width() const { return width_; }
  double height() const { return height_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return width_ / nx_; }
  double hy() const { return height_ / ny_; }

  // Triangle containing p (p clamped to the closed domain; throws if p lies
  // outside by more than tol). Barycentric coordinates returned in bary.
  int locate(const Vec2& p, std::array<double, 3>& bary, double tol = 1e-8) const;

 private:
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> tris_;
  std::vector<std::array<int, 3>> tri_edges_;  // edge i opposite local vertex i
  std::vector<std::array<int, 2>> edge_verts_;
  std::vector<double> areas_;
  std::vector<Mat2> jacobians_;
  std::vector<Mat2> jac_inv_t_;
  std::vector<bool> vertex_boundary_;
  std::vector<bool> edge_boundary_;
  std::vector<BoundaryEdge> boundary_edges_;
  double measure_ = 0.0;
  double width_ = 0.0, height_ = 0.0;
  int nx_ = 0, ny_ = 0;
};

}  // namespace flowtopo
