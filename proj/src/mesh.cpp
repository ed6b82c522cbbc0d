#include "flowtopo/mesh.hpp"

#include <Eigen/LU>

#include <cmath>
#include <map>
#include <stdexcept>

namespace flowtopo {

Mesh Mesh::structured(int nx, int ny, double width, double height) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("mesh: nx, ny must be >= 1");
  if (!(width > 0.0) || !(height > 0.0))
    throw std::invalid_argument("mesh: width, height must be positive");

  Mesh m;
  m.nx_ = nx;
  m.ny_ = ny;
  m.width_ = width;
  m.height_ = height;

  const double hx = width / nx;
  const double hy = height / ny;
  m.vertices_.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) m.vertices_.emplace_back(i * hx, j * hy);

  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };

  m.tris_.reserve(2 * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      m.tris_.push_back({a, b, c});
      m.tris_.push_back({a, c, d});
    }
  }

  // Unique edge numbering in triangle-loop order; tri_edges_[t][i] is the edge
  // opposite local vertex i, i.e. between local vertices (i+1, i+2).
  std::map<std::pair<int, int>, int> edge_ids;
  std::vector<int> edge_tri_count;
  m.tri_edges_.resize(m.tris_.size());
  std::vector<int> edge_owner_tri;
  std::vector<int> edge_owner_opp;
  for (std::size_t t = 0; t < m.tris_.size(); ++t) {
    for (int i = 0; i < 3; ++i) {
      int a = m.tris_[t][(i + 1) % 3];
      int b = m.tris_[t][(i + 2) % 3];
      const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
      auto it = edge_ids.find(key);
      int id;
      if (it == edge_ids.end()) {
        id = static_cast<int>(m.edge_verts_.size());
        edge_ids.emplace(key, id);
        m.edge_verts_.push_back({key.first, key.second});
        edge_tri_count.push_back(0);
        edge_owner_tri.push_back(static_cast<int>(t));
        edge_owner_opp.push_back(m.tris_[t][i]);
      } else {
        id = it->second;
      }
      ++edge_tri_count[id];
      m.tri_edges_[t][i] = id;
    }
  }

  m.areas_.resize(m.tris_.size());
  m.jacobians_.resize(m.tris_.size());
  m.jac_inv_t_.resize(m.tris_.size());
  m.measure_ = 0.0;
  for (std::size_t t = 0; t < m.tris_.size(); ++t) {
    const Vec2& p0 = m.vertices_[m.tris_[t][0]];
    const Vec2& p1 = m.vertices_[m.tris_[t][1]];
    const Vec2& p2 = m.vertices_[m.tris_[t][2]];
    Mat2 J;
    J.col(0) = p1 - p0;
    J.col(1) = p2 - p0;
    const double det = J.determinant();
    if (!(det > 0.0)) throw std::runtime_error("mesh: nonpositive triangle area");
    m.jacobians_[t] = J;
    m.jac_inv_t_[t] = J.inverse().transpose();
    m.areas_[t] = 0.5 * det;
    m.measure_ += m.areas_[t];
  }

  m.vertex_boundary_.assign(m.vertices_.size(), false);
  m.edge_boundary_.assign(m.edge_verts_.size(), false);
  for (std::size_t e = 0; e < m.edge_verts_.size(); ++e) {
    if (edge_tri_count[e] != 1) continue;
    m.edge_boundary_[e] = true;
    const int a = m.edge_verts_[e][0], b = m.edge_verts_[e][1];
    m.vertex_boundary_[a] = true;
    m.vertex_boundary_[b] = true;
    BoundaryEdge be;
    be.edge = static_cast<int>(e);
    be.tri = edge_owner_tri[e];
    be.v0 = a;
    be.v1 = b;
    const Vec2 tangent = m.vertices_[b] - m.vertices_[a];
    be.length = tangent.norm();
    Vec2 n(tangent.y(), -tangent.x());
    const Vec2 to_opp = m.vertices_[edge_owner_opp[e]] - m.vertices_[a];
    if (n.dot(to_opp) > 0) n = -n;
    be.normal = n / n.norm();
    m.boundary_edges_.push_back(be);
  }

  return m;
}

int Mesh::locate(const Vec2& p, std::array<double, 3>& bary, double tol) const {
  const double hx = this->hx();
  const double hy = this->hy();
  Vec2 q = p;
  if (q.x() < -tol || q.x() > width_ + tol || q.y() < -tol || q.y() > height_ + tol)
    throw std::runtime_error("mesh: point outside domain");
  q.x() = std::min(width_, std::max(0.0, q.x()));
  q.y() = std::min(height_, std::max(0.0, q.y()));
  int i = std::min(nx_ - 1, static_cast<int>(std::floor(q.x() / hx)));
  int j = std::min(ny_ - 1, static_cast<int>(std::floor(q.y() / hy)));
  // local coordinates in cell; triangle (a,b,c) covers s >= t side of the
  // right diagonal, (a,c,d) the other
  const double s = q.x() / hx - i;
  const double t = q.y() / hy - j;
  const int cell = 2 * (j * nx_ + i);
  const int tri = (s >= t) ? cell : cell + 1;
  const Vec2& p0 = vertices_[tris_[tri][0]];
  const Vec2 rel = q - p0;
  const Mat2& JinvT = jac_inv_t_[tri];
  // reference coords: xi = Jinv * rel = JinvT^T * rel
  const Vec2 xi = JinvT.transpose() * rel;
  bary[0] = 1.0 - xi.x() - xi.y();
  bary[1] = xi.x();
  bary[2] = xi.y();
  for (double& b : bary) b = std::min(1.0, std::max(0.0, b));
  const double sb = bary[0] + bary[1] + bary[2];
  for (double& b : bary) b /= sb;
  return tri;
}

}  // namespace flowtopo
