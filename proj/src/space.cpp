#include "flowtopo/space.hpp"

#include "flowtopo/fem.hpp"

namespace flowtopo {

FunctionSpace::FunctionSpace(const Mesh& mesh, SpaceKind kind) : mesh_(&mesh), kind_(kind) {
  const int nv = mesh.num_vertices();
  nscalar_ = (kind == SpaceKind::VelocityP2) ? nv + mesh.num_edges() : nv;
  dirichlet_.assign(ndof(), false);
  for (int n = 0; n < nscalar_; ++n) {
    if (!node_on_boundary(n)) continue;
    if (is_vector()) {
      dirichlet_[2 * n] = true;
      dirichlet_[2 * n + 1] = true;
    } else {
      dirichlet_[n] = true;
    }
  }
}

Vec2 FunctionSpace::node_coord(int node) const {
  const int nv = mesh_->num_vertices();
  return node < nv ? mesh_->vertex(node) : mesh_->edge_midpoint(node - nv);
}

bool FunctionSpace::node_on_boundary(int node) const {
  const int nv = mesh_->num_vertices();
  return node < nv ? mesh_->vertex_on_boundary(node) : mesh_->edge_on_boundary(node - nv);
}

void FunctionSpace::element_nodes(int t, int out[6]) const {
  const auto& tri = mesh_->tri(t);
  out[0] = tri[0];
  out[1] = tri[1];
  out[2] = tri[2];
  if (kind_ == SpaceKind::VelocityP2) {
    const int nv = mesh_->num_vertices();
    const auto& te = mesh_->tri_edges(t);
    out[3] = nv + te[2];  // midpoint of (0,1)
    out[4] = nv + te[0];  // midpoint of (1,2)
    out[5] = nv + te[1];  // midpoint of (2,0)
  }
}

double Field::value_scalar(const Vec2& p) const {
  std::array<double, 3> bary;
  const int t = space->mesh().locate(p, bary);
  return eval_scalar(*this, t, bary[1], bary[2]);
}

Vec2 Field::value_vector(const Vec2& p) const {
  std::array<double, 3> bary;
  const int t = space->mesh().locate(p, bary);
  return eval_vector(*this, t, bary[1], bary[2]);
}

Vec2 Field::gradient_scalar(const Vec2& p) const {
  std::array<double, 3> bary;
  const int t = space->mesh().locate(p, bary);
  return eval_scalar_gradient(*this, t, bary[1], bary[2]);
}

Field interpolate_scalar(const FunctionSpace& s, const std::function<double(const Vec2&)>& f) {
  if (s.is_vector()) throw std::invalid_argument("interpolate_scalar: vector space");
  Field out(s);
  for (int n = 0; n < s.num_scalar_nodes(); ++n) out.coeff[n] = f(s.node_coord(n));
  return out;
}

Field interpolate_vector(const FunctionSpace& s, const std::function<Vec2(const Vec2&)>& f) {
  if (!s.is_vector()) throw std::invalid_argument("interpolate_vector: scalar space");
  Field out(s);
  for (int n = 0; n < s.num_scalar_nodes(); ++n) {
    const Vec2 v = f(s.node_coord(n));
    out.coeff[2 * n] = v.x();
    out.coeff[2 * n + 1] = v.y();
  }
  return out;
}

}  // namespace flowtopo
