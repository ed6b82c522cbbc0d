#pragma once

#include <functional>
#include <stdexcept>

#include <Eigen/Core>

#include "flowtopo/mesh.hpp"

namespace flowtopo {

enum class SpaceKind { VelocityP2, PressureP1, DesignP1 };

// Discrete spaces on a shared mesh: vector-valued quadratic velocity
// (Taylor-Hood upper half), scalar linear pressure and scalar linear design.
// P2 scalar nodes are the vertices followed by the edge midpoints; velocity
// DOFs are interleaved (node*2 + component).
class FunctionSpace {
 public:
  FunctionSpace(const Mesh& mesh, SpaceKind kind);

  const Mesh& mesh() const { return *mesh_; }
  SpaceKind kind() const { return kind_; }
  bool is_vector() const { return kind_ == SpaceKind::VelocityP2; }
  int num_scalar_nodes() const { return nscalar_; }
  int ndof() const { return is_vector() ? 2 * nscalar_ : nscalar_; }
  int nodes_per_element() const { return kind_ == SpaceKind::VelocityP2 ? 6 : 3; }

  Vec2 node_coord(int node) const;
  bool node_on_boundary(int node) const;
  const std::vector<bool>& dirichlet_mask() const { return dirichlet_; }

  // Global scalar node indices of element t (3 vertices, then for P2 the edge
  // midpoints opposite each local vertex reordered to the (01,12,20) pattern).
  void element_nodes(int t, int out[6]) const;

 private:
  const Mesh* mesh_;
  SpaceKind kind_;
  int nscalar_;
  std::vector<bool> dirichlet_;
};

struct Field {
  const FunctionSpace* space = nullptr;
  Eigen::VectorXd coeff;

  Field() = default;
  explicit Field(const FunctionSpace& s) : space(&s), coeff(Eigen::VectorXd::Zero(s.ndof())) {}

  double value_scalar(const Vec2& p) const;
  Vec2 value_vector(const Vec2& p) const;
  Vec2 gradient_scalar(const Vec2& p) const;
};

Field interpolate_scalar(const FunctionSpace& s, const std::function<double(const Vec2&)>& f);
Field interpolate_vector(const FunctionSpace& s, const std::function<Vec2(const Vec2&)>& f);

}  // namespace flowtopo
