#pragma once

#include <functional>

#include <Eigen/Sparse>

#include "flowtopo/kernels.hpp"
#include "flowtopo/quadrature.hpp"
#include "flowtopo/space.hpp"

namespace flowtopo {

using SpMat = Eigen::SparseMatrix<double>;

// Reference P2/P1 bases on the unit triangle (vertices (0,0),(1,0),(0,1)),
// barycentric ordering: 3 vertices, then midpoints of edges (01),(12),(20).
void p2_shape(double xi, double eta, double N[6]);
void p2_grad_ref(double xi, double eta, double dN[6][2]);
void p1_shape(double xi, double eta, double N[3]);
extern const double kP1GradRef[3][2];

// Field evaluation at a reference point of a given triangle. Vector Jacobians
// use the row convention (Du)_{ij} = du_i/dx_j, so grad(u):grad(v) = Du:Dv
// and (u.grad)v = Dv*u.
double eval_scalar(const Field& f, int tri, double xi, double eta);
Vec2 eval_scalar_gradient(const Field& f, int tri, double xi, double eta);
Vec2 eval_vector(const Field& f, int tri, double xi, double eta);
Mat2 eval_vector_jacobian(const Field& f, int tri, double xi, double eta);

// Assembled operators. Element loops run in fixed order (chunked, optionally
// threaded with ordered chunk concatenation) so matrices are reproducible
// bit-for-bit for a fixed mesh.
SpMat assemble_stiffness(const FunctionSpace& s, double weight, int quad_degree = 6);
SpMat assemble_mass(const FunctionSpace& s, int quad_degree = 6);
SpMat assemble_weighted_mass(const FunctionSpace& vel, const Field& phi,
                             const kernels::AlphaParams& alpha, int quad_degree = 6);
SpMat assemble_weighted_mass(const FunctionSpace& vel, const Field& phi,
                             const std::function<double(double)>& alpha_fn, int quad_degree = 6);
SpMat assemble_divergence(const FunctionSpace& vel, const FunctionSpace& pres,
                          int quad_degree = 6);

// b(u,v,w) = int (u.grad)v . w dx and its matrix realizations:
//   w^T N(u) v  = b(u, v, w),   w^T Nt(u) v = b(v, u, w).
double trilinear_eval(const Field& u, const Field& v, const Field& w, int quad_degree = 6);
SpMat assemble_convection(const Field& u_adv, int quad_degree = 6);
SpMat assemble_convection_transposed(const Field& u_adv, int quad_degree = 6);

// Deterministic quadrature of a pointwise functional.
double integrate(const Mesh& mesh, int quad_degree,
                 const std::function<double(int tri, double xi, double eta, const Vec2& x)>& f);

// Linear functionals. Velocity: l(v) = int fvec.v + fmat:Dv dx. Design/
// pressure: l(q) = int a q + b.grad(q) dx (b ignored for pressure).
Eigen::VectorXd assemble_velocity_functional(
    const FunctionSpace& vel, int quad_degree,
    const std::function<void(int tri, double xi, double eta, const Vec2& x, Vec2& fvec,
                             Mat2& fmat)>& integrand);
Eigen::VectorXd assemble_scalar_functional(
    const FunctionSpace& s, int quad_degree,
    const std::function<void(int tri, double xi, double eta, const Vec2& x, double& a, Vec2& b)>&
        integrand);

double norm_L2(const Field& f, int quad_degree = 6);
double seminorm_H1(const Field& f, int quad_degree = 6);
double error_L2_vector(const Field& u, const std::function<Vec2(const Vec2&)>& exact,
                       int quad_degree = 8);
double error_H1semi_vector(const Field& u, const std::function<Mat2(const Vec2&)>& exact_jac,
                           int quad_degree = 8);

// Boundary line integral of g.n over the whole boundary.
double boundary_flux(const Mesh& mesh, const std::function<Vec2(const Vec2&)>& g);

// FLOWTOPO_THREADS (>=1) caps assembly parallelism; results do not depend on it.
int thread_count();

}  // namespace flowtopo
