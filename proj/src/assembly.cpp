#include "flowtopo/fem.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <thread>
#include <vector>

namespace flowtopo {

void p2_shape(double xi, double eta, double N[6]) {
  const double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
  N[0] = l0 * (2.0 * l0 - 1.0);
  N[1] = l1 * (2.0 * l1 - 1.0);
  N[2] = l2 * (2.0 * l2 - 1.0);
  N[3] = 4.0 * l0 * l1;
  N[4] = 4.0 * l1 * l2;
  N[5] = 4.0 * l2 * l0;
}

void p2_grad_ref(double xi, double eta, double dN[6][2]) {
  const double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
  dN[0][0] = 1.0 - 4.0 * l0;
  dN[0][1] = 1.0 - 4.0 * l0;
  dN[1][0] = 4.0 * l1 - 1.0;
  dN[1][1] = 0.0;
  dN[2][0] = 0.0;
  dN[2][1] = 4.0 * l2 - 1.0;
  dN[3][0] = 4.0 * (l0 - l1);
  dN[3][1] = -4.0 * l1;
  dN[4][0] = 4.0 * l2;
  dN[4][1] = 4.0 * l1;
  dN[5][0] = -4.0 * l2;
  dN[5][1] = 4.0 * (l0 - l2);
}

void p1_shape(double xi, double eta, double N[3]) {
  N[0] = 1.0 - xi - eta;
  N[1] = xi;
  N[2] = eta;
}

const double kP1GradRef[3][2] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};

int thread_count() {
  static int n = [] {
    if (const char* env = std::getenv("FLOWTOPO_THREADS")) {
      const int v = std::atoi(env);
      if (v >= 1) return std::min(v, 16);
    }
    return 1;
  }();
  return n;
}

namespace {

constexpr int kChunk = 512;

// Runs fn(chunk_index, begin, end) over the element range. Chunk boundaries
// are fixed by kChunk, so per-chunk results are independent of the thread
// count; callers combine them in chunk order.
void for_chunks(int n, const std::function<void(int, int, int)>& fn) {
  const int nchunks = (n + kChunk - 1) / kChunk;
  const int nthreads = std::min(thread_count(), std::max(1, nchunks));
  if (nthreads <= 1) {
    for (int c = 0; c < nchunks; ++c) fn(c, c * kChunk, std::min(n, (c + 1) * kChunk));
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (int tidx = 0; tidx < nthreads; ++tidx) {
    pool.emplace_back([&, tidx] {
      for (int c = tidx; c < nchunks; c += nthreads)
        fn(c, c * kChunk, std::min(n, (c + 1) * kChunk));
    });
  }
  for (auto& th : pool) th.join();
}

using TripletVec = std::vector<Eigen::Triplet<double>>;

SpMat from_chunks(int rows, int cols, std::vector<TripletVec>& chunks) {
  std::size_t total = 0;
  for (const auto& c : chunks) total += c.size();
  TripletVec all;
  all.reserve(total);
  for (auto& c : chunks) all.insert(all.end(), c.begin(), c.end());
  SpMat m(rows, cols);
  m.setFromTriplets(all.begin(), all.end());
  m.makeCompressed();
  return m;
}

struct ElemBasis {
  // physical gradients of the element basis at one quadrature point
  double N[6];
  Vec2 g[6];
  int nodes[6];
  int nb;
};

void scalar_basis_at(const FunctionSpace& s, int t, double xi, double eta, ElemBasis& out) {
  out.nb = s.nodes_per_element();
  s.element_nodes(t, out.nodes);
  const Mat2& JinvT = s.mesh().tri_jacobian_inv_t(t);
  if (out.nb == 6) {
    double dN[6][2];
    p2_shape(xi, eta, out.N);
    p2_grad_ref(xi, eta, dN);
    for (int k = 0; k < 6; ++k) out.g[k] = JinvT * Vec2(dN[k][0], dN[k][1]);
  } else {
    p1_shape(xi, eta, out.N);
    for (int k = 0; k < 3; ++k) out.g[k] = JinvT * Vec2(kP1GradRef[k][0], kP1GradRef[k][1]);
  }
}

Vec2 phys_point(const Mesh& mesh, int t, double xi, double eta) {
  const Vec2& p0 = mesh.vertex(mesh.tri(t)[0]);
  return p0 + mesh.tri_jacobian(t) * Vec2(xi, eta);
}

}  // namespace

double eval_scalar(const Field& f, int tri, double xi, double eta) {
  ElemBasis b;
  scalar_basis_at(*f.space, tri, xi, eta, b);
  double v = 0.0;
  for (int k = 0; k < b.nb; ++k) v += f.coeff[b.nodes[k]] * b.N[k];
  return v;
}

Vec2 eval_scalar_gradient(const Field& f, int tri, double xi, double eta) {
  ElemBasis b;
  scalar_basis_at(*f.space, tri, xi, eta, b);
  Vec2 g = Vec2::Zero();
  for (int k = 0; k < b.nb; ++k) g += f.coeff[b.nodes[k]] * b.g[k];
  return g;
}

Vec2 eval_vector(const Field& f, int tri, double xi, double eta) {
  ElemBasis b;
  scalar_basis_at(*f.space, tri, xi, eta, b);
  Vec2 v = Vec2::Zero();
  for (int k = 0; k < b.nb; ++k) {
    v.x() += f.coeff[2 * b.nodes[k]] * b.N[k];
    v.y() += f.coeff[2 * b.nodes[k] + 1] * b.N[k];
  }
  return v;
}

Mat2 eval_vector_jacobian(const Field& f, int tri, double xi, double eta) {
  ElemBasis b;
  scalar_basis_at(*f.space, tri, xi, eta, b);
  Mat2 J = Mat2::Zero();
  for (int k = 0; k < b.nb; ++k) {
    J.row(0) += f.coeff[2 * b.nodes[k]] * b.g[k].transpose();
    J.row(1) += f.coeff[2 * b.nodes[k] + 1] * b.g[k].transpose();
  }
  return J;
}

SpMat assemble_stiffness(const FunctionSpace& s, double weight, int quad_degree) {
  if (weight < 0.0) throw std::invalid_argument("assemble_stiffness: negative weight");
  const Mesh& mesh = s.mesh();
  const auto& rule = triangle_rule(quad_degree);
  const int nt = mesh.num_triangles();
  const int nchunks = (nt + kChunk - 1) / kChunk;
  std::vector<TripletVec> chunks(nchunks);
  for_chunks(nt, [&](int c, int begin, int end) {
    TripletVec& trip = chunks[c];
    ElemBasis b;
    for (int t = begin; t < end; ++t) {
      const double detj = 2.0 * mesh.tri_area(t);
      for (const auto& q : rule) {
        scalar_basis_at(s, t, q.xi, q.eta, b);
        const double w = q.w * detj * weight;
        for (int i = 0; i < b.nb; ++i) {
          for (int j = 0; j < b.nb; ++j) {
            const double v = w * b.g[i].dot(b.g[j]);
            if (s.is_vector()) {
              trip.emplace_back(2 * b.nodes[i], 2 * b.nodes[j], v);
              trip.emplace_back(2 * b.nodes[i] + 1, 2 * b.nodes[j] + 1, v);
            } else {
              trip.emplace_back(b.nodes[i], b.nodes[j], v);
            }
          }
        }
      }
    }
  });
  return from_chunks(s.ndof(), s.ndof(), chunks);
}

SpMat assemble_mass(const FunctionSpace& s, int quad_degree) {
  const Mesh& mesh = s.mesh();
  const auto& rule = triangle_rule(quad_degree);
  const int nt = mesh.num_triangles();
  const int nchunks = (nt + kChunk - 1) / kChunk;
  std::vector<TripletVec> chunks(nchunks);
  for_chunks(nt, [&](int c, int begin, int end) {
    TripletVec& trip = chunks[c];
    ElemBasis b;
    for (int t = begin; t < end; ++t) {
      const double detj = 2.0 * mesh.tri_area(t);
      for (const auto& q : rule) {
        scalar_basis_at(s, t, q.xi, q.eta, b);
        const double w = q.w * detj;
        for (int i = 0; i < b.nb; ++i)
          for (int j = 0; j < b.nb; ++j) {
            const double v = w * b.N[i] * b.N[j];
            if (s.is_vector()) {
              trip.emplace_back(2 * b.nodes[i], 2 * b.nodes[j], v);
              trip.emplace_back(2 * b.nodes[i] + 1, 2 * b.nodes[j] + 1, v);
            } else {
              trip.emplace_back(b.nodes[i], b.nodes[j], v);
            }
          }
      }
    }
  });
  return from_chunks(s.ndof(), s.ndof(), chunks);
}

namespace {

SpMat weighted_mass_impl(const FunctionSpace& vel, const Field& phi,
                         const std::function<void(const double*, double*, std::size_t)>& alpha_batch,
                         int quad_degree) {
  if (!vel.is_vector()) throw std::invalid_argument("assemble_weighted_mass: velocity space expected");
  if (phi.space->kind() != SpaceKind::DesignP1)
    throw std::invalid_argument("assemble_weighted_mass: design-space phi expected");
  if (&phi.space->mesh() != &vel.mesh())
    throw std::invalid_argument("assemble_weighted_mass: mismatched meshes");
  const double lo = phi.coeff.minCoeff(), hi = phi.coeff.maxCoeff();
  if (lo < -1.0 - 1e-12 || hi > 1.0 + 1e-12)
    throw std::invalid_argument("assemble_weighted_mass: phi outside [-1,1]");

  const Mesh& mesh = vel.mesh();
  const auto& rule = triangle_rule(quad_degree);
  const int nt = mesh.num_triangles();
  const int nq = static_cast<int>(rule.size());

  // Batch-evaluate alpha at every quadrature point (element-major order).
  std::vector<double> phi_q(static_cast<std::size_t>(nt) * nq);
  for_chunks(nt, [&](int, int begin, int end) {
    for (int t = begin; t < end; ++t) {
      const auto& tri = mesh.tri(t);
      for (int q = 0; q < nq; ++q) {
        const double l0 = 1.0 - rule[q].xi - rule[q].eta;
        double v = l0 * phi.coeff[tri[0]] + rule[q].xi * phi.coeff[tri[1]] +
                   rule[q].eta * phi.coeff[tri[2]];
        phi_q[static_cast<std::size_t>(t) * nq + q] = std::min(1.0, std::max(-1.0, v));
      }
    }
  });
  std::vector<double> alpha_q(phi_q.size());
  alpha_batch(phi_q.data(), alpha_q.data(), phi_q.size());

  const int nchunks = (nt + kChunk - 1) / kChunk;
  std::vector<TripletVec> chunks(nchunks);
  for_chunks(nt, [&](int c, int begin, int end) {
    TripletVec& trip = chunks[c];
    ElemBasis b;
    for (int t = begin; t < end; ++t) {
      const double detj = 2.0 * mesh.tri_area(t);
      for (int q = 0; q < nq; ++q) {
        const double a = alpha_q[static_cast<std::size_t>(t) * nq + q];
        if (a == 0.0) continue;
        scalar_basis_at(vel, t, rule[q].xi, rule[q].eta, b);
        const double w = rule[q].w * detj * a;
        for (int i = 0; i < b.nb; ++i)
          for (int j = 0; j < b.nb; ++j) {
            const double v = w * b.N[i] * b.N[j];
            trip.emplace_back(2 * b.nodes[i], 2 * b.nodes[j], v);
            trip.emplace_back(2 * b.nodes[i] + 1, 2 * b.nodes[j] + 1, v);
          }
      }
    }
  });
  return from_chunks(vel.ndof(), vel.ndof(), chunks);
}

}  // namespace

SpMat assemble_weighted_mass(const FunctionSpace& vel, const Field& phi,
                             const kernels::AlphaParams& alpha, int quad_degree) {
  return weighted_mass_impl(
      vel, phi,
      [&alpha](const double* in, double* out, std::size_t n) {
        kernels::alpha_eval(alpha, in, out, n);
      },
      quad_degree);
}

SpMat assemble_weighted_mass(const FunctionSpace& vel, const Field& phi,
                             const std::function<double(double)>& alpha_fn, int quad_degree) {
  return weighted_mass_impl(
      vel, phi,
      [&alpha_fn](const double* in, double* out, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
          out[i] = alpha_fn(in[i]);
          if (out[i] < 0.0)
            throw std::invalid_argument("assemble_weighted_mass: alpha_fn returned a negative value");
        }
      },
      quad_degree);
}

SpMat assemble_divergence(const FunctionSpace& vel, const FunctionSpace& pres, int quad_degree) {
  if (&vel.mesh() != &pres.mesh())
    throw std::invalid_argument("assemble_divergence: mismatched meshes");
  const Mesh& mesh = vel.mesh();
  const auto& rule = triangle_rule(quad_degree);
  const int nt = mesh.num_triangles();
  const int nchunks = (nt + kChunk - 1) / kChunk;
  std::vector<TripletVec> chunks(nchunks);
  for_chunks(nt, [&](int c, int begin, int end) {
    TripletVec& trip = chunks[c];
    ElemBasis bv, bp;
    for (int t = begin; t < end; ++t) {
      const double detj = 2.0 * mesh.tri_area(t);
      for (const auto& q : rule) {
        scalar_basis_at(vel, t, q.xi, q.eta, bv);
        scalar_basis_at(pres, t, q.xi, q.eta, bp);
        const double w = q.w * detj;
        for (int r = 0; r < bp.nb; ++r)
          for (int l = 0; l < bv.nb; ++l) {
            trip.emplace_back(bp.nodes[r], 2 * bv.nodes[l], w * bp.N[r] * bv.g[l].x());
            trip.emplace_back(bp.nodes[r], 2 * bv.nodes[l] + 1, w * bp.N[r] * bv.g[l].y());
          }
      }
    }
  });
  return from_chunks(pres.ndof(), vel.ndof(), chunks);
}

double trilinear_eval(const Field& u, const Field& v, const Field& w, int quad_degree) {
  const Mesh& mesh = u.space->mesh();
  return integrate(mesh, quad_degree, [&](int t, double xi, double eta, const Vec2&) {
    const Vec2 uv = eval_vector(u, t, xi, eta);
    const Mat2 Dv = eval_vector_jacobian(v, t, xi, eta);
    const Vec2 wv = eval_vector(w, t, xi, eta);
    return (Dv * uv).dot(wv);
  });
}

SpMat assemble_convection(const Field& u_adv, int quad_degree) {
  const FunctionSpace& s = *u_adv.space;
  const Mesh& mesh = s.mesh();
  const auto& rule = triangle_rule(quad_degree);
  const int nt = mesh.num_triangles();
  const int nchunks = (nt + kChunk - 1) / kChunk;
  std::vector<TripletVec> chunks(nchunks);
  for_chunks(nt, [&](int c, int begin, int end) {
    TripletVec& trip = chunks[c];
    ElemBasis b;
    for (int t = begin; t < end; ++t) {
      const double detj = 2.0 * mesh.tri_area(t);
      for (const auto& q : rule) {
        scalar_basis_at(s, t, q.xi, q.eta, b);
        Vec2 uq = Vec2::Zero();
        for (int k = 0; k < b.nb; ++k) {
          uq.x() += u_adv.coeff[2 * b.nodes[k]] * b.N[k];
          uq.y() += u_adv.coeff[2 * b.nodes[k] + 1] * b.N[k];
        }
        const double w = q.w * detj;
        for (int i = 0; i < b.nb; ++i)
          for (int l = 0; l < b.nb; ++l) {
            const double v = w * b.N[i] * uq.dot(b.g[l]);
            trip.emplace_back(2 * b.nodes[i], 2 * b.nodes[l], v);
            trip.emplace_back(2 * b.nodes[i] + 1, 2 * b.nodes[l] + 1, v);
          }
      }
    }
  });
  return from_chunks(s.ndof(), s.ndof(), chunks);
}

SpMat assemble_convection_transposed(const Field& u_adv, int quad_degree) {
  const FunctionSpace& s = *u_adv.space;
  const Mesh& mesh = s.mesh();
  const auto& rule = triangle_rule(quad_degree);
  const int nt = mesh.num_triangles();
  const int nchunks = (nt + kChunk - 1) / kChunk;
  std::vector<TripletVec> chunks(nchunks);
  for_chunks(nt, [&](int c, int begin, int end) {
    TripletVec& trip = chunks[c];
    ElemBasis b;
    for (int t = begin; t < end; ++t) {
      const double detj = 2.0 * mesh.tri_area(t);
      for (const auto& q : rule) {
        scalar_basis_at(s, t, q.xi, q.eta, b);
        Mat2 Du = Mat2::Zero();
        for (int k = 0; k < b.nb; ++k) {
          Du.row(0) += u_adv.coeff[2 * b.nodes[k]] * b.g[k].transpose();
          Du.row(1) += u_adv.coeff[2 * b.nodes[k] + 1] * b.g[k].transpose();
        }
        const double w = q.w * detj;
        for (int i = 0; i < b.nb; ++i)
          for (int l = 0; l < b.nb; ++l) {
            const double nn = w * b.N[i] * b.N[l];
            for (int ci = 0; ci < 2; ++ci)
              for (int cl = 0; cl < 2; ++cl)
                trip.emplace_back(2 * b.nodes[i] + ci, 2 * b.nodes[l] + cl, nn * Du(ci, cl));
          }
      }
    }
  });
  return from_chunks(s.ndof(), s.ndof(), chunks);
}

double integrate(const Mesh& mesh, int quad_degree,
                 const std::function<double(int, double, double, const Vec2&)>& f) {
  const auto& rule = triangle_rule(quad_degree);
  const int nt = mesh.num_triangles();
  const int nchunks = (nt + kChunk - 1) / kChunk;
  std::vector<double> partial(nchunks, 0.0);
  for_chunks(nt, [&](int c, int begin, int end) {
    double s = 0.0;
    for (int t = begin; t < end; ++t) {
      const double detj = 2.0 * mesh.tri_area(t);
      for (const auto& q : rule)
        s += q.w * detj * f(t, q.xi, q.eta, phys_point(mesh, t, q.xi, q.eta));
    }
    partial[c] = s;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

Eigen::VectorXd assemble_velocity_functional(
    const FunctionSpace& vel, int quad_degree,
    const std::function<void(int, double, double, const Vec2&, Vec2&, Mat2&)>& integrand) {
  const Mesh& mesh = vel.mesh();
  const auto& rule = triangle_rule(quad_degree);
  const int nt = mesh.num_triangles();
  const int nchunks = (nt + kChunk - 1) / kChunk;
  std::vector<Eigen::VectorXd> partial(nchunks);
  for_chunks(nt, [&](int c, int begin, int end) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(vel.ndof());
    ElemBasis b;
    for (int t = begin; t < end; ++t) {
      const double detj = 2.0 * mesh.tri_area(t);
      for (const auto& q : rule) {
        scalar_basis_at(vel, t, q.xi, q.eta, b);
        Vec2 fvec = Vec2::Zero();
        Mat2 fmat = Mat2::Zero();
        integrand(t, q.xi, q.eta, phys_point(mesh, t, q.xi, q.eta), fvec, fmat);
        const double w = q.w * detj;
        for (int i = 0; i < b.nb; ++i) {
          acc[2 * b.nodes[i]] += w * (fvec.x() * b.N[i] + fmat.row(0).dot(b.g[i]));
          acc[2 * b.nodes[i] + 1] += w * (fvec.y() * b.N[i] + fmat.row(1).dot(b.g[i]));
        }
      }
    }
    partial[c] = std::move(acc);
  });
  Eigen::VectorXd out = Eigen::VectorXd::Zero(vel.ndof());
  for (const auto& p : partial) out += p;
  return out;
}

Eigen::VectorXd assemble_scalar_functional(
    const FunctionSpace& s, int quad_degree,
    const std::function<void(int, double, double, const Vec2&, double&, Vec2&)>& integrand) {
  const Mesh& mesh = s.mesh();
  const auto& rule = triangle_rule(quad_degree);
  const int nt = mesh.num_triangles();
  const int nchunks = (nt + kChunk - 1) / kChunk;
  std::vector<Eigen::VectorXd> partial(nchunks);
  for_chunks(nt, [&](int c, int begin, int end) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(s.ndof());
    ElemBasis b;
    for (int t = begin; t < end; ++t) {
      const double detj = 2.0 * mesh.tri_area(t);
      for (const auto& q : rule) {
        scalar_basis_at(s, t, q.xi, q.eta, b);
        double a = 0.0;
        Vec2 bb = Vec2::Zero();
        integrand(t, q.xi, q.eta, phys_point(mesh, t, q.xi, q.eta), a, bb);
        const double w = q.w * detj;
        for (int i = 0; i < b.nb; ++i) acc[b.nodes[i]] += w * (a * b.N[i] + bb.dot(b.g[i]));
      }
    }
    partial[c] = std::move(acc);
  });
  Eigen::VectorXd out = Eigen::VectorXd::Zero(s.ndof());
  for (const auto& p : partial) out += p;
  return out;
}

double norm_L2(const Field& f, int quad_degree) {
  const bool vec = f.space->is_vector();
  const double v = integrate(f.space->mesh(), quad_degree,
                             [&](int t, double xi, double eta, const Vec2&) {
                               if (vec) return eval_vector(f, t, xi, eta).squaredNorm();
                               const double s = eval_scalar(f, t, xi, eta);
                               return s * s;
                             });
  return std::sqrt(std::max(0.0, v));
}

double seminorm_H1(const Field& f, int quad_degree) {
  const bool vec = f.space->is_vector();
  const double v = integrate(f.space->mesh(), quad_degree,
                             [&](int t, double xi, double eta, const Vec2&) {
                               if (vec) return eval_vector_jacobian(f, t, xi, eta).squaredNorm();
                               return eval_scalar_gradient(f, t, xi, eta).squaredNorm();
                             });
  return std::sqrt(std::max(0.0, v));
}

double error_L2_vector(const Field& u, const std::function<Vec2(const Vec2&)>& exact,
                       int quad_degree) {
  const double v = integrate(u.space->mesh(), quad_degree,
                             [&](int t, double xi, double eta, const Vec2& x) {
                               return (eval_vector(u, t, xi, eta) - exact(x)).squaredNorm();
                             });
  return std::sqrt(std::max(0.0, v));
}

double error_H1semi_vector(const Field& u, const std::function<Mat2(const Vec2&)>& exact_jac,
                           int quad_degree) {
  const double v =
      integrate(u.space->mesh(), quad_degree, [&](int t, double xi, double eta, const Vec2& x) {
        return (eval_vector_jacobian(u, t, xi, eta) - exact_jac(x)).squaredNorm();
      });
  return std::sqrt(std::max(0.0, v));
}

double boundary_flux(const Mesh& mesh, const std::function<Vec2(const Vec2&)>& g) {
  const auto& rule = line_rule(6);
  double flux = 0.0;
  for (const auto& be : mesh.boundary_edges()) {
    const Vec2 a = mesh.vertex(be.v0);
    const Vec2 b = mesh.vertex(be.v1);
    for (const auto& q : rule) {
      const Vec2 x = a + q.s * (b - a);
      flux += q.w * be.length * g(x).dot(be.normal);
    }
  }
  return flux;
}

}  // namespace flowtopo
