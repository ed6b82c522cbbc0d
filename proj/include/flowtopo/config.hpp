#pragma once

#include <string>
#include <vector>

#include "flowtopo/state.hpp"

namespace flowtopo {

struct ConfigError : std::runtime_error {
  std::vector<std::string> issues;
  explicit ConfigError(std::vector<std::string> list)
      : std::runtime_error(join(list)), issues(std::move(list)) {}
  static std::string join(const std::vector<std::string>& list);
};

// Bivariate polynomial sum_{i,j} c[i][j] x^i y^j with exact derivatives; the
// escape hatch for boundary/forcing data beyond the named presets.
struct BivarPoly {
  std::vector<std::vector<double>> c;
  double eval(double x, double y) const;
  double dx(double x, double y) const;
  double dy(double x, double y) const;
  bool empty() const { return c.empty(); }
};

struct ForceSpec {
  std::string kind = "zero";  // zero | constant | poly
  Vec2 constant = Vec2::Zero();
  BivarPoly fx, fy;
};

struct BoundarySpec {
  // none | poiseuille | diffuser | pipe | pipe_bend | obstacle | poly
  std::string kind = "none";
  double peak = 1.0;
  BivarPoly gx, gy;
};

struct RunConfig {
  int nx = 32, ny = 32;
  double width = 1.0, height = 1.0;
  double mu = 1.0;
  ForceSpec force;
  BoundarySpec boundary;
  double gamma = 0.05;
  double beta = 0.0;
  double alpha_a0 = 1.0;
  double alpha_s = 0.5;
  double eps_initial = 0.2;
  int eps_levels = 1;
  int max_outer = 500;
  double opt_tol = 1e-6;
  double tau0 = 1.0;
  std::string inner_product = "h1";  // h1 | l2
  double rtol = 1e-10;
  double atol = 1e-12;
  int max_iter = 50;
  int quad_degree = 6;
  bool verify_quadrature = false;  // raises quadrature degree to 8
  double phi_init = 2.0;           // sentinel: 2.0 -> mode default
  bool write_vtk = true;
  unsigned long long seed = 0;

  std::string echo_json() const;  // canonical echo with defaults filled
};

// Strict parse: unknown keys are rejected by name, every invalid field is
// reported. The seed argument (if >= 0) overrides the config seed.
RunConfig parse_config(const std::string& path, long long seed_override = -1);
RunConfig parse_config_text(const std::string& text, long long seed_override = -1);

BodyForce make_force(const ForceSpec& spec);
BoundaryData make_boundary(const BoundarySpec& spec, double width, double height);

}  // namespace flowtopo
