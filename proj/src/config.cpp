#include "flowtopo/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace flowtopo {

using json = nlohmann::ordered_json;

std::string ConfigError::join(const std::vector<std::string>& list) {
  std::string out = "config invalid:";
  for (const auto& s : list) out += "\n  - " + s;
  return out;
}

double BivarPoly::eval(double x, double y) const {
  double v = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    double xi = std::pow(x, static_cast<double>(i));
    for (std::size_t j = 0; j < c[i].size(); ++j)
      v += c[i][j] * xi * std::pow(y, static_cast<double>(j));
  }
  return v;
}

double BivarPoly::dx(double x, double y) const {
  double v = 0.0;
  for (std::size_t i = 1; i < c.size(); ++i)
    for (std::size_t j = 0; j < c[i].size(); ++j)
      v += c[i][j] * i * std::pow(x, static_cast<double>(i - 1)) *
           std::pow(y, static_cast<double>(j));
  return v;
}

double BivarPoly::dy(double x, double y) const {
  double v = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = 1; j < c[i].size(); ++j)
      v += c[i][j] * j * std::pow(x, static_cast<double>(i)) *
           std::pow(y, static_cast<double>(j - 1));
  return v;
}

namespace {

void check_keys(const json& obj, const std::string& where,
                const std::vector<std::string>& allowed, std::vector<std::string>& issues) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) issues.push_back("unknown key '" + where + it.key() + "'");
  }
}

BivarPoly parse_poly(const json& arr, const std::string& where,
                     std::vector<std::string>& issues) {
  BivarPoly p;
  if (!arr.is_array()) {
    issues.push_back(where + ": expected array of arrays of coefficients");
    return p;
  }
  for (const auto& row : arr) {
    std::vector<double> r;
    for (const auto& v : row) r.push_back(v.get<double>());
    p.c.push_back(std::move(r));
  }
  return p;
}

template <typename T>
void read(const json& obj, const char* key, T& target) {
  if (obj.contains(key)) target = obj.at(key).get<T>();
}

RunConfig parse_json(const json& j, long long seed_override) {
  std::vector<std::string> issues;
  RunConfig c;

  check_keys(j, "",
             {"mesh", "physics", "objective", "alpha", "epsilon", "optimizer", "solver",
              "phi_init", "output", "seed"},
             issues);

  if (j.contains("mesh")) {
    const auto& m = j.at("mesh");
    check_keys(m, "mesh.", {"nx", "ny", "width", "height"}, issues);
    read(m, "nx", c.nx);
    read(m, "ny", c.ny);
    read(m, "width", c.width);
    read(m, "height", c.height);
  }
  if (j.contains("physics")) {
    const auto& p = j.at("physics");
    check_keys(p, "physics.", {"mu", "force", "boundary"}, issues);
    read(p, "mu", c.mu);
    if (p.contains("force")) {
      const auto& f = p.at("force");
      check_keys(f, "physics.force.", {"kind", "value", "fx", "fy"}, issues);
      read(f, "kind", c.force.kind);
      if (f.contains("value")) {
        const auto v = f.at("value").get<std::vector<double>>();
        if (v.size() != 2)
          issues.push_back("physics.force.value: expected [fx, fy]");
        else
          c.force.constant = Vec2(v[0], v[1]);
      }
      if (f.contains("fx")) c.force.fx = parse_poly(f.at("fx"), "physics.force.fx", issues);
      if (f.contains("fy")) c.force.fy = parse_poly(f.at("fy"), "physics.force.fy", issues);
    }
    if (p.contains("boundary")) {
      const auto& b = p.at("boundary");
      check_keys(b, "physics.boundary.", {"kind", "peak", "gx", "gy"}, issues);
      read(b, "kind", c.boundary.kind);
      read(b, "peak", c.boundary.peak);
      if (b.contains("gx")) c.boundary.gx = parse_poly(b.at("gx"), "physics.boundary.gx", issues);
      if (b.contains("gy")) c.boundary.gy = parse_poly(b.at("gy"), "physics.boundary.gy", issues);
    }
  }
  if (j.contains("objective")) {
    const auto& o = j.at("objective");
    check_keys(o, "objective.", {"gamma", "beta"}, issues);
    read(o, "gamma", c.gamma);
    read(o, "beta", c.beta);
  }
  if (j.contains("alpha")) {
    const auto& a = j.at("alpha");
    check_keys(a, "alpha.", {"a0", "s"}, issues);
    read(a, "a0", c.alpha_a0);
    read(a, "s", c.alpha_s);
  }
  if (j.contains("epsilon")) {
    const auto& e = j.at("epsilon");
    check_keys(e, "epsilon.", {"initial", "levels"}, issues);
    read(e, "initial", c.eps_initial);
    read(e, "levels", c.eps_levels);
  }
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    check_keys(o, "optimizer.", {"max_outer", "tol", "tau0", "inner_product"}, issues);
    read(o, "max_outer", c.max_outer);
    read(o, "tol", c.opt_tol);
    read(o, "tau0", c.tau0);
    read(o, "inner_product", c.inner_product);
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    check_keys(s, "solver.", {"rtol", "atol", "max_iter", "quad_degree", "verify_quadrature"},
               issues);
    read(s, "rtol", c.rtol);
    read(s, "atol", c.atol);
    read(s, "max_iter", c.max_iter);
    read(s, "quad_degree", c.quad_degree);
    read(s, "verify_quadrature", c.verify_quadrature);
  }
  read(j, "phi_init", c.phi_init);
  if (j.contains("output")) {
    const auto& o = j.at("output");
    check_keys(o, "output.", {"vtk"}, issues);
    read(o, "vtk", c.write_vtk);
  }
  read(j, "seed", c.seed);
  if (seed_override >= 0) c.seed = static_cast<unsigned long long>(seed_override);

  // validation (collect everything)
  if (c.nx < 1 || c.ny < 1) issues.push_back("mesh.nx/ny: must be >= 1");
  if (!(c.width > 0) || !(c.height > 0)) issues.push_back("mesh.width/height: must be positive");
  if (!(c.mu > 0)) issues.push_back("physics.mu: must be positive");
  if (!(c.gamma > 0)) issues.push_back("objective.gamma: must be positive");
  if (!(c.beta > -1.0 && c.beta < 1.0)) issues.push_back("objective.beta: must lie in (-1, 1)");
  if (c.alpha_a0 < 0) issues.push_back("alpha.a0: must be >= 0");
  if (c.alpha_a0 > 0 && !(c.alpha_s > 0.0 && c.alpha_s < 2.0 / 3.0))
    issues.push_back("alpha.s: exponent violates growth condition o(eps^{-2/3})");
  if (!(c.eps_initial > 0)) issues.push_back("epsilon.initial: must be positive");
  if (c.eps_levels < 1) issues.push_back("epsilon.levels: must be >= 1");
  if (!(c.opt_tol > 0)) issues.push_back("optimizer.tol: must be positive");
  if (!(c.tau0 > 0)) issues.push_back("optimizer.tau0: must be positive");
  if (c.inner_product != "h1" && c.inner_product != "l2")
    issues.push_back("optimizer.inner_product: must be 'h1' or 'l2'");
  if (!(c.rtol > 0) || !(c.atol > 0)) issues.push_back("solver.rtol/atol: must be positive");
  if (c.max_iter < 1) issues.push_back("solver.max_iter: must be >= 1");
  if (c.quad_degree < 2 || c.quad_degree > 8)
    issues.push_back("solver.quad_degree: supported range is 2..8");
  if (c.phi_init != 2.0 && !(c.phi_init >= -1.0 && c.phi_init <= 1.0))
    issues.push_back("phi_init: must lie in [-1, 1]");
  static const std::vector<std::string> kinds{"zero", "constant", "poly"};
  if (std::find(kinds.begin(), kinds.end(), c.force.kind) == kinds.end())
    issues.push_back("physics.force.kind: unknown kind '" + c.force.kind + "'");
  static const std::vector<std::string> bkinds{"none",      "poiseuille", "diffuser", "pipe",
                                               "pipe_bend", "obstacle",   "poly"};
  if (std::find(bkinds.begin(), bkinds.end(), c.boundary.kind) == bkinds.end())
    issues.push_back("physics.boundary.kind: unknown kind '" + c.boundary.kind + "'");

  if (!issues.empty()) throw ConfigError(std::move(issues));
  return c;
}

json poly_json(const BivarPoly& p) {
  json rows = json::array();
  for (const auto& r : p.c) rows.push_back(r);
  return rows;
}

}  // namespace

std::string RunConfig::echo_json() const {
  json j;
  j["mesh"] = {{"nx", nx}, {"ny", ny}, {"width", width}, {"height", height}};
  json force{{"kind", this->force.kind}};
  if (this->force.kind == "constant")
    force["value"] = {this->force.constant.x(), this->force.constant.y()};
  if (this->force.kind == "poly") {
    force["fx"] = poly_json(this->force.fx);
    force["fy"] = poly_json(this->force.fy);
  }
  json boundary{{"kind", this->boundary.kind}, {"peak", this->boundary.peak}};
  if (this->boundary.kind == "poly") {
    boundary["gx"] = poly_json(this->boundary.gx);
    boundary["gy"] = poly_json(this->boundary.gy);
  }
  j["physics"] = {{"mu", mu}, {"force", force}, {"boundary", boundary}};
  j["objective"] = {{"gamma", gamma}, {"beta", beta}};
  j["alpha"] = {{"a0", alpha_a0}, {"s", alpha_s}};
  j["epsilon"] = {{"initial", eps_initial}, {"levels", eps_levels}};
  j["optimizer"] = {{"max_outer", max_outer},
                    {"tol", opt_tol},
                    {"tau0", tau0},
                    {"inner_product", inner_product}};
  j["solver"] = {{"rtol", rtol},
                 {"atol", atol},
                 {"max_iter", max_iter},
                 {"quad_degree", quad_degree},
                 {"verify_quadrature", verify_quadrature}};
  if (phi_init != 2.0) j["phi_init"] = phi_init;
  j["output"] = {{"vtk", write_vtk}};
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

RunConfig parse_config_text(const std::string& text, long long seed_override) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("JSON syntax: ") + e.what()});
  }
  return parse_json(j, seed_override);
}

RunConfig parse_config(const std::string& path, long long seed_override) {
  std::ifstream f(path);
  if (!f) throw ConfigError({"cannot open config file '" + path + "'"});
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), seed_override);
}

namespace {

// parabola with unit peak on [a,b], zero outside
inline double bump(double t, double a, double b) {
  if (t <= a || t >= b) return 0.0;
  const double m = (b - a);
  return 4.0 * (t - a) * (b - t) / (m * m);
}

}  // namespace

BodyForce make_force(const ForceSpec& spec) {
  if (spec.kind == "zero") return BodyForce::zero();
  BodyForce f;
  f.is_zero = false;
  if (spec.kind == "constant") {
    const Vec2 v = spec.constant;
    f.value = [v](const Vec2&) { return v; };
    f.jacobian = [](const Vec2&) { return Mat2::Zero(); };
    return f;
  }
  const BivarPoly fx = spec.fx, fy = spec.fy;
  f.value = [fx, fy](const Vec2& x) {
    return Vec2(fx.empty() ? 0.0 : fx.eval(x.x(), x.y()), fy.empty() ? 0.0 : fy.eval(x.x(), x.y()));
  };
  f.jacobian = [fx, fy](const Vec2& x) {
    Mat2 J = Mat2::Zero();
    if (!fx.empty()) {
      J(0, 0) = fx.dx(x.x(), x.y());
      J(0, 1) = fx.dy(x.x(), x.y());
    }
    if (!fy.empty()) {
      J(1, 0) = fy.dx(x.x(), x.y());
      J(1, 1) = fy.dy(x.x(), x.y());
    }
    return J;
  };
  return f;
}

BoundaryData make_boundary(const BoundarySpec& spec, double W, double H) {
  if (spec.kind == "none") return BoundaryData::zero();
  BoundaryData g;
  g.is_zero = false;
  const double peak = spec.peak;
  const double tol = 1e-12;

  // span breakpoints sit on grid-aligned fractions (quarters/eighths) so the
  // profile kinks land on mesh vertices and the flux quadrature is exact
  if (spec.kind == "poiseuille" || spec.kind == "obstacle") {
    g.value = [=](const Vec2& x) {
      if (x.x() < tol || x.x() > W - tol) return Vec2(peak * bump(x.y(), 0.0, H), 0.0);
      return Vec2(0.0, 0.0);
    };
  } else if (spec.kind == "diffuser") {
    // full-height inflow, center-half outflow with matched flux
    g.value = [=](const Vec2& x) {
      if (x.x() < tol) return Vec2(peak * bump(x.y(), 0.0, H), 0.0);
      if (x.x() > W - tol) return Vec2(2.0 * peak * bump(x.y(), 0.25 * H, 0.75 * H), 0.0);
      return Vec2(0.0, 0.0);
    };
  } else if (spec.kind == "pipe") {
    // center-half inflow and outflow
    g.value = [=](const Vec2& x) {
      if (x.x() < tol || x.x() > W - tol)
        return Vec2(peak * bump(x.y(), 0.25 * H, 0.75 * H), 0.0);
      return Vec2(0.0, 0.0);
    };
  } else if (spec.kind == "pipe_bend") {
    g.value = [=](const Vec2& x) {
      if (x.x() < tol) return Vec2(peak * bump(x.y(), 0.625 * H, 0.875 * H), 0.0);
      if (x.y() < tol) return Vec2(0.0, -peak * bump(x.x(), 0.625 * W, 0.875 * W));
      return Vec2(0.0, 0.0);
    };
  } else {  // poly
    const BivarPoly gx = spec.gx, gy = spec.gy;
    g.value = [gx, gy](const Vec2& x) {
      return Vec2(gx.empty() ? 0.0 : gx.eval(x.x(), x.y()),
                  gy.empty() ? 0.0 : gy.eval(x.x(), x.y()));
    };
  }
  return g;
}

}  // namespace flowtopo
