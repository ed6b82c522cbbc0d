#pragma once

#include <vector>

namespace flowtopo {

struct QuadPoint {
  double xi, eta, w;  // reference-triangle coordinates; weights sum to 1/2
};

// Symmetric Dunavant-type rules on the reference triangle, exact for
// polynomials up to the requested degree. Only rules with positive weights
// are used; a request is served by the smallest available rule covering it.
const std::vector<QuadPoint>& triangle_rule(int degree);

// Gauss-Legendre on [0,1] (for boundary line integrals).
struct LinePoint {
  double s, w;
};
const std::vector<LinePoint>& line_rule(int npoints);

}  // namespace flowtopo
