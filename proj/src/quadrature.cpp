#include "flowtopo/quadrature.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace flowtopo {

namespace {

std::vector<QuadPoint> make_rule(int degree) {
  // Barycentric generators (a, b, b) with normalized weight w (summing to 1
  // over the rule); expanded to permutations. Stored as (xi, eta) = (l2, l3).
  std::vector<QuadPoint> pts;
  auto push3 = [&pts](double a, double b, double w) {
    // permutations of (a, b, b)
    pts.push_back({b, b, 0.5 * w});
    pts.push_back({a, b, 0.5 * w});
    pts.push_back({b, a, 0.5 * w});
  };
  auto push6 = [&pts](double a, double b, double c, double w) {
    pts.push_back({b, c, 0.5 * w});
    pts.push_back({c, a, 0.5 * w});
    pts.push_back({a, b, 0.5 * w});
    pts.push_back({c, b, 0.5 * w});
    pts.push_back({a, c, 0.5 * w});
    pts.push_back({b, a, 0.5 * w});
  };
  switch (degree) {
    case 1:
      pts.push_back({1.0 / 3.0, 1.0 / 3.0, 0.5});
      break;
    case 2:
      push3(2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0);
      break;
    case 4:
      push3(0.108103018168070, 0.445948490915965, 0.223381589678011);
      push3(0.816847572980459, 0.091576213509771, 0.109951743655322);
      break;
    case 5:
      pts.push_back({1.0 / 3.0, 1.0 / 3.0, 0.5 * 0.225});
      push3(0.059715871789770, 0.470142064105115, 0.132394152788506);
      push3(0.797426985353087, 0.101286507323456, 0.125939180544827);
      break;
    case 6:
      push3(0.873821971016996, 0.063089014491502, 0.050844906370207);
      push3(0.501426509658179, 0.249286745170910, 0.116786275726379);
      push6(0.636502499121399, 0.310352451033785, 0.053145049844816, 0.082851075618374);
      break;
    case 8:
      pts.push_back({1.0 / 3.0, 1.0 / 3.0, 0.5 * 0.1443156076777871});
      push3(0.0814148234145538, 0.4592925882927231, 0.0950916342672846);
      push3(0.6588613844964797, 0.1705693077517602, 0.1032173705347183);
      push3(0.8989055433659380, 0.0505472283170310, 0.0324584976231980);
      push6(0.0083947774099576, 0.2631128296346381, 0.7284923929554013, 0.0272303141744350);
      break;
    default:
      throw std::invalid_argument("triangle_rule: no table for degree");
  }
  return pts;
}

int served_degree(int degree) {
  if (degree <= 1) return 1;
  if (degree <= 2) return 2;
  if (degree <= 4) return 4;
  if (degree <= 5) return 5;
  if (degree <= 6) return 6;
  if (degree <= 8) return 8;
  throw std::invalid_argument("triangle_rule: degree > 8 unsupported");
}

}  // namespace

const std::vector<QuadPoint>& triangle_rule(int degree) {
  static std::map<int, std::vector<QuadPoint>> cache;
  const int d = served_degree(degree);
  auto it = cache.find(d);
  if (it == cache.end()) it = cache.emplace(d, make_rule(d)).first;
  return it->second;
}

const std::vector<LinePoint>& line_rule(int npoints) {
  static std::map<int, std::vector<LinePoint>> cache;
  auto it = cache.find(npoints);
  if (it != cache.end()) return it->second;
  std::vector<LinePoint> pts;
  switch (npoints) {
    case 2: {
      const double a = 0.5 - 0.5 / std::sqrt(3.0);
      pts = {{a, 0.5}, {1.0 - a, 0.5}};
      break;
    }
    case 4: {
      const double x1 = 0.3399810435848563, x2 = 0.8611363115940526;
      const double w1 = 0.6521451548625461, w2 = 0.3478548451374538;
      pts = {{0.5 * (1 - x2), 0.5 * w2},
             {0.5 * (1 - x1), 0.5 * w1},
             {0.5 * (1 + x1), 0.5 * w1},
             {0.5 * (1 + x2), 0.5 * w2}};
      break;
    }
    case 6: {
      const double x1 = 0.2386191860831969, x2 = 0.6612093864662645, x3 = 0.9324695142031521;
      const double w1 = 0.4679139345726910, w2 = 0.3607615730481386, w3 = 0.1713244923791704;
      pts = {{0.5 * (1 - x3), 0.5 * w3}, {0.5 * (1 - x2), 0.5 * w2}, {0.5 * (1 - x1), 0.5 * w1},
             {0.5 * (1 + x1), 0.5 * w1}, {0.5 * (1 + x2), 0.5 * w2}, {0.5 * (1 + x3), 0.5 * w3}};
      break;
    }
    default:
      throw std::invalid_argument("line_rule: unsupported point count");
  }
  return cache.emplace(npoints, std::move(pts)).first->second;
}

}  // namespace flowtopo
