#pragma once

#include <array>
#include <vector>

namespace mmoc::fem {

/// Symmetric quadrature rule on the reference simplex, points in barycentric
/// coordinates, weights normalized to sum to one (scale by element measure).
struct QuadRule {
  struct Point {
    std::array<double, 4> lambda;
    double weight;
  };
  std::vector<Point> points;
};

/// Rules exact for polynomials of the requested degree (2 or 4/5).
inline const QuadRule& simplex_rule(int dim, int degree) {
  static const QuadRule tri2 = {{
      {{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 0.0}, 1.0 / 3.0},
      {{1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0, 0.0}, 1.0 / 3.0},
      {{1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0, 0.0}, 1.0 / 3.0},
  }};
  static const QuadRule tri4 = [] {
    QuadRule r;
    const double a1 = 0.445948490915965, w1 = 0.223381589678011;
    const double a2 = 0.091576213509771, w2 = 0.109951743655322;
    for (int i = 0; i < 3; ++i) {
      std::array<double, 4> l1{a1, a1, a1, 0.0}, l2{a2, a2, a2, 0.0};
      l1[i] = 1.0 - 2.0 * a1;
      l2[i] = 1.0 - 2.0 * a2;
      r.points.push_back({l1, w1});
      r.points.push_back({l2, w2});
    }
    return r;
  }();
  static const QuadRule tet2 = [] {
    QuadRule r;
    const double a = 0.585410196624969, b = 0.138196601125011;
    for (int i = 0; i < 4; ++i) {
      std::array<double, 4> l{b, b, b, b};
      l[i] = a;
      r.points.push_back({l, 0.25});
    }
    return r;
  }();
  // 14-point, degree-5 rule (two vertex-symmetric 4-point orbits and one
  // edge-symmetric 6-point orbit), all weights positive.
  static const QuadRule tet5 = [] {
    QuadRule r;
    const double a1 = 0.3108859192633005, w1 = 0.1126879257180162;
    const double a2 = 0.0927352503108912, w2 = 0.0734930431163619;
    const double c = 0.0455037041256494, w3 = 0.0425460207770812;
    for (int i = 0; i < 4; ++i) {
      std::array<double, 4> l1{a1, a1, a1, a1}, l2{a2, a2, a2, a2};
      l1[i] = 1.0 - 3.0 * a1;
      l2[i] = 1.0 - 3.0 * a2;
      r.points.push_back({l1, w1});
      r.points.push_back({l2, w2});
    }
    static const int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    for (const auto& p : pairs) {
      std::array<double, 4> l{c, c, c, c};
      l[p[0]] = 0.5 - c;
      l[p[1]] = 0.5 - c;
      r.points.push_back({l, w3});
    }
    return r;
  }();
  // 12-point degree-6 rule, used for error norms.
  static const QuadRule tri6 = [] {
    QuadRule r;
    const double a1 = 0.063089014491502, w1 = 0.050844906370207;
    const double a2 = 0.249286745170910, w2 = 0.116786275726379;
    const double b1 = 0.310352451033785, b2 = 0.053145049844816, w3 = 0.082851075618374;
    for (int i = 0; i < 3; ++i) {
      std::array<double, 4> l1{a1, a1, a1, 0.0}, l2{a2, a2, a2, 0.0};
      l1[i] = 1.0 - 2.0 * a1;
      l2[i] = 1.0 - 2.0 * a2;
      r.points.push_back({l1, w1});
      r.points.push_back({l2, w2});
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        if (i == j) continue;
        std::array<double, 4> l{0.0, 0.0, 0.0, 0.0};
        l[i] = b1;
        l[j] = b2;
        l[3 - i - j] = 1.0 - b1 - b2;
        r.points.push_back({l, w3});
      }
    return r;
  }();
  if (dim == 2) return degree <= 2 ? tri2 : (degree <= 4 ? tri4 : tri6);
  return degree <= 2 ? tet2 : tet5;
}

}  // namespace mmoc::fem
