#include "deconflict/kinematics.hpp"

#include <cassert>
#include <cmath>
#include <limits>

namespace deconflict {

RelativeState relative_state(const Point2& pi, const Velocity2& vi,
                             const Point2& pj, const Velocity2& vj) {
  return {{pi.x - pj.x, pi.y - pj.y}, {vi.vx - vj.vx, vi.vy - vj.vy}};
}

double g_value(const RelativeState& rs, double d) {
  const double x = rs.p.x, y = rs.p.y;
  const double vx = rs.v.vx, vy = rs.v.vy;
  return vx * vx * (y * y - d * d) + vy * vy * (x * x - d * d) -
         2.0 * vx * vy * x * y;
}

std::optional<double> t_min_sep(const RelativeState& rs) {
  const double v2 = rs.v.vx * rs.v.vx + rs.v.vy * rs.v.vy;
  if (v2 <= kSpeedFloor2) return std::nullopt;
  const double pv = rs.p.x * rs.v.vx + rs.p.y * rs.v.vy;
  return -pv / v2;
}

bool is_separated(const RelativeState& rs, double d) {
  const double v2 = rs.v.vx * rs.v.vx + rs.v.vy * rs.v.vy;
  if (v2 <= kSpeedFloor2) return std::hypot(rs.p.x, rs.p.y) >= d;
  if (g_value(rs, d) >= -kSepTolScale * v2 * d * d) return true;
  // Conflict geometry ahead only if the closest approach lies in the future.
  const double pv = rs.p.x * rs.v.vx + rs.p.y * rs.v.vy;
  return pv >= 0.0;
}

std::optional<ConflictInterval> conflict_interval(const RelativeState& rs,
                                                  double d) {
  const double v2 = rs.v.vx * rs.v.vx + rs.v.vy * rs.v.vy;
  const double c = rs.p.x * rs.p.x + rs.p.y * rs.p.y - d * d;
  if (v2 <= kSpeedFloor2) {
    if (c < 0.0) {
      const double inf = std::numeric_limits<double>::infinity();
      return ConflictInterval{-inf, inf};
    }
    return std::nullopt;
  }
  const double b = rs.p.x * rs.v.vx + rs.p.y * rs.v.vy;
  const double disc = b * b - v2 * c;
  if (disc <= 0.0) return std::nullopt;
  const double s = std::sqrt(disc);
  return ConflictInterval{(-b - s) / v2, (-b + s) / v2};
}

HalfPlaneDisjunction tangent_halfplanes(const Point2& p, double d) {
  const double x = p.x, y = p.y;
  const double r2 = x * x + y * y;
  assert(r2 > d * d);
  const double s = std::sqrt(r2 - d * d);

  // Tangent-line normals from the slope quadratic of g = 0. When x^2 = d^2
  // the quadratic degenerates and one tangent line is vertical.
  double n1x, n1y, n2x, n2y;
  const double denom = x * x - d * d;
  if (std::abs(denom) > 1e-9 * r2) {
    n1x = (x * y - d * s) / denom;
    n1y = -1.0;
    n2x = (x * y + d * s) / denom;
    n2y = -1.0;
  } else {
    n1x = 1.0;
    n1y = 0.0;
    n2x = y * y - d * d;
    n2y = -2.0 * x * y;
  }

  // Orient both normals toward the position side (n.p > 0), then assign the
  // branch by which side of p each normal falls: the branch whose normal is
  // clockwise from p keeps the >= sense.
  auto orient = [&](double& nx, double& ny) {
    const double norm = std::hypot(nx, ny);
    nx /= norm;
    ny /= norm;
    if (nx * x + ny * y < 0.0) {
      nx = -nx;
      ny = -ny;
    }
  };
  orient(n1x, n1y);
  orient(n2x, n2y);

  const bool first_is_upper = (x * n1y - y * n1x) < 0.0;
  const double ux = first_is_upper ? n1x : n2x;
  const double uy = first_is_upper ? n1y : n2y;
  const double lx = first_is_upper ? n2x : n1x;
  const double ly = first_is_upper ? n2y : n1y;

  const double r = std::sqrt(r2);
  HalfPlaneDisjunction hp;
  hp.upper = TangentBranch{ux, uy, y / r, -x / r};
  hp.lower = TangentBranch{-lx, -ly, y / r, -x / r};
  return hp;
}

}  // namespace deconflict
