#include "deconflict/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "deconflict/tolerances.hpp"

namespace deconflict {

namespace {

double dist(const Point2& a, const Point2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Squared pair distance is a quadratic in t on a segment-pair overlap; its
// minimizer clamped to the overlap gives the exact closest approach.
struct ClosestApproach {
  double t = 0.0;
  double separation = 0.0;
};

ClosestApproach segment_pair_min(const Segment& a, const Segment& b, double lo,
                                 double hi) {
  const Point2 pa = a.at(lo), pb = b.at(lo);
  const double px = pa.x - pb.x, py = pa.y - pb.y;
  const double vx = a.velocity.vx - b.velocity.vx;
  const double vy = a.velocity.vy - b.velocity.vy;
  const double v2 = vx * vx + vy * vy;
  double t = lo;
  if (v2 > 0.0) t = std::clamp(lo - (px * vx + py * vy) / v2, lo, hi);
  const double dt = t - lo;
  return {t, std::hypot(px + vx * dt, py + vy * dt)};
}

}  // namespace

Point2 Trajectory::position(double t) const {
  const Segment* seg = &segments.front();
  for (const Segment& s : segments)
    if (t >= s.t_start) seg = &s;
  const double tc = std::clamp(t, seg->t_start, seg->t_end);
  return seg->at(tc);
}

std::vector<Trajectory> assemble(const Instance& inst,
                                 const AvoidanceSolution& avoid,
                                 const RecoverySolution& recovery) {
  const RecoveryGrid grid{inst.config.n_periods, inst.config.period_len};
  const int n = static_cast<int>(inst.aircraft.size());
  std::vector<Trajectory> out(n);
  for (int i = 0; i < n; ++i) {
    const Aircraft& a = inst.aircraft[i];
    const Maneuver& mv = avoid.maneuvers[i];
    const double t_r = grid.time(recovery.period[i]);
    Trajectory& tr = out[i];
    tr.aircraft_id = a.id;

    const Velocity2 va = maneuver_velocity(a, mv.q, mv.theta);
    const double va2 = va.vx * va.vx + va.vy * va.vy;
    const double dxt = a.target.x - a.origin.x, dyt = a.target.y - a.origin.y;
    const double t_hit = (dxt * va.vx + dyt * va.vy) / va2;
    const Point2 p_hit{a.origin.x + va.vx * t_hit, a.origin.y + va.vy * t_hit};
    if (t_hit >= 0.0 && t_hit <= t_r + 1e-12 &&
        dist(p_hit, a.target) <= 1e-9) {
      tr.segments.push_back({0.0, a.origin, va, t_hit});
      tr.arrival_time = t_hit;
      tr.clamped = true;
      continue;
    }

    double rec_from = t_r;
    Point2 s = a.origin;
    if (t_r > 0.0) {
      tr.segments.push_back({0.0, a.origin, va, t_r});
      s = avoidance_position(a, mv, t_r);
    } else {
      rec_from = 0.0;
    }
    const auto rv = recovery_velocity(a, mv, rec_from);
    if (!rv) {  // on top of the target at the recovery time
      if (tr.segments.empty()) tr.segments.push_back({0.0, a.origin, va, 0.0});
      tr.arrival_time = rec_from;
      tr.clamped = true;
      continue;
    }
    const double arrive = rec_from + dist(s, a.target) / a.speed;
    tr.segments.push_back({rec_from, s, *rv, arrive});
    tr.arrival_time = arrive;
  }
  return out;
}

VerificationReport verify(const std::vector<Trajectory>& trajectories, double d,
                          double step_seconds) {
  const double step = step_seconds / 3600.0;
  const double threshold = d - kVerifyMargin;
  const int n = static_cast<int>(trajectories.size());
  VerificationReport rep;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Trajectory& ti = trajectories[i];
      const Trajectory& tj = trajectories[j];
      const double end = std::min(ti.arrival_time, tj.arrival_time);

      for (double t = 0.0; t <= end; t += step) {
        const Point2 pi = ti.position(t), pj = tj.position(t);
        rep.min_separation = std::min(rep.min_separation, dist(pi, pj));
        ++rep.samples;
      }

      for (const Segment& sa : ti.segments)
        for (const Segment& sb : tj.segments) {
          const double lo = std::max(sa.t_start, sb.t_start);
          const double hi = std::min({sa.t_end, sb.t_end, end});
          if (lo > hi) continue;
          const ClosestApproach ca = segment_pair_min(sa, sb, lo, hi);
          rep.min_separation = std::min(rep.min_separation, ca.separation);
          if (ca.separation < threshold &&
              (!rep.violating_pair || ca.t < rep.violating_pair->t))
            rep.violating_pair = ViolatingPair{ti.aircraft_id, tj.aircraft_id,
                                               ca.t};
        }
    }
  return rep;
}

TrajectoryMetrics metrics(const Instance& inst,
                          const std::vector<Trajectory>& trajectories,
                          const AvoidanceSolution& avoid,
                          const RecoverySolution& recovery) {
  TrajectoryMetrics out;
  const int n = static_cast<int>(trajectories.size());
  if (n == 0) return out;
  double sum = 0.0;
  out.min_period = out.max_period = recovery.period[0];
  for (int i = 0; i < n; ++i) {
    const double m = recovery.period[i];
    out.min_period = std::min(out.min_period, m);
    out.max_period = std::max(out.max_period, m);
    sum += m;
    out.total_cost += avoid.deviation_costs[i];
    const Aircraft& a = inst.aircraft[i];
    const double nominal = dist(a.origin, a.target) / a.speed;
    out.arrival_delay.push_back(trajectories[i].arrival_time - nominal);
  }
  out.mean_period = sum / n;
  return out;
}

bool write_svg(const std::string& path, const Instance& inst,
               const std::vector<Trajectory>& trajectories) {
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  auto grow = [&](const Point2& p) {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  };
  for (const Aircraft& a : inst.aircraft) {
    grow(a.origin);
    grow(a.target);
  }
  for (const Trajectory& tr : trajectories)
    for (const Segment& s : tr.segments) {
      grow(s.start);
      grow(s.at(s.t_end));
    }
  const double span = std::max({x1 - x0, y1 - y0, 1.0});
  const double pad = 0.05 * span;
  x0 -= pad;
  y0 -= pad;
  x1 += pad;
  y1 += pad;
  const double view = 900.0;
  const double scale = view / std::max(x1 - x0, y1 - y0);
  auto X = [&](double x) { return (x - x0) * scale; };
  auto Y = [&](double y) { return (y1 - y) * scale; };

  std::ofstream f(path);
  if (!f) return false;
  char buf[256];
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"900\""
       " viewBox=\"0 0 900 900\">\n"
       "<rect width=\"900\" height=\"900\" fill=\"white\"/>\n";
  for (const Aircraft& a : inst.aircraft) {
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\""
                  " stroke=\"#999\" stroke-width=\"1\""
                  " stroke-dasharray=\"6 4\"/>\n",
                  X(a.origin.x), Y(a.origin.y), X(a.target.x), Y(a.target.y));
    f << buf;
  }
  for (const Trajectory& tr : trajectories) {
    const bool two = tr.segments.size() > 1;
    for (size_t k = 0; k < tr.segments.size(); ++k) {
      const Segment& s = tr.segments[k];
      const Point2 e = s.at(s.t_end);
      const char* color =
          (two ? k == 0 : tr.clamped) ? "#d32f2f" : "#1976d2";
      std::snprintf(buf, sizeof buf,
                    "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\""
                    " stroke=\"%s\" stroke-width=\"1.5\"/>\n",
                    X(s.start.x), Y(s.start.y), X(e.x), Y(e.y), color);
      f << buf;
    }
    const Point2 o = tr.segments.front().start;
    std::snprintf(buf, sizeof buf,
                  "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"#333\"/>\n",
                  X(o.x), Y(o.y));
    f << buf;
  }
  f << "</svg>\n";
  return f.good();
}

}  // namespace deconflict
