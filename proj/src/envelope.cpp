#include "fracprec/envelope.hpp"

#include "fracprec/fem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fracprec {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kGeomTol = 1e-12;

double norm2(Point2 p) { return std::hypot(p[0], p[1]); }
Point2 sub(Point2 a, Point2 b) { return {a[0] - b[0], a[1] - b[1]}; }
double dot(Point2 a, Point2 b) { return a[0] * b[0] + a[1] * b[1]; }

/// Wrap an angle into [base, base + 2*pi).
double wrap_from(double ang, double base) {
  double t = std::fmod(ang - base, 2 * kPi);
  if (t < 0) t += 2 * kPi;
  return base + t;
}

struct FootResult {
  bool valid = false;
  double t = 0;  // arc length along the segment
  double s = 0;  // distance from the segment along the envelope direction
};

/// Foot of y in the one-sided normal envelope of a segment (s in [0, eps)).
FootResult envelope_foot(const CurveSegment& seg, Point2 y, double eps) {
  FootResult r;
  if (seg.kind == CurveSegment::Kind::Line) {
    Point2 d = sub(seg.b, seg.a);
    double len = norm2(d);
    Point2 tang{d[0] / len, d[1] / len};
    Point2 rel = sub(y, seg.a);
    double t = dot(rel, tang);
    double s = -dot(rel, seg.normal);  // along envelope_dir = -normal
    if (t < -kGeomTol || t > len + kGeomTol) return r;
    if (s < -kGeomTol || s >= eps) return r;
    r.valid = true;
    r.t = std::clamp(t, 0.0, len);
    r.s = std::max(s, 0.0);
    return r;
  }
  Point2 rel = sub(y, seg.center);
  double rho = norm2(rel);
  if (rho < kGeomTol) return r;
  double ang = wrap_from(std::atan2(rel[1], rel[0]), seg.ang0 - kGeomTol);
  if (ang > seg.ang1 + kGeomTol) return r;
  // envelope grows toward the center when the normal points outward
  double s = seg.normal_outward ? seg.radius - rho : rho - seg.radius;
  if (s < -kGeomTol || s >= eps) return r;
  r.valid = true;
  r.t = std::clamp(seg.radius * (ang - seg.ang0), 0.0, seg.length());
  r.s = std::max(s, 0.0);
  return r;
}

/// Gauss-Legendre nodes/weights on [0,1].
std::vector<std::pair<double, double>> gauss01(int n) {
  // Newton iteration on Legendre polynomials, mapped from [-1,1] to [0,1].
  std::vector<std::pair<double, double>> out(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    out[i] = {0.5 * (1 - x), 1.0 / ((1 - x * x) * pp * pp)};
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Angular interval of the uncovered gap at a corner, if any.
struct SectorSpan {
  bool present = false;
  double ang_start = 0, ang_sweep = 0;  // counterclockwise from ang_start
};

SectorSpan sector_span(const EnvelopeDecomposition& d, const Corner& c) {
  SectorSpan span;
  const auto& segs = d.curve.segments;
  Point2 e1 = segs[c.seg_before].envelope_dir_at(segs[c.seg_before].length());
  Point2 e2 = segs[c.seg_after].envelope_dir_at(0.0);
  double a1 = std::atan2(e1[1], e1[0]);
  double a2 = std::atan2(e2[1], e2[0]);
  // try both arcs between the envelope edge directions; the gap is the one
  // whose midpoint direction is not covered by any normal envelope
  for (int pick = 0; pick < 2; ++pick) {
    double start = pick == 0 ? a1 : a2;
    double end = pick == 0 ? a2 : a1;
    double sweep = wrap_from(end, start) - start;
    if (sweep < kGeomTol || sweep > kPi + kGeomTol) continue;
    double mid = start + 0.5 * sweep;
    Point2 probe{c.p[0] + 0.5 * d.eps * std::cos(mid), c.p[1] + 0.5 * d.eps * std::sin(mid)};
    bool covered = false;
    for (const auto& seg : segs)
      if (envelope_foot(seg, probe, d.eps).valid) covered = true;
    if (!covered) {
      span.present = true;
      span.ang_start = start;
      span.ang_sweep = sweep;
      return span;
    }
  }
  return span;
}

double segment_min_distance(const CurveSegment& s1, const CurveSegment& s2) {
  // sampled lower bound; only used for the conservative eps threshold
  const int n = 64;
  double best = std::numeric_limits<double>::max();
  for (int i = 0; i <= n; ++i) {
    Point2 p = s1.point_at(s1.length() * i / n);
    for (int j = 0; j <= n; ++j)
      best = std::min(best, norm2(sub(p, s2.point_at(s2.length() * j / n))));
  }
  return best;
}

}  // namespace

CurveSegment CurveSegment::line(Point2 a, Point2 b, Point2 normal) {
  CurveSegment s;
  s.kind = Kind::Line;
  s.a = a;
  s.b = b;
  double len = norm2(sub(b, a));
  if (len < kGeomTol) throw std::invalid_argument("CurveSegment::line: degenerate segment");
  double nn = norm2(normal);
  if (std::abs(nn - 1.0) > 1e-9)
    throw std::invalid_argument("CurveSegment::line: normal must be a unit vector");
  Point2 tang{(b[0] - a[0]) / len, (b[1] - a[1]) / len};
  if (std::abs(dot(tang, normal)) > 1e-9)
    throw std::invalid_argument("CurveSegment::line: normal not perpendicular to segment");
  s.normal = normal;
  return s;
}

CurveSegment CurveSegment::arc(Point2 center, double radius, double ang0, double ang1,
                               bool normal_outward) {
  if (radius <= 0) throw std::invalid_argument("CurveSegment::arc: radius must be positive");
  if (ang1 <= ang0 + kGeomTol || ang1 > ang0 + 2 * kPi + kGeomTol)
    throw std::invalid_argument("CurveSegment::arc: need ang0 < ang1 <= ang0 + 2*pi");
  CurveSegment s;
  s.kind = Kind::Arc;
  s.center = center;
  s.radius = radius;
  s.ang0 = ang0;
  s.ang1 = ang1;
  s.normal_outward = normal_outward;
  return s;
}

double CurveSegment::length() const {
  if (kind == Kind::Line) return norm2(sub(b, a));
  return radius * (ang1 - ang0);
}

Point2 CurveSegment::point_at(double t) const {
  if (kind == Kind::Line) {
    double len = length();
    double u = t / len;
    return {a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])};
  }
  double ang = ang0 + t / radius;
  return {center[0] + radius * std::cos(ang), center[1] + radius * std::sin(ang)};
}

Point2 CurveSegment::normal_at(double t) const {
  if (kind == Kind::Line) return normal;
  double ang = ang0 + t / radius;
  double sgn = normal_outward ? 1.0 : -1.0;
  return {sgn * std::cos(ang), sgn * std::sin(ang)};
}

PiecewiseCurve PiecewiseCurve::from_segments(std::vector<CurveSegment> segs) {
  if (segs.empty()) throw std::invalid_argument("PiecewiseCurve: no segments");
  PiecewiseCurve c;
  c.segments = std::move(segs);
  int n = static_cast<int>(c.segments.size());
  bool closed = norm2(sub(c.segments.back().end(), c.segments.front().start())) < 1e-9;
  int n_joints = closed ? n : n - 1;
  for (int j = 0; j < n_joints; ++j) {
    const auto& s1 = c.segments[j];
    const auto& s2 = c.segments[(j + 1) % n];
    if (norm2(sub(s1.end(), s2.start())) > 1e-9)
      throw std::invalid_argument("PiecewiseCurve: segments are not joined end to start");
    // rays from the joint along each segment
    Point2 t1 = sub(s1.point_at(s1.length() * (1 - 1e-8)), s1.end());
    Point2 t2 = sub(s2.point_at(s2.length() * 1e-8), s2.start());
    double ang = std::acos(std::clamp(dot(t1, t2) / (norm2(t1) * norm2(t2)), -1.0, 1.0));
    if (std::abs(ang - kPi) < 1e-9) continue;  // tangential joint, no corner
    Corner corner;
    corner.p = s1.end();
    corner.theta = ang;
    corner.seg_before = j;
    corner.seg_after = (j + 1) % n;
    c.corners.push_back(corner);
  }
  return c;
}

double PiecewiseCurve::total_length() const {
  double len = 0;
  for (const auto& s : segments) len += s.length();
  return len;
}

EnvelopeDecomposition::EnvelopeDecomposition(PiecewiseCurve c, double eps_in)
    : curve(std::move(c)), eps(eps_in) {
  if (eps <= 0) throw std::invalid_argument("EnvelopeDecomposition: eps must be positive");
  double cap = max_eps();
  if (eps > cap + kGeomTol)
    throw std::invalid_argument("EnvelopeDecomposition: eps exceeds validity threshold " +
                                std::to_string(cap));
}

double EnvelopeDecomposition::max_eps() const {
  double cap = std::numeric_limits<double>::max();
  for (const auto& s : curve.segments)
    if (s.kind == CurveSegment::Kind::Arc) cap = std::min(cap, 0.5 * s.radius);
  int n = static_cast<int>(curve.segments.size());
  for (int i = 0; i + 2 < n; ++i)
    for (int j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1 &&
          norm2(sub(curve.segments[j].end(), curve.segments[i].start())) < 1e-9)
        continue;  // adjacent through the closing joint
      cap = std::min(cap, 0.5 * segment_min_distance(curve.segments[i], curve.segments[j]));
    }
  return cap;
}

Classification classify(Point2 y, const EnvelopeDecomposition& d) {
  const auto& segs = d.curve.segments;
  int n = static_cast<int>(segs.size());
  std::vector<std::pair<int, FootResult>> hits;
  for (int i = 0; i < n; ++i) {
    FootResult f = envelope_foot(segs[i], y, d.eps);
    if (f.valid) hits.emplace_back(i, f);
  }
  Classification c;
  if (hits.size() == 1) {
    c.kind = RegionKind::NormalEnvelope;
    c.segment = hits[0].first;
    c.t = hits[0].second.t;
    c.s = hits[0].second.s;
    return c;
  }
  if (hits.size() >= 2) {
    // overlap wedge: the bisector rule assigns the half nearer to each
    // segment; ties go to the lower-indexed one
    std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
      if (a.second.s != b.second.s) return a.second.s < b.second.s;
      return a.first < b.first;
    });
    c.kind = RegionKind::OverlapWedge;
    c.segment = hits[0].first;
    c.t = hits[0].second.t;
    c.s = hits[0].second.s;
    return c;
  }
  // no envelope: corner sector of the nearest corner
  int best = -1;
  double best_dist = d.eps;
  for (int k = 0; k < static_cast<int>(d.curve.corners.size()); ++k) {
    double dist = norm2(sub(y, d.curve.corners[k].p));
    if (dist < best_dist) {
      best_dist = dist;
      best = k;
    }
  }
  if (best < 0) throw std::invalid_argument("classify: point is outside the eps-envelope");
  c.kind = RegionKind::CornerSector;
  c.corner = best;
  c.s = best_dist;
  return c;
}

Point2 normal_field(Point2 y, const EnvelopeDecomposition& d) {
  Classification c = classify(y, d);
  if (c.kind != RegionKind::CornerSector) return d.curve.segments[c.segment].normal_at(c.t);
  Point2 rel = sub(y, d.curve.corners[c.corner].p);
  double r = norm2(rel);
  if (r < kGeomTol) throw std::invalid_argument("normal_field: corner point itself");
  return {-rel[0] / r, -rel[1] / r};
}

double extend(const InterfaceFn& w, Point2 y, const EnvelopeDecomposition& d) {
  Classification c = classify(y, d);
  if (c.kind != RegionKind::CornerSector) return w(c.segment, c.t);
  const Corner& corner = d.curve.corners[c.corner];
  return w(corner.seg_before, d.curve.segments[corner.seg_before].length());
}

namespace {

/// Composite quadrature over Gamma_eps: calls f(point, region, weight) for
/// each node, where region is the classification of the node and weight the
/// quadrature weight (area measure). Envelope nodes whose region is assigned
/// to a different segment are skipped, so wedge overlaps are counted once.
template <typename F>
double integrate_regions(const EnvelopeDecomposition& d, int quad_n, bool serial, F&& f) {
  const auto& segs = d.curve.segments;
  auto gs = gauss01(5);
  int ns = static_cast<int>(segs.size());
  // flatten (segment, panel) pairs so a single long segment still spreads
  // across workers
  std::vector<int> panel_count(ns), panel_start(ns + 1, 0);
  for (int i = 0; i < ns; ++i) {
    int panels = std::max(quad_n, static_cast<int>(std::ceil(segs[i].length() / d.eps / 4)));
    panel_count[i] = std::min(panels, 4096);
    panel_start[i + 1] = panel_start[i] + panel_count[i];
  }
  int total_panels = panel_start[ns];
  std::vector<double> partial(total_panels, 0.0);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16) if (!serial)
#endif
  for (int gp = 0; gp < total_panels; ++gp) {
    int i = static_cast<int>(std::upper_bound(panel_start.begin(), panel_start.end(), gp) -
                             panel_start.begin()) -
            1;
    int p = gp - panel_start[i];
    const auto& seg = segs[i];
    double len = seg.length();
    int panels = panel_count[i];
    double acc = 0;
    for (const auto& [tq, tw] : gs) {
      double t = len * (p + tq) / panels;
      Point2 base = seg.point_at(t);
      Point2 edir = seg.envelope_dir_at(t);
      for (const auto& [sq, sw] : gs) {
        double s = d.eps * sq;
        Point2 y{base[0] + s * edir[0], base[1] + s * edir[1]};
        double jac = 1.0;
        if (seg.kind == CurveSegment::Kind::Arc)
          jac = seg.normal_outward ? 1.0 - s / seg.radius : 1.0 + s / seg.radius;
        Classification c = classify(y, d);
        if (c.kind == RegionKind::CornerSector || c.segment != i) continue;
        c.t = t;  // exact parameters of this node
        c.s = s;
        double wgt = (len / panels) * tw * d.eps * sw * jac;
        acc += wgt * f(y, c, wgt);
      }
    }
    partial[gp] = acc;
  }
  double total = 0;
  for (double v : partial) total += v;

  // corner sectors in polar coordinates
  for (int k = 0; k < static_cast<int>(d.curve.corners.size()); ++k) {
    const Corner& corner = d.curve.corners[k];
    SectorSpan span = sector_span(d, corner);
    if (!span.present) continue;
    for (const auto& [aq, aw] : gs) {
      double ang = span.ang_start + span.ang_sweep * aq;
      Point2 dir{std::cos(ang), std::sin(ang)};
      for (const auto& [rq, rw] : gs) {
        double r = d.eps * rq;
        Point2 y{corner.p[0] + r * dir[0], corner.p[1] + r * dir[1]};
        Classification c;
        c.kind = RegionKind::CornerSector;
        c.corner = k;
        c.s = r;
        double wgt = span.ang_sweep * aw * d.eps * rw * r;
        total += wgt * f(y, c, wgt);
      }
    }
  }
  return total;
}

Point2 node_normal(const EnvelopeDecomposition& d, Point2 y, const Classification& c) {
  if (c.kind != RegionKind::CornerSector) return d.curve.segments[c.segment].normal_at(c.t);
  Point2 rel = sub(y, d.curve.corners[c.corner].p);
  double r = norm2(rel);
  return {-rel[0] / r, -rel[1] / r};
}

double node_extend(const EnvelopeDecomposition& d, const InterfaceFn& w, const Classification& c) {
  if (c.kind != RegionKind::CornerSector) return w(c.segment, c.t);
  const Corner& corner = d.curve.corners[c.corner];
  return w(corner.seg_before, d.curve.segments[corner.seg_before].length());
}

}  // namespace

double dnn_eps(const GradientFn& grad_u, const InterfaceFn& w, const EnvelopeDecomposition& d,
               int quad_n) {
  double integral =
      integrate_regions(d, quad_n, false, [&](Point2 y, const Classification& c, double) {
        Point2 n = node_normal(d, y, c);
        auto g = grad_u(y[0], y[1]);
        return (g[0] * n[0] + g[1] * n[1]) * node_extend(d, w, c);
      });
  return integral / d.eps;
}

double trace_pair_eps(const PlaneFn& v, const PlaneFn& phi, const EnvelopeDecomposition& d,
                      int quad_n) {
  double integral =
      integrate_regions(d, quad_n, false, [&](Point2 y, const Classification&, double) {
        return v(y[0], y[1]) * phi(y[0], y[1]);
      });
  return integral / d.eps;
}

double RegionAreas::total() const {
  double t = 0;
  for (double v : envelope) t += v;
  for (double v : sector) t += v;
  return t;
}

RegionAreas region_areas(const EnvelopeDecomposition& d, int quad_n) {
  RegionAreas out;
  out.envelope.assign(d.curve.segments.size(), 0.0);
  out.sector.assign(d.curve.corners.size(), 0.0);
  integrate_regions(d, quad_n, true, [&](Point2, const Classification& c, double wgt) {
    if (c.kind == RegionKind::CornerSector)
      out.sector[c.corner] += wgt;
    else
      out.envelope[c.segment] += wgt;
    return 1.0;
  });
  return out;
}

ScalingProbeResult fe_scaling_probe(const std::vector<int>& levels, bool smooth_reference) {
  ScalingProbeResult res;
  for (int level : levels) {
    int n = 1 << level;
    double h = 1.0 / n;
    auto mesh = std::make_shared<Mesh2D>(generate_crossed(n, n, {0, 0, 1, 1}));
    auto space = FunctionSpace::create(mesh, Element::P1);
    Vector coeffs;
    if (smooth_reference) {
      coeffs = interpolate(space, [](double x, double, int) { return x; });
    } else {
      // hat layer: u_h = c at x = 0 nodes, 0 elsewhere, c = h/2
      coeffs = interpolate(space, [&](double x, double, int) { return x < 1e-12 ? 0.5 * h : 0.0; });
    }
    if (coeffs.lpNorm<Eigen::Infinity>() == 0)
      throw std::invalid_argument("fe_scaling_probe: zero field");
    FEFunction u(space, coeffs);

    // pointwise regularized normal derivative on Gamma = {x = 0}, n = (-1, 0):
    // g(y0) = (1/eps) * integral over s in (0, eps) of -du/dx (s, y0)
    double eps = 1e-3 * h;
    auto gs = gauss01(5);
    double g_l2_sq = 0;
    for (int k = 0; k < n; ++k) {
      for (const auto& [tq, tw] : gs) {
        double y0 = h * (k + tq);
        double g = 0;
        for (const auto& [sq, sw] : gs) g += sw * -u.gradient(eps * sq, y0)[0];
        g_l2_sq += h * tw * g * g;
      }
    }

    SparseMatrix apm =
        assemble_stiffness(space).matrix.plus(assemble_mass(space).matrix);
    double h1 = std::sqrt(coeffs.dot(apm.apply(coeffs)));
    res.h.push_back(h);
    res.ratio.push_back(std::sqrt(g_l2_sq) / h1);
  }
  // least-squares slope of log(ratio) against log(h)
  int m = static_cast<int>(res.h.size());
  if (m >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
      double x = std::log(res.h[i]), y = std::log(res.ratio[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    res.fitted_exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  return res;
}

}  // namespace fracprec
