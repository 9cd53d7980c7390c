#pragma once

#include "fracprec/mesh.hpp"

#include <array>
#include <functional>
#include <vector>

namespace fracprec {

/// One C^2 piece of an interface curve: a straight line or a circular arc.
/// `normal` is the n_{Gamma_eps} field side; the envelope grows on the
/// opposite side (into Omega_p).
struct CurveSegment {
  enum class Kind { Line, Arc } kind = Kind::Line;
  Point2 a{0, 0}, b{0, 0};  // line endpoints
  Point2 normal{0, 0};      // line: constant unit normal
  Point2 center{0, 0};      // arc data
  double radius = 0;
  double ang0 = 0, ang1 = 0;     // counterclockwise span
  bool normal_outward = true;    // arc: n points away from the center

  static CurveSegment line(Point2 a, Point2 b, Point2 normal);
  static CurveSegment arc(Point2 center, double radius, double ang0, double ang1,
                          bool normal_outward);

  double length() const;
  Point2 point_at(double t) const;          // t in [0, length]
  Point2 normal_at(double t) const;         // n_{Gamma_eps}
  Point2 envelope_dir_at(double t) const {  // -n, into the envelope
    auto n = normal_at(t);
    return {-n[0], -n[1]};
  }
  Point2 start() const { return point_at(0); }
  Point2 end() const { return point_at(length()); }
};

struct Corner {
  Point2 p;
  double theta;  // angle between the segments at p (radians, != pi)
  int seg_before, seg_after;
};

struct PiecewiseCurve {
  std::vector<CurveSegment> segments;
  std::vector<Corner> corners;  // derived

  static PiecewiseCurve from_segments(std::vector<CurveSegment> segs);
  double total_length() const;
};

struct EnvelopeDecomposition {
  PiecewiseCurve curve;
  double eps;

  EnvelopeDecomposition(PiecewiseCurve c, double eps_in);
  /// Conservative injectivity threshold for eps.
  double max_eps() const;
};

enum class RegionKind { NormalEnvelope, OverlapWedge, CornerSector };

struct Classification {
  RegionKind kind;
  int segment = -1;  // envelope/wedge: assigned segment
  int corner = -1;   // sector: corner index
  double t = 0;      // foot parameter along the segment (arc length)
  double s = 0;      // distance from Gamma along the envelope direction
};

/// Classify a point of Gamma_eps; throws if the point is outside.
Classification classify(Point2 y, const EnvelopeDecomposition& d);

/// n_{Gamma_eps}: segment normal in envelopes/wedges, radial in sectors.
Point2 normal_field(Point2 y, const EnvelopeDecomposition& d);

/// E_eps w at a point; w is given per segment as w(segment_index, t).
using InterfaceFn = std::function<double(int, double)>;
double extend(const InterfaceFn& w, Point2 y, const EnvelopeDecomposition& d);

using GradientFn = std::function<std::array<double, 2>(double, double)>;
using PlaneFn = std::function<double(double, double)>;

/// (1/eps) integral over Gamma_eps of grad(u) . n_{Gamma_eps} E_eps(w).
double dnn_eps(const GradientFn& grad_u, const InterfaceFn& w, const EnvelopeDecomposition& d,
               int quad_n = 8);

/// (1/eps) integral over Gamma_eps of v * phi.
double trace_pair_eps(const PlaneFn& v, const PlaneFn& phi, const EnvelopeDecomposition& d,
                      int quad_n = 8);

/// Area of Gamma_eps attributed to each region label, by region quadrature.
struct RegionAreas {
  std::vector<double> envelope;  // per segment (wedge halves included)
  std::vector<double> sector;    // per corner
  double total() const;
};
RegionAreas region_areas(const EnvelopeDecomposition& d, int quad_n = 32);

struct ScalingProbeResult {
  std::vector<double> h;
  std::vector<double> ratio;  // ||dnn_eps u_h||_L2(Gamma) / ||u_h||_H1
  double fitted_exponent = 0;
};

/// h^{-1/2} probe from the closing remark: P1 hat layer along Gamma = {x=0}
/// on crossed unit-square meshes, eps << h.
ScalingProbeResult fe_scaling_probe(const std::vector<int>& levels, bool smooth_reference = false);

}  // namespace fracprec
