#include "fracprec/report.hpp"

#include "fracprec/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fracprec {

namespace {

constexpr double kPi = 3.14159265358979323846;

VerifyRow make_row(std::string c, double param, std::string metric, double measured,
                   double expected) {
  VerifyRow r;
  r.case_name = std::move(c);
  r.param = param;
  r.metric = std::move(metric);
  r.measured = measured;
  r.expected = expected;
  r.error = std::abs(measured - expected) / std::max(1.0, std::abs(expected));
  return r;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  int m = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < m; ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

std::vector<VerifyRow> verify_halfplane() {
  std::vector<VerifyRow> rows;
  // Gamma = the y-axis from (0,0) to (0,1); the envelope grows into x > 0
  auto curve = PiecewiseCurve::from_segments({CurveSegment::line({0, 0}, {0, 1}, {-1, 0})});
  auto w_t = [](int, double t) { return 1.0 + t * (1.0 - t); };
  auto grad_u = [&](double x, double y) -> std::array<double, 2> {
    // u = -x * w(y), the right inverse of the regularized normal derivative
    return {-(1.0 + y * (1.0 - y)), -x * (1.0 - 2.0 * y)};
  };
  double w_sq = 41.0 / 30.0;  // integral of w^2 over [0, 1]
  for (double eps : {0.1, 0.01}) {
    EnvelopeDecomposition d(curve, eps);
    rows.push_back(make_row("halfplane", eps, "dnn_right_inverse", dnn_eps(grad_u, w_t, d), w_sq));
    // strip integral of (x + 1) against 1 has an exact eps/2 correction
    rows.push_back(make_row("halfplane", eps, "trace_pair_linear",
                            trace_pair_eps([](double x, double) { return x + 1.0; },
                                           [](double, double) { return 1.0; }, d),
                            1.0 + 0.5 * eps));
  }
  return rows;
}

std::vector<VerifyRow> verify_disk() {
  std::vector<VerifyRow> rows;
  // Gamma = unit circle, envelope toward the center
  auto curve =
      PiecewiseCurve::from_segments({CurveSegment::arc({0, 0}, 1.0, 0.0, 2.0 * kPi, true)});
  auto w_t = [](int, double t) { return 2.0 + std::cos(t); };  // t = angle on the unit circle
  auto grad_u = [](double x, double y) -> std::array<double, 2> {
    // u = r * w(theta); grad in Cartesian coordinates
    double th = std::atan2(y, x);
    double r = std::hypot(x, y);
    double w = 2.0 + std::cos(th);
    double dw = -std::sin(th);
    double ct = std::cos(th), st = std::sin(th);
    (void)r;
    return {w * ct - dw * st, w * st + dw * ct};
  };
  double w_sq = 2.0 * kPi * 4.0 + kPi;  // integral of (2 + cos)^2 over [0, 2 pi]
  for (double eps : {0.1, 0.01}) {
    EnvelopeDecomposition d(curve, eps);
    rows.push_back(make_row("disk", eps, "dnn_radial_factor", dnn_eps(grad_u, w_t, d),
                            (1.0 - 0.5 * eps) * w_sq));
  }
  // trace pairing of a smooth plane function converges at rate 1 in eps
  auto v = [](double x, double y) { return x * x + y; };
  auto one = [](double, double) { return 1.0; };
  double exact = kPi;  // integral of cos^2 + sin over the unit circle
  std::vector<double> epss{1e-1, 1e-2, 1e-3, 1e-4}, errs;
  for (double eps : epss) {
    EnvelopeDecomposition d(curve, eps);
    double got = trace_pair_eps(v, one, d, 16);
    errs.push_back(std::abs(got - exact));
    rows.push_back(make_row("disk", eps, "trace_pair_smooth", got, exact));
  }
  rows.push_back(make_row("disk", 0, "trace_pair_slope", fit_slope(epss, errs), 1.0));
  return rows;
}

std::vector<VerifyRow> verify_square_corner() {
  std::vector<VerifyRow> rows;
  double eps = 0.1;
  // concave corner at the origin: both envelopes overlap in a wedge
  auto lshape = PiecewiseCurve::from_segments({CurveSegment::line({0, 1}, {0, 0}, {-1, 0}),
                                               CurveSegment::line({0, 0}, {1, 0}, {0, -1})});
  EnvelopeDecomposition dl(lshape, eps);
  auto areas_l = region_areas(dl);
  rows.push_back(make_row("square-corner", eps, "wedge_total_area", areas_l.total(),
                          2.0 * eps - eps * eps));
  Classification c = classify({eps / 4.0, eps / 8.0}, dl);
  rows.push_back(
      make_row("square-corner", eps, "wedge_bisector_assignment", c.segment, 1.0));

  // convex corner at the origin: a gap sector remains between the envelopes
  auto convex = PiecewiseCurve::from_segments({CurveSegment::line({-1, 0}, {0, 0}, {0, -1}),
                                               CurveSegment::line({0, 0}, {0, -1}, {-1, 0})});
  EnvelopeDecomposition dc(convex, eps);
  auto areas_c = region_areas(dc);
  rows.push_back(make_row("square-corner", eps, "sector_total_area", areas_c.total(),
                          2.0 * eps + 0.25 * kPi * eps * eps));
  double diag = eps / (2.0 * std::sqrt(2.0));
  Classification cs = classify({diag, diag}, dc);
  rows.push_back(make_row("square-corner", eps, "sector_bisector_kind",
                          cs.kind == RegionKind::CornerSector ? 1.0 : 0.0, 1.0));
  return rows;
}

std::vector<VerifyRow> verify_fe_scaling() {
  std::vector<VerifyRow> rows;
  auto probe = fe_scaling_probe({3, 4, 5, 6, 7});
  for (std::size_t i = 0; i < probe.h.size(); ++i) {
    double expected = probe.ratio[0] * std::sqrt(probe.h[0] / probe.h[i]);
    rows.push_back(make_row("fe-scaling", probe.h[i], "dnn_h1_ratio", probe.ratio[i], expected));
  }
  rows.push_back(make_row("fe-scaling", 0, "fitted_exponent", probe.fitted_exponent, -0.5));
  return rows;
}

}  // namespace

std::vector<VerifyRow> envelope_verify(const std::string& case_name) {
  if (case_name == "halfplane") return verify_halfplane();
  if (case_name == "disk") return verify_disk();
  if (case_name == "square-corner") return verify_square_corner();
  if (case_name == "fe-scaling") return verify_fe_scaling();
  if (case_name == "all") {
    std::vector<VerifyRow> rows;
    for (const char* c : {"halfplane", "disk", "square-corner", "fe-scaling"}) {
      auto part = envelope_verify(c);
      rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
  }
  throw std::invalid_argument("unknown envelope-verify case: " + case_name);
}

std::string verify_to_csv(const std::vector<VerifyRow>& rows) {
  std::ostringstream os;
  os << "case,param,metric,measured,expected,error\n";
  for (const auto& r : rows)
    os << r.case_name << ',' << fmt_double(r.param) << ',' << r.metric << ','
       << fmt_double(r.measured) << ',' << fmt_double(r.expected) << ',' << fmt_double(r.error)
       << "\n";
  return os.str();
}

namespace {

struct PanelKey {
  double mu, k;
  bool operator<(const PanelKey& o) const {
    if (mu != o.mu) return mu > o.mu;  // large mu on top
    return k < o.k;
  }
};

std::string color_for(int idx) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return palette[idx % 8];
}

}  // namespace

void render_heatmap(const std::string& csv_path, const std::string& value_column,
                    const std::string& out_path) {
  if (value_column != "cond" && value_column != "iterations")
    throw std::invalid_argument("heatmap value must be cond or iterations");
  auto records = read_csv(csv_path);
  struct Pt {
    int level;
    double value;
  };
  // panel -> series -> points
  std::map<PanelKey, std::map<std::string, std::vector<Pt>>> panels;
  double vmin = std::numeric_limits<double>::max(), vmax = 0;
  int lmin = 1 << 30, lmax = -(1 << 30);
  for (const auto& r : records) {
    double v;
    if (value_column == "cond") {
      if (!r.cond) continue;
      v = *r.cond;
    } else {
      if (!r.iterations) continue;
      v = *r.iterations;
    }
    if (v <= 0) continue;
    std::string series = r.precond;
    if (!r.pairing.empty()) series += " " + r.pairing;
    panels[{r.mu, r.k}][series].push_back({r.level, v});
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
    lmin = std::min(lmin, r.level);
    lmax = std::max(lmax, r.level);
  }
  if (panels.empty())
    throw std::runtime_error("heatmap: no usable rows with " + value_column + " in " + csv_path);
  if (vmax <= vmin) vmax = vmin * 1.1 + 1;
  if (lmax == lmin) ++lmax;

  std::set<double> mus, ks;
  for (const auto& [key, _] : panels) {
    mus.insert(key.mu);
    ks.insert(key.k);
  }
  int ncols = static_cast<int>(ks.size());
  int nrows = static_cast<int>(mus.size());
  const int pw = 230, ph = 170, mx = 60, my = 50, gap = 18;
  int width = mx * 2 + ncols * pw + (ncols - 1) * gap;
  int height = my * 2 + nrows * ph + (nrows - 1) * gap + 30;

  std::map<double, int, std::greater<double>> mu_row;
  int idx = 0;
  for (auto it = mus.rbegin(); it != mus.rend(); ++it) mu_row[*it] = idx++;
  std::map<double, int> k_col;
  idx = 0;
  for (double k : ks) k_col[k] = idx++;

  double lvmin = std::log10(vmin), lvmax = std::log10(vmax);
  std::map<std::string, int> series_color;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << mx << "\" y=\"20\" font-size=\"14\">" << value_column
      << " by refinement level, panels over (mu, K)</text>\n";

  for (const auto& [key, series_map] : panels) {
    int px = mx + k_col[key.k] * (pw + gap);
    int py = my + mu_row[key.mu] * (ph + gap);
    svg << "<rect x=\"" << px << "\" y=\"" << py << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"#fafafa\" stroke=\"#888\"/>\n";
    svg << "<text x=\"" << px + 6 << "\" y=\"" << py + 14 << "\">mu=" << fmt_double(key.mu)
        << " K=" << fmt_double(key.k) << "</text>\n";
    auto sx = [&](int level) {
      return px + 18 + (pw - 36) * double(level - lmin) / double(lmax - lmin);
    };
    auto sy = [&](double v) {
      return py + ph - 16 - (ph - 44) * (std::log10(v) - lvmin) / (lvmax - lvmin);
    };
    for (const auto& [series, pts] : series_map) {
      if (!series_color.count(series))
        series_color[series] = static_cast<int>(series_color.size());
      std::string col = color_for(series_color[series]);
      std::ostringstream poly;
      for (const auto& p : pts) poly << sx(p.level) << ',' << sy(p.value) << ' ';
      if (pts.size() > 1)
        svg << "<polyline points=\"" << poly.str() << "\" fill=\"none\" stroke=\"" << col
            << "\" stroke-width=\"1.5\"/>\n";
      for (const auto& p : pts)
        svg << "<circle cx=\"" << sx(p.level) << "\" cy=\"" << sy(p.value) << "\" r=\"2.5\" fill=\""
            << col << "\"/>\n";
    }
    svg << "<text x=\"" << px + 6 << "\" y=\"" << py + ph - 3 << "\" font-size=\"9\">levels "
        << lmin << ".." << lmax << ", log range " << fmt_double(vmin) << ".." << fmt_double(vmax)
        << "</text>\n";
  }
  // legend
  int ly = height - 18;
  int lx = mx;
  for (const auto& [series, cidx] : series_color) {
    svg << "<rect x=\"" << lx << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\""
        << color_for(cidx) << "\"/>\n";
    svg << "<text x=\"" << lx + 14 << "\" y=\"" << ly << "\">" << series << "</text>\n";
    lx += 24 + 7 * static_cast<int>(series.size());
  }
  svg << "</svg>\n";

  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + out_path);
  f << svg.str();
}

}  // namespace fracprec
