#include "aeroforge/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "aeroforge/util.hpp"

namespace aeroforge::geometry {

AirfoilSpec parse_designator(const std::string& designator) {
  std::string digits;
  for (char c : designator)
    if (std::isdigit(static_cast<unsigned char>(c))) digits.push_back(c);
  std::string head = util::lower(designator);
  if (digits.size() != 4)
    throw std::invalid_argument("not a NACA 4-digit designator: '" + designator + "'");
  AirfoilSpec s;
  s.designator = "NACA" + digits;
  s.max_camber = (digits[0] - '0') / 100.0;
  s.camber_position = (digits[1] - '0') / 10.0;
  s.thickness = ((digits[2] - '0') * 10 + (digits[3] - '0')) / 100.0;
  if (s.thickness <= 0) throw std::invalid_argument("zero thickness airfoil: " + designator);
  if (s.max_camber > 0 && s.camber_position == 0)
    throw std::invalid_argument("cambered designator with p=0: " + designator);
  return s;
}

double thickness(double x, double t, bool closed_te) {
  if (x < 0.0 || x > 1.0) throw std::domain_error("thickness: x outside [0,1]");
  if (t <= 0.0) throw std::domain_error("thickness: t must be positive");
  const double a4 = closed_te ? 0.1036 : 0.1015;
  return 5.0 * t *
         (0.2969 * std::sqrt(x) - 0.1260 * x - 0.3516 * x * x + 0.2843 * x * x * x -
          a4 * x * x * x * x);
}

Camber camber(double x, double m, double p) {
  if (x < 0.0 || x > 1.0) throw std::domain_error("camber: x outside [0,1]");
  if (m > 0.0 && p <= 0.0) throw std::domain_error("camber: m > 0 requires p > 0");
  if (m == 0.0) return {0.0, 0.0};
  Camber c;
  if (x <= p) {
    c.y = m / (p * p) * (2.0 * p * x - x * x);
    c.slope = 2.0 * m / (p * p) * (p - x);
  } else {
    const double q = 1.0 - p;
    c.y = m / (q * q) * ((1.0 - 2.0 * p) + 2.0 * p * x - x * x);
    c.slope = 2.0 * m / (q * q) * (p - x);
  }
  return c;
}

AirfoilCoordinates generate(const AirfoilSpec& spec, int n_points, bool closed_te) {
  if (n_points < 20) throw std::invalid_argument("generate: need at least 20 points");
  AirfoilCoordinates out;
  out.designator = spec.designator;
  out.upper.reserve(n_points);
  out.lower.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    // cosine spacing clusters stations at the leading edge
    double beta = std::numbers::pi * i / (n_points - 1);
    double x = 0.5 * (1.0 - std::cos(beta));
    double yt = thickness(x, spec.thickness, closed_te);
    Camber c = camber(x, spec.max_camber, spec.camber_position);
    if (spec.max_camber == 0.0) {
      // symmetric section: keep the mirror exact
      out.upper.push_back({x, yt});
      out.lower.push_back({x, -yt});
    } else {
      double theta = std::atan(c.slope);
      double s = std::sin(theta), co = std::cos(theta);
      out.upper.push_back({x - yt * s, c.y + yt * co});
      out.lower.push_back({x + yt * s, c.y - yt * co});
    }
  }
  return out;
}

namespace {
std::vector<Point> outline(const AirfoilCoordinates& c) {
  // closed loop: TE -> LE along the upper surface, LE -> TE along the lower
  std::vector<Point> poly;
  poly.reserve(c.upper.size() + c.lower.size());
  for (auto it = c.upper.rbegin(); it != c.upper.rend(); ++it) poly.push_back(*it);
  for (std::size_t i = 0; i < c.lower.size(); ++i) {
    // surfaces that meet at the leading edge share that point exactly
    if (i == 0 && c.lower[0].x == poly.back().x && c.lower[0].y == poly.back().y) continue;
    poly.push_back(c.lower[i]);
  }
  return poly;
}

bool segments_intersect(const Point& a, const Point& b, const Point& c, const Point& d) {
  auto cross = [](const Point& o, const Point& p, const Point& q) {
    return (p.x - o.x) * (q.y - o.y) - (p.y - o.y) * (q.x - o.x);
  };
  double d1 = cross(c, d, a), d2 = cross(c, d, b), d3 = cross(a, b, c), d4 = cross(a, b, d);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}
}  // namespace

double polygon_area(const AirfoilCoordinates& coords) {
  auto poly = outline(coords);
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return std::fabs(a) * 0.5;
}

double perimeter(const AirfoilCoordinates& coords) {
  auto arc = [](const std::vector<Point>& pts) {
    double s = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
      s += std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
    return s;
  };
  return arc(coords.upper) + arc(coords.lower);
}

bool is_simple_polygon(const AirfoilCoordinates& coords) {
  auto poly = outline(coords);
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the wrap
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

std::vector<double> spar_stations(int n_spars) {
  // stations stay forward of ~0.7c so the webs clear the thickest shell
  if (n_spars == 2) return {0.25, 0.70};
  if (n_spars == 3) return {0.20, 0.45, 0.70};
  throw std::invalid_argument("spar count must be 2 or 3");
}

namespace {
double interp_y(const std::vector<Point>& pts, double x) {
  if (pts.size() < 2) throw std::invalid_argument("too few surface points");
  if (x <= pts.front().x) return pts.front().y;
  if (x >= pts.back().x) return pts.back().y;
  auto it = std::lower_bound(pts.begin(), pts.end(), x,
                             [](const Point& p, double v) { return p.x < v; });
  const Point& b = *it;
  const Point& a = *(it - 1);
  double w = (b.x > a.x) ? (x - a.x) / (b.x - a.x) : 0.0;
  return a.y * (1.0 - w) + b.y * w;
}
}  // namespace

SectionProperties wing_section_properties(const AirfoilCoordinates& coords,
                                          const domain::StructConfig& config, double chord_m,
                                          double span_m) {
  if (chord_m <= 0 || span_m <= 0) throw std::invalid_argument("chord and span must be positive");

  SectionProperties p;
  const double shell_t = config.shell_thickness_mm * 1e-3;
  const double perim = perimeter(coords) * chord_m;
  p.section_area_m2 = polygon_area(coords) * chord_m * chord_m;
  p.shell_area_m2 = perim * shell_t;
  p.shell_volume_m3 = p.shell_area_m2 * span_m;

  // spars: vertical webs spanning the local section height
  const double spar_w = config.spar_width_mm * 1e-3;
  double spar_area = 0.0;
  double spar_inertia = 0.0;
  for (double xs : spar_stations(config.n_spars)) {
    double h = (interp_y(coords.upper, xs) - interp_y(coords.lower, xs)) * chord_m;
    if (h <= 2.0 * shell_t)
      throw std::invalid_argument("internal members overlap section bounds at x=" +
                                  util::num_str(xs));
    spar_area += spar_w * h;
    spar_inertia += spar_w * h * h * h / 12.0;
  }
  p.spar_volume_m3 = spar_area * span_m;

  // ribs: full-section plates
  const double rib_t = config.rib_thickness_mm * 1e-3;
  p.rib_volume_m3 = p.section_area_m2 * rib_t * config.n_ribs;

  p.total_volume_m3 = p.shell_volume_m3 + p.spar_volume_m3 + p.rib_volume_m3;

  // thin-shell bending inertia about the chordwise axis: integral of y^2 t ds
  auto shell_term = [&](const std::vector<Point>& pts) {
    double sum = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      double ds = std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y) * chord_m;
      double ym = 0.5 * (pts[i].y + pts[i - 1].y) * chord_m;
      sum += ym * ym * shell_t * ds;
    }
    return sum;
  };
  p.second_moment_m4 = shell_term(coords.upper) + shell_term(coords.lower) + spar_inertia;
  return p;
}

std::string to_selig(const AirfoilCoordinates& coords) {
  std::ostringstream ss;
  ss << coords.designator << "\n";
  for (auto it = coords.upper.rbegin(); it != coords.upper.rend(); ++it)
    ss << util::num_str(it->x) << " " << util::num_str(it->y) << "\n";
  for (std::size_t i = 1; i < coords.lower.size(); ++i)
    ss << util::num_str(coords.lower[i].x) << " " << util::num_str(coords.lower[i].y) << "\n";
  return ss.str();
}

std::string to_csv(const AirfoilCoordinates& coords) {
  std::ostringstream ss;
  ss << "surface,x,y\n";
  for (const auto& p : coords.upper)
    ss << "upper," << util::num_str(p.x) << "," << util::num_str(p.y) << "\n";
  for (const auto& p : coords.lower)
    ss << "lower," << util::num_str(p.x) << "," << util::num_str(p.y) << "\n";
  return ss.str();
}

std::string to_geo(const AirfoilCoordinates& coords, double chord_m) {
  std::ostringstream ss;
  ss << "// " << coords.designator << " outline, chord " << util::num_str(chord_m) << " m\n";
  ss << "lc = " << util::num_str(chord_m / 100.0) << ";\n";
  auto poly = outline(coords);
  for (std::size_t i = 0; i < poly.size(); ++i)
    ss << "Point(" << (i + 1) << ") = {" << util::num_str(poly[i].x * chord_m) << ", "
       << util::num_str(poly[i].y * chord_m) << ", 0, lc};\n";
  ss << "Spline(1) = {";
  for (std::size_t i = 0; i < poly.size(); ++i) ss << (i + 1) << ", ";
  ss << "1};\n";
  return ss.str();
}

}  // namespace aeroforge::geometry
