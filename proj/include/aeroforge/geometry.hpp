#pragma once

#include <string>
#include <vector>

#include "aeroforge/domain.hpp"

namespace aeroforge::geometry {

/// NACA 4-digit section parameters decoded from the designator:
/// m = digit1/100 (max camber), p = digit2/10 (camber position),
/// t = digits34/100 (thickness), all as chord fractions.
struct AirfoilSpec {
  std::string designator;
  double max_camber = 0.0;       // m
  double camber_position = 0.0;  // p
  double thickness = 0.0;        // t
};

/// Parses e.g. "NACA4412", "naca 0012" or "4412". Throws on anything that is
/// not a 4-digit designator or encodes m>0 with p=0.
AirfoilSpec parse_designator(const std::string& designator);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct AirfoilCoordinates {
  std::string designator;
  std::vector<Point> upper;  // leading edge -> trailing edge
  std::vector<Point> lower;
};

/// Half-thickness distribution y_t(x) for chord-normalized x in [0,1].
/// closed_te swaps the trailing coefficient so y_t(1) == 0 exactly.
double thickness(double x, double t, bool closed_te = false);

struct Camber {
  double y = 0.0;      // camber line height
  double slope = 0.0;  // dy_c/dx
};

/// Piecewise-parabolic mean camber line and its analytic slope.
Camber camber(double x, double m, double p);

/// Surface coordinates with thickness applied perpendicular to the camber
/// line at cosine-spaced stations. n_points is the station count per surface.
AirfoilCoordinates generate(const AirfoilSpec& spec, int n_points = 120, bool closed_te = false);

/// Shoelace area of the closed section polygon (chord-normalized units).
double polygon_area(const AirfoilCoordinates& coords);

/// Arc length of upper+lower surfaces (chord-normalized units).
double perimeter(const AirfoilCoordinates& coords);

/// True if the section outline is a simple (non-self-intersecting) polygon.
bool is_simple_polygon(const AirfoilCoordinates& coords);

/// Idealized thin-walled wing section quantities used by the structural
/// model. Spars are vertical webs at fixed chord stations, ribs are full
/// cross-section plates, the shell follows the outer surface.
struct SectionProperties {
  double shell_area_m2 = 0.0;         // perimeter * shell thickness
  double section_area_m2 = 0.0;       // enclosed cross-section area
  double second_moment_m4 = 0.0;      // bending inertia about chordwise axis
  double shell_volume_m3 = 0.0;
  double spar_volume_m3 = 0.0;
  double rib_volume_m3 = 0.0;
  double total_volume_m3 = 0.0;
};

SectionProperties wing_section_properties(const AirfoilCoordinates& coords,
                                          const domain::StructConfig& config, double chord_m,
                                          double span_m);

/// Chordwise spar stations (fractions of chord) for a given spar count.
std::vector<double> spar_stations(int n_spars);

/// Selig-style two-column coordinate file (TE -> LE over upper, LE -> TE over
/// lower) and a CSV mirror.
std::string to_selig(const AirfoilCoordinates& coords);
std::string to_csv(const AirfoilCoordinates& coords);

/// Gmsh-style .geo description of the section outline (points + spline),
/// consumed by the external mesh adapter.
std::string to_geo(const AirfoilCoordinates& coords, double chord_m);

}  // namespace aeroforge::geometry
