#include "aeroforge/acoustics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "aeroforge/util.hpp"

namespace aeroforge::acoustics {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;
constexpr double kAbsentDb = -999.0;  // mechanism switched off / negligible

double log10_safe(double x) { return std::log10(std::max(x, 1e-30)); }
}  // namespace

std::string mechanism_name(Mechanism m) {
  switch (m) {
    case Mechanism::kTblTe: return "tbl_te";
    case Mechanism::kSeparation: return "separation";
    case Mechanism::kLblVs: return "lbl_vs";
    case Mechanism::kBluntness: return "bluntness";
    case Mechanism::kTipVortex: return "tip_vortex";
  }
  throw std::logic_error("unknown mechanism");
}

// ---- boundary-layer correlations ----

BoundaryLayerPair boundary_layer(double re_c, double aoa_deg, bool tripped, double chord_m) {
  if (re_c <= 0 || chord_m <= 0) throw std::invalid_argument("boundary_layer: Re and chord > 0");
  const double lg = std::log10(re_c);
  const double a = aoa_deg;

  double delta0, dstar0, theta0;  // zero-incidence values, chord fractions
  if (tripped) {
    delta0 = std::pow(10.0, 1.892 - 0.9045 * lg + 0.0596 * lg * lg);
    dstar0 = (re_c <= 0.3e6) ? 0.0601 * std::pow(re_c, -0.114)
                             : std::pow(10.0, 3.411 - 1.5397 * lg + 0.1059 * lg * lg);
    theta0 = (re_c <= 0.3e6) ? 0.0723 * std::pow(re_c, -0.1765)
                             : std::pow(10.0, 0.5578 - 0.7079 * lg + 0.0404 * lg * lg);
  } else {
    delta0 = std::pow(10.0, 1.6569 - 0.9045 * lg + 0.0596 * lg * lg);
    dstar0 = std::pow(10.0, 3.0187 - 1.5397 * lg + 0.1059 * lg * lg);
    theta0 = std::pow(10.0, 0.2021 - 0.7079 * lg + 0.0404 * lg * lg);
  }

  BoundaryLayerPair out;
  // pressure side shrinks with incidence (same fit tripped or natural)
  out.pressure.delta_m = delta0 * std::pow(10.0, -0.04175 * a + 0.00106 * a * a) * chord_m;
  out.pressure.delta_star_m = dstar0 * std::pow(10.0, -0.0432 * a + 0.00113 * a * a) * chord_m;
  out.pressure.theta_m = theta0 * std::pow(10.0, -0.04408 * a + 0.000873 * a * a) * chord_m;

  double ds, dss, ts;  // suction-side growth factors
  if (tripped) {
    if (a <= 5.0) {
      ds = std::pow(10.0, 0.0311 * a);
      dss = std::pow(10.0, 0.0679 * a);
      ts = std::pow(10.0, 0.0559 * a);
    } else if (a <= 12.5) {
      ds = 0.3468 * std::pow(10.0, 0.1231 * a);
      dss = 0.381 * std::pow(10.0, 0.1516 * a);
      ts = 0.6984 * std::pow(10.0, 0.0869 * a);
    } else {
      ds = 5.718 * std::pow(10.0, 0.0258 * a);
      dss = 14.296 * std::pow(10.0, 0.0258 * a);
      ts = 4.0542 * std::pow(10.0, 0.0258 * a);
    }
  } else {
    if (a <= 7.5) {
      ds = std::pow(10.0, 0.0311 * a);
      dss = std::pow(10.0, 0.0679 * a);
      ts = std::pow(10.0, 0.0559 * a);
    } else if (a <= 12.5) {
      ds = 0.0303 * std::pow(10.0, 0.2336 * a);
      dss = 0.0162 * std::pow(10.0, 0.3066 * a);
      ts = 0.0633 * std::pow(10.0, 0.2157 * a);
    } else {
      ds = 12.0 * std::pow(10.0, 0.0258 * a);
      dss = 52.42 * std::pow(10.0, 0.0258 * a);
      ts = 14.977 * std::pow(10.0, 0.0258 * a);
    }
  }
  out.suction.delta_m = delta0 * ds * chord_m;
  out.suction.delta_star_m = dstar0 * dss * chord_m;
  out.suction.theta_m = theta0 * ts * chord_m;
  return out;
}

BpmInput with_boundary_layer(BpmInput in) {
  const double re_c = in.velocity_ms * in.chord_m / in.air.kinematic_viscosity_m2_s;
  auto bl = boundary_layer(re_c, in.aoa_deg, in.tripped, in.chord_m);
  if (in.delta_star_suction_m <= 0) in.delta_star_suction_m = bl.suction.delta_star_m;
  if (in.delta_star_pressure_m <= 0) in.delta_star_pressure_m = bl.pressure.delta_star_m;
  if (in.delta_pressure_m <= 0) in.delta_pressure_m = bl.pressure.delta_m;
  return in;
}

// ---- spectral shape functions ----

namespace detail {

namespace {
double a_min(double a) {
  if (a < 0.204) return std::sqrt(67.552 - 886.788 * a * a) - 8.219;
  if (a <= 0.244) return -32.665 * a + 3.981;
  return -142.795 * a * a * a + 103.656 * a * a - 57.757 * a + 6.006;
}

double a_max(double a) {
  if (a < 0.13) return std::sqrt(67.552 - 886.788 * a * a) - 8.219;
  if (a <= 0.321) return -15.901 * a + 1.098;
  return -4.669 * a * a * a + 3.491 * a * a - 16.699 * a + 1.149;
}

double b_min(double b) {
  if (b < 0.13) return std::sqrt(16.888 - 886.788 * b * b) - 4.109;
  if (b <= 0.145) return -83.607 * b + 8.138;
  return -817.810 * b * b * b + 355.210 * b * b - 135.024 * b + 10.619;
}

double b_max(double b) {
  if (b < 0.10) return std::sqrt(16.888 - 886.788 * b * b) - 4.109;
  if (b <= 0.187) return -31.313 * b + 1.854;
  return -80.541 * b * b * b + 44.174 * b * b - 39.381 * b + 2.344;
}

double a_peak_width(double re_c) {
  if (re_c < 9.52e4) return 0.57;
  if (re_c <= 8.57e5) {
    double d = re_c - 8.57e5;
    return -9.57e-13 * d * d + 1.13;
  }
  return 1.13;
}

double b_peak_width(double re_c) {
  if (re_c < 9.52e4) return 0.30;
  if (re_c <= 8.57e5) {
    double d = re_c - 8.57e5;
    return -4.48e-13 * d * d + 0.56;
  }
  return 0.56;
}
}  // namespace

double curve_a(double strouhal_ratio, double re_c) {
  double a = std::fabs(log10_safe(strouhal_ratio));
  double a0 = a_peak_width(re_c);
  double ar = (-20.0 - a_min(a0)) / (a_max(a0) - a_min(a0));
  return a_min(a) + ar * (a_max(a) - a_min(a));
}

double curve_a_prime(double strouhal_ratio, double re_c) {
  return curve_a(strouhal_ratio, 3.0 * re_c);
}

double curve_b(double strouhal_ratio, double re_c) {
  double b = std::fabs(log10_safe(strouhal_ratio));
  double b0 = b_peak_width(re_c);
  double br = (-20.0 - b_min(b0)) / (b_max(b0) - b_min(b0));
  return b_min(b) + br * (b_max(b) - b_min(b));
}

double lbl_g1(double e) {
  double lg = log10_safe(e);
  if (e <= 0.5974) return 39.8 * lg - 11.12;
  if (e <= 0.8545) return 98.409 * lg + 2.0;
  if (e < 1.17) return -5.076 + std::sqrt(std::max(0.0, 2.484 - 506.25 * lg * lg));
  if (e < 1.674) return -98.409 * lg + 2.0;
  return -39.8 * lg - 11.12;
}

double lbl_g2(double d) {
  double lg = log10_safe(d);
  if (d <= 0.3237) return 77.852 * lg + 15.328;
  if (d <= 0.5689) return 65.188 * lg + 9.125;
  if (d <= 1.7579) return -114.052 * lg * lg;
  if (d <= 3.0889) return -65.188 * lg + 9.125;
  return -77.852 * lg + 15.328;
}

double lbl_g3(double aoa_deg) { return 171.04 - 3.03 * aoa_deg; }

double blunt_g5(double h_over_dstar, double eta) {
  const double hd = h_over_dstar;
  double mu;
  if (hd < 0.25) mu = 0.1221;
  else if (hd < 0.62) mu = -0.2175 * hd + 0.1755;
  else if (hd < 1.15) mu = -0.0308 * hd + 0.0596;
  else mu = 0.0242;

  double m;
  if (hd <= 0.02) m = 0.0;
  else if (hd <= 0.5) m = 68.724 * hd - 1.35;
  else if (hd <= 0.62) m = 308.475 * hd - 121.23;
  else if (hd <= 1.15) m = 224.811 * hd - 69.354;
  else if (hd < 1.2) m = 1583.28 * hd - 1631.592;
  else m = 268.344;

  double eta0 = -std::sqrt(m * m * mu * mu * mu * mu / (6.25 + m * m * mu * mu));
  double k = 2.5 * std::sqrt(std::max(0.0, 1.0 - (eta0 / mu) * (eta0 / mu))) - 2.5 - m * eta0;
  if (eta < eta0) return m * eta + k;
  if (eta < 0.0) return 2.5 * std::sqrt(std::max(0.0, 1.0 - (eta / mu) * (eta / mu))) - 2.5;
  if (eta < 0.03616) return std::sqrt(std::max(0.0, 1.5625 - 1194.99 * eta * eta)) - 1.25;
  return -155.543 * eta + 4.375;
}

double k1(double re_c) {
  if (re_c < 2.47e5) return -4.31 * std::log10(re_c) + 156.3;
  if (re_c <= 8.0e5) return -9.0 * std::log10(re_c) + 181.6;
  return 128.5;
}

double k2(double k1_value, double mach, double aoa_deg) {
  const double gamma = 27.094 * mach + 3.31;
  const double gamma0 = 23.43 * mach + 4.651;
  const double beta = 72.65 * mach + 10.74;
  const double beta0 = -34.19 * mach - 13.82;
  double adj;
  if (aoa_deg < gamma0 - gamma) {
    adj = -1000.0;
  } else if (aoa_deg <= gamma0 + gamma) {
    double d = aoa_deg - gamma0;
    adj = std::sqrt(std::max(0.0, beta * beta - (beta / gamma) * (beta / gamma) * d * d)) + beta0;
  } else {
    adj = -12.0;
  }
  return k1_value + adj;
}

}  // namespace detail

// ---- directivity ----

double directivity_high(double theta_deg, double phi_deg, double mach, double mach_convection) {
  const double th = theta_deg * kDegToRad;
  const double ph = phi_deg * kDegToRad;
  const double s = std::sin(0.5 * th);
  const double num = 2.0 * s * s * std::sin(ph) * std::sin(ph);
  const double den = (1.0 + mach * std::cos(th)) *
                     std::pow(1.0 + (mach - mach_convection) * std::cos(th), 2.0);
  return num / den;
}

double directivity_low(double theta_deg, double phi_deg, double mach) {
  const double th = theta_deg * kDegToRad;
  const double ph = phi_deg * kDegToRad;
  const double num = std::sin(th) * std::sin(th) * std::sin(ph) * std::sin(ph);
  return num / std::pow(1.0 + mach * std::cos(th), 4.0);
}

// ---- spectrum ----

namespace {

struct BpmState {
  double mach, mach_c, re_c, dir_h, dir_l, scale_h_s, scale_h_p, scale_l_s;
  double st1, st2, st1_bar, k1v, dk1, k2v;
  bool stalled;
};

BpmState prepare(const BpmInput& in) {
  BpmState s{};
  s.mach = in.velocity_ms / in.air.speed_of_sound_ms;
  if (s.mach >= 0.3)
    throw std::invalid_argument("BPM input outside incompressible regime (Mach >= 0.3)");
  if (in.chord_m <= 0 || in.span_m <= 0 || in.velocity_ms <= 0 || in.observer_distance_m <= 0)
    throw std::invalid_argument("BPM input requires positive geometry and velocity");
  s.mach_c = 0.8 * s.mach;
  s.re_c = in.velocity_ms * in.chord_m / in.air.kinematic_viscosity_m2_s;
  s.dir_h = directivity_high(in.observer_theta_deg, in.observer_phi_deg, s.mach, s.mach_c);
  s.dir_l = directivity_low(in.observer_theta_deg, in.observer_phi_deg, s.mach);

  const double m5 = std::pow(s.mach, 5.0);
  const double r2 = in.observer_distance_m * in.observer_distance_m;
  s.scale_h_s = 10.0 * log10_safe(in.delta_star_suction_m * m5 * in.span_m * s.dir_h / r2);
  s.scale_h_p = 10.0 * log10_safe(in.delta_star_pressure_m * m5 * in.span_m * s.dir_h / r2);
  s.scale_l_s = 10.0 * log10_safe(in.delta_star_suction_m * m5 * in.span_m * s.dir_l / r2);

  s.st1 = 0.02 * std::pow(s.mach, -0.6);
  const double a = in.aoa_deg;
  double st2_factor;
  if (a < 1.333) st2_factor = 1.0;
  else if (a <= 12.5) st2_factor = std::pow(10.0, 0.0054 * (a - 1.333) * (a - 1.333));
  else st2_factor = 4.72;
  s.st2 = s.st1 * st2_factor;
  s.st1_bar = 0.5 * (s.st1 + s.st2);

  s.k1v = detail::k1(s.re_c);
  const double re_dstar_p = in.velocity_ms * in.delta_star_pressure_m / in.air.kinematic_viscosity_m2_s;
  s.dk1 = (re_dstar_p <= 5000.0) ? a * (1.43 * log10_safe(re_dstar_p) - 5.29) : 0.0;
  s.k2v = detail::k2(s.k1v, s.mach, a);

  const double gamma0 = 23.43 * s.mach + 4.651;
  s.stalled = (a > 12.5) || (a > gamma0);
  return s;
}

double esum(double level_a_db, double level_b_db) {
  return 10.0 * std::log10(std::pow(10.0, level_a_db / 10.0) + std::pow(10.0, level_b_db / 10.0));
}

}  // namespace

Spectrum spl_spectrum(const BpmInput& raw, const std::set<Mechanism>& mechanisms,
                      const std::vector<double>& frequencies_hz) {
  if (mechanisms.empty()) throw std::invalid_argument("mechanism set is empty");
  if (frequencies_hz.empty()) throw std::invalid_argument("no frequencies requested");
  BpmInput in = with_boundary_layer(raw);
  BpmState s = prepare(in);

  Spectrum out;
  out.frequencies_hz = frequencies_hz;
  for (auto m : mechanisms) out.per_mechanism_db[m] = {};
  out.total_db.reserve(frequencies_hz.size());

  // frequency-independent pieces for the laminar-shedding mechanism
  double st1p, re0;
  if (s.re_c <= 1.3e5) st1p = 0.18;
  else if (s.re_c <= 4.0e5) st1p = 0.001756 * std::pow(s.re_c, 0.3931);
  else st1p = 0.28;
  const double st_peak_p = st1p * std::pow(10.0, -0.04 * in.aoa_deg);
  re0 = std::pow(10.0, 0.215 * in.aoa_deg + 4.978);

  for (double f : frequencies_hz) {
    if (f <= 0) throw std::invalid_argument("frequency must be positive");
    const double st_s = f * in.delta_star_suction_m / in.velocity_ms;
    const double st_p = f * in.delta_star_pressure_m / in.velocity_ms;

    double spl_tbl = kAbsentDb, spl_sep = kAbsentDb;
    if (!s.stalled) {
      double spl_side_p =
          s.scale_h_p + detail::curve_a(st_p / s.st1, s.re_c) + (s.k1v - 3.0) + s.dk1;
      double spl_side_s = s.scale_h_s + detail::curve_a(st_s / s.st1_bar, s.re_c) + (s.k1v - 3.0);
      spl_tbl = esum(spl_side_p, spl_side_s);
      spl_sep = s.scale_h_s + detail::curve_b(st_s / s.st2, s.re_c) + s.k2v;
    } else {
      // deep separation radiates like a low-frequency dipole over the chord
      spl_sep = s.scale_l_s + detail::curve_a_prime(st_s / s.st2, s.re_c) + s.k2v;
    }

    double total_p = 0.0;
    auto add = [&](Mechanism m, double level) {
      auto it = out.per_mechanism_db.find(m);
      if (it != out.per_mechanism_db.end()) {
        it->second.push_back(level);
        total_p += std::pow(10.0, level / 10.0);
      }
    };

    add(Mechanism::kTblTe, spl_tbl);
    add(Mechanism::kSeparation, spl_sep);

    if (mechanisms.count(Mechanism::kLblVs)) {
      double lvl = kAbsentDb;
      if (!in.tripped) {
        const double stp = f * in.delta_pressure_m / in.velocity_ms;
        lvl = 10.0 *
                  log10_safe(in.delta_pressure_m * std::pow(s.mach, 5.0) * in.span_m * s.dir_h /
                             (in.observer_distance_m * in.observer_distance_m)) +
              detail::lbl_g1(stp / st_peak_p) + detail::lbl_g2(s.re_c / re0) +
              detail::lbl_g3(in.aoa_deg);
      }
      add(Mechanism::kLblVs, lvl);
    }

    if (mechanisms.count(Mechanism::kBluntness)) {
      double lvl = kAbsentDb;
      const double h = in.te_bluntness_m;
      if (h > 0) {
        const double dstar_avg = 0.5 * (in.delta_star_suction_m + in.delta_star_pressure_m);
        const double hd = h / dstar_avg;
        const double psi = in.te_angle_deg;
        const double st3 = f * h / in.velocity_ms;
        double st_peak;
        if (hd >= 0.2)
          st_peak = (0.212 - 0.0045 * psi) / (1.0 + 0.235 / hd - 0.0132 / (hd * hd));
        else
          st_peak = 0.1 * hd + 0.095 - 0.00243 * psi;
        const double g4 =
            (hd <= 5.0) ? 17.5 * log10_safe(hd) + 157.5 - 1.114 * psi : 169.7 - 1.114 * psi;
        const double eta = log10_safe(st3 / st_peak);
        const double hd_prime = 6.724 * hd * hd - 4.019 * hd + 1.107;
        const double g5_14 = detail::blunt_g5(hd, eta);
        const double g5_0 = detail::blunt_g5(hd_prime, eta);
        const double g5 = g5_0 + 0.0714 * psi * (g5_14 - g5_0);
        lvl = 10.0 * log10_safe(h * std::pow(s.mach, 5.5) * in.span_m * s.dir_h /
                                (in.observer_distance_m * in.observer_distance_m)) +
              g4 + g5;
      }
      add(Mechanism::kBluntness, lvl);
    }

    if (mechanisms.count(Mechanism::kTipVortex)) {
      double lvl = kAbsentDb;
      const double a_tip = in.tip_aoa_deg;
      if (a_tip > 0) {
        double span_ext;  // spanwise extent of the tip vortex at the TE
        if (in.rounded_tip) span_ext = 0.008 * in.chord_m * a_tip;
        else if (a_tip <= 2.0) span_ext = (0.0230 + 0.0169 * a_tip) * in.chord_m;
        else span_ext = (0.0378 + 0.0095 * a_tip) * in.chord_m;
        const double m_max = s.mach * (1.0 + 0.036 * a_tip);
        const double u_max = m_max * in.air.speed_of_sound_ms;
        const double st2p = f * span_ext / u_max;
        const double lg = std::log10(st2p) + 0.3;
        lvl = 10.0 * log10_safe(s.mach * s.mach * std::pow(m_max, 3.0) * span_ext * span_ext *
                                s.dir_h / (in.observer_distance_m * in.observer_distance_m)) +
              126.0 - 30.5 * lg * lg;
      }
      add(Mechanism::kTipVortex, lvl);
    }

    out.total_db.push_back(10.0 * std::log10(std::max(total_p, 1e-99)));
  }
  return out;
}

double oaspl(const std::vector<double>& levels_db) {
  if (levels_db.empty()) throw std::invalid_argument("empty spectrum");
  double p = 0.0;
  for (double l : levels_db) p += std::pow(10.0, l / 10.0);
  return 10.0 * std::log10(p);
}

namespace {
double raw_a_response(double f) {
  const double f2 = f * f;
  const double c1 = 20.6 * 20.6, c2 = 107.7 * 107.7, c3 = 737.9 * 737.9, c4 = 12194.0 * 12194.0;
  return c4 * f2 * f2 / ((f2 + c1) * std::sqrt((f2 + c2) * (f2 + c3)) * (f2 + c4));
}
double raw_c_response(double f) {
  const double f2 = f * f;
  const double c1 = 20.6 * 20.6, c4 = 12194.0 * 12194.0;
  return c4 * f2 / ((f2 + c1) * (f2 + c4));
}
}  // namespace

double a_weighting_db(double frequency_hz) {
  static const double offset = -20.0 * std::log10(raw_a_response(1000.0));
  return 20.0 * std::log10(raw_a_response(frequency_hz)) + offset;
}

double c_weighting_db(double frequency_hz) {
  static const double offset = -20.0 * std::log10(raw_c_response(1000.0));
  return 20.0 * std::log10(raw_c_response(frequency_hz)) + offset;
}

double oaspl_weighted(const std::vector<double>& frequencies_hz,
                      const std::vector<double>& levels_db, double (*weighting)(double)) {
  if (frequencies_hz.size() != levels_db.size() || frequencies_hz.empty())
    throw std::invalid_argument("spectrum size mismatch");
  double p = 0.0;
  for (std::size_t i = 0; i < levels_db.size(); ++i)
    p += std::pow(10.0, (levels_db[i] + weighting(frequencies_hz[i])) / 10.0);
  return 10.0 * std::log10(p);
}

std::vector<DirectivityPoint> directivity_pattern(const BpmInput& input,
                                                  const std::set<Mechanism>& mechanisms,
                                                  const std::vector<double>& frequencies_hz,
                                                  const std::vector<double>& theta_grid_deg) {
  BpmInput ref = input;
  ref.observer_theta_deg = 90.0;
  ref.observer_phi_deg = 90.0;
  const double ref_oaspl = oaspl(spl_spectrum(ref, mechanisms, frequencies_hz).total_db);
  std::vector<DirectivityPoint> out;
  for (double th : theta_grid_deg) {
    BpmInput probe = input;
    probe.observer_theta_deg = th;
    double v = oaspl(spl_spectrum(probe, mechanisms, frequencies_hz).total_db);
    out.push_back({th, v - ref_oaspl});
  }
  return out;
}

std::vector<double> third_octave_centers(double fmin_hz, double fmax_hz) {
  if (fmin_hz <= 0 || fmax_hz < fmin_hz) throw std::invalid_argument("bad band range");
  std::vector<double> centers;
  int n_lo = static_cast<int>(std::floor(10.0 * std::log10(fmin_hz / 1000.0) - 1e-9));
  int n_hi = static_cast<int>(std::ceil(10.0 * std::log10(fmax_hz / 1000.0) + 1e-9));
  for (int n = n_lo; n <= n_hi; ++n) {
    double fc = 1000.0 * std::pow(10.0, n / 10.0);
    // half-percent slack admits bands whose nominal label sits on the edge
    if (fc >= fmin_hz * (1.0 - 5e-3) && fc <= fmax_hz * (1.0 + 5e-3)) centers.push_back(fc);
  }
  return centers;
}

double third_octave_bandwidth(double fc_hz) {
  const double edge = std::pow(10.0, 1.0 / 20.0);
  return fc_hz * (edge - 1.0 / edge);
}

std::vector<domain::ThirdOctaveBand> third_octave_from_psd(const std::vector<double>& frequencies_hz,
                                                           const std::vector<double>& psd_db_hz,
                                                           double fmin_hz, double fmax_hz) {
  if (frequencies_hz.size() != psd_db_hz.size() || frequencies_hz.size() < 2)
    throw std::invalid_argument("psd spectrum too small");
  std::vector<domain::ThirdOctaveBand> bands;
  const double edge = std::pow(10.0, 1.0 / 20.0);
  for (double fc : third_octave_centers(fmin_hz, fmax_hz)) {
    const double lo = fc / edge, hi = fc * edge;
    if (lo < frequencies_hz.front() - 1e-9 || hi > frequencies_hz.back() + 1e-9)
      throw std::out_of_range("band " + util::num_str(fc) + " Hz not covered by input spectrum");
    // trapezoid integration of pressure-squared density across the band
    double energy = 0.0;
    auto density = [&](double f) {
      auto it = std::lower_bound(frequencies_hz.begin(), frequencies_hz.end(), f);
      std::size_t i = std::min<std::size_t>(
          frequencies_hz.size() - 1,
          std::max<std::size_t>(1, static_cast<std::size_t>(it - frequencies_hz.begin())));
      double f0 = frequencies_hz[i - 1], f1 = frequencies_hz[i];
      double w = (f1 > f0) ? (f - f0) / (f1 - f0) : 0.0;
      double level = psd_db_hz[i - 1] * (1.0 - w) + psd_db_hz[i] * w;
      return std::pow(10.0, level / 10.0);
    };
    const int steps = 64;
    for (int k = 0; k < steps; ++k) {
      double f0 = lo + (hi - lo) * k / steps;
      double f1 = lo + (hi - lo) * (k + 1) / steps;
      energy += 0.5 * (density(f0) + density(f1)) * (f1 - f0);
    }
    bands.push_back({fc, 10.0 * std::log10(std::max(energy, 1e-99))});
  }
  return bands;
}

std::vector<domain::ThirdOctaveBand> third_octave_from_bands(
    const std::vector<double>& frequencies_hz, const std::vector<double>& levels_db, double fmin_hz,
    double fmax_hz) {
  if (frequencies_hz.size() != levels_db.size() || frequencies_hz.empty())
    throw std::invalid_argument("band spectrum size mismatch");
  std::vector<domain::ThirdOctaveBand> bands;
  for (double fc : third_octave_centers(fmin_hz, fmax_hz)) {
    if (fc < frequencies_hz.front() * (1.0 - 1e-9) || fc > frequencies_hz.back() * (1.0 + 1e-9))
      throw std::out_of_range("band " + util::num_str(fc) + " Hz not covered by input spectrum");
    auto it = std::lower_bound(frequencies_hz.begin(), frequencies_hz.end(), fc);
    std::size_t i = std::min<std::size_t>(
        frequencies_hz.size() - 1,
        std::max<std::size_t>(1, static_cast<std::size_t>(it - frequencies_hz.begin())));
    double f0 = frequencies_hz[i - 1], f1 = frequencies_hz[i];
    double w = (f1 > f0) ? (std::log(fc) - std::log(f0)) / (std::log(f1) - std::log(f0)) : 0.0;
    w = std::clamp(w, 0.0, 1.0);
    bands.push_back({fc, levels_db[i - 1] * (1.0 - w) + levels_db[i] * w});
  }
  return bands;
}

// ---- dataset validation ----

std::vector<DatasetRow> load_self_noise_dataset(const std::filesystem::path& file) {
  std::vector<DatasetRow> rows;
  std::istringstream in(util::read_file(file));
  std::string line;
  while (std::getline(in, line)) {
    auto t = util::trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream ss{std::string(t)};
    DatasetRow r;
    if (ss >> r.frequency_hz >> r.aoa_deg >> r.chord_m >> r.velocity_ms >>
        r.delta_star_suction_m >> r.spl_db)
      rows.push_back(r);
  }
  return rows;
}

std::vector<CaseValidation> validate_against_dataset(const std::vector<DatasetRow>& rows) {
  // benchmark rig geometry
  const double span = 0.4572;
  const double observer_r = 1.22;

  std::map<std::tuple<double, double, double, double>, std::vector<DatasetRow>> cases;
  for (const auto& r : rows)
    cases[{r.aoa_deg, r.chord_m, r.velocity_ms, r.delta_star_suction_m}].push_back(r);

  std::vector<CaseValidation> out;
  for (const auto& [key, case_rows] : cases) {
    BpmInput in;
    in.chord_m = std::get<1>(key);
    in.span_m = span;
    in.velocity_ms = std::get<2>(key);
    in.aoa_deg = std::get<0>(key);
    in.delta_star_suction_m = std::get<3>(key);
    in.observer_distance_m = observer_r;
    in.tripped = true;
    in = with_boundary_layer(in);

    std::vector<double> freqs;
    for (const auto& r : case_rows) freqs.push_back(r.frequency_hz);
    auto spec = spl_spectrum(in, {Mechanism::kTblTe, Mechanism::kSeparation}, freqs);

    // published levels are normalized by the suction-side amplitude factor
    const double mach = in.velocity_ms / in.air.speed_of_sound_ms;
    const double dir = directivity_high(90.0, 90.0, mach, 0.8 * mach);
    const double scale = 10.0 * std::log10(in.delta_star_suction_m * std::pow(mach, 5.0) * span *
                                           dir / (observer_r * observer_r));

    double sq = 0.0;
    for (std::size_t i = 0; i < case_rows.size(); ++i) {
      double predicted_scaled = spec.total_db[i] - scale;
      double err = predicted_scaled - case_rows[i].spl_db;
      sq += err * err;
    }
    CaseValidation cv;
    cv.aoa_deg = in.aoa_deg;
    cv.chord_m = in.chord_m;
    cv.velocity_ms = in.velocity_ms;
    cv.rows = case_rows.size();
    cv.rmse_db = std::sqrt(sq / case_rows.size());
    out.push_back(cv);
  }
  return out;
}

}  // namespace aeroforge::acoustics
