#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "aeroforge/domain.hpp"

namespace aeroforge::acoustics {

struct AirProperties {
  double density_kg_m3 = 1.225;
  double speed_of_sound_ms = 340.46;
  double kinematic_viscosity_m2_s = 1.4529e-5;
};

/// Semi-empirical trailing-edge self-noise mechanisms.
enum class Mechanism { kTblTe, kSeparation, kLblVs, kBluntness, kTipVortex };

std::string mechanism_name(Mechanism m);

/// Boundary-layer state at the trailing edge for one side of the airfoil.
struct BoundaryLayer {
  double delta_m = 0.0;       // thickness
  double delta_star_m = 0.0;  // displacement thickness
  double theta_m = 0.0;       // momentum thickness
};

struct BoundaryLayerPair {
  BoundaryLayer suction;
  BoundaryLayer pressure;
};

/// Trailing-edge boundary-layer correlations (flat-plate fits with angle of
/// attack corrections), tripped or natural transition.
BoundaryLayerPair boundary_layer(double re_c, double aoa_deg, bool tripped, double chord_m);

struct BpmInput {
  double chord_m = 0.1;
  double span_m = 0.2;
  double velocity_ms = 25.0;
  double aoa_deg = 0.0;
  double delta_star_suction_m = 0.0;
  double delta_star_pressure_m = 0.0;
  double delta_pressure_m = 0.0;  // pressure-side BL thickness (laminar shedding)
  double observer_distance_m = 1.0;
  double observer_theta_deg = 90.0;  // from downstream chord line
  double observer_phi_deg = 90.0;    // from the airfoil plane
  bool tripped = false;
  double te_bluntness_m = 0.0;   // trailing-edge thickness h
  double te_angle_deg = 14.0;    // solid angle psi between surfaces at the TE
  double tip_aoa_deg = 0.0;
  bool rounded_tip = false;
  AirProperties air;
};

/// Fills the boundary-layer fields from the correlations; any field already
/// positive is kept (workspace-extracted values take precedence).
BpmInput with_boundary_layer(BpmInput in);

struct Spectrum {
  std::vector<double> frequencies_hz;
  std::map<Mechanism, std::vector<double>> per_mechanism_db;
  std::vector<double> total_db;
};

inline const std::set<Mechanism> kDefaultMechanisms{Mechanism::kTblTe, Mechanism::kSeparation,
                                                    Mechanism::kLblVs};
inline const std::set<Mechanism> kAllMechanisms{Mechanism::kTblTe, Mechanism::kSeparation,
                                                Mechanism::kLblVs, Mechanism::kBluntness,
                                                Mechanism::kTipVortex};

/// One-third-octave SPL spectrum at the given band centers. The total is the
/// energetic sum over the selected mechanisms. Throws on an empty mechanism
/// set or Mach >= 0.3.
Spectrum spl_spectrum(const BpmInput& input, const std::set<Mechanism>& mechanisms,
                      const std::vector<double>& frequencies_hz);

/// Energetic sum of band levels.
double oaspl(const std::vector<double>& levels_db);

double a_weighting_db(double frequency_hz);
double c_weighting_db(double frequency_hz);
double oaspl_weighted(const std::vector<double>& frequencies_hz,
                      const std::vector<double>& levels_db, double (*weighting)(double));

/// High- and low-frequency trailing-edge directivity, normalized to 1 at the
/// perpendicular observer (theta = phi = 90 deg).
double directivity_high(double theta_deg, double phi_deg, double mach, double mach_convection);
double directivity_low(double theta_deg, double phi_deg, double mach);

struct DirectivityPoint {
  double theta_deg = 0.0;
  double relative_db = 0.0;
};

/// Total-OASPL directivity pattern over a theta grid at fixed phi, in dB
/// relative to the perpendicular observer.
std::vector<DirectivityPoint> directivity_pattern(const BpmInput& input,
                                                  const std::set<Mechanism>& mechanisms,
                                                  const std::vector<double>& frequencies_hz,
                                                  const std::vector<double>& theta_grid_deg);

/// Preferred (base-10) one-third-octave band centers covering [fmin, fmax].
std::vector<double> third_octave_centers(double fmin_hz, double fmax_hz);

/// Default analysis band per the working configuration.
inline constexpr double kDefaultBandMin = 100.0;
inline constexpr double kDefaultBandMax = 10000.0;

/// Band levels from a narrowband density spectrum (levels in dB per Hz):
/// integrates energy across each band. Throws if a requested band is not
/// covered by the input grid.
std::vector<domain::ThirdOctaveBand> third_octave_from_psd(const std::vector<double>& frequencies_hz,
                                                           const std::vector<double>& psd_db_hz,
                                                           double fmin_hz, double fmax_hz);

/// Band levels from an already band-valued spectrum: log-frequency linear
/// interpolation at the standard centers.
std::vector<domain::ThirdOctaveBand> third_octave_from_bands(
    const std::vector<double>& frequencies_hz, const std::vector<double>& levels_db, double fmin_hz,
    double fmax_hz);

/// Bandwidth of the one-third-octave band centered at fc.
double third_octave_bandwidth(double fc_hz);

// ---- public airfoil self-noise dataset ----

struct DatasetRow {
  double frequency_hz = 0.0;
  double aoa_deg = 0.0;
  double chord_m = 0.0;
  double velocity_ms = 0.0;
  double delta_star_suction_m = 0.0;
  double spl_db = 0.0;  // scaled third-octave level as published
};

/// Whitespace-separated table: frequency, AoA, chord, velocity, suction-side
/// displacement thickness, scaled SPL.
std::vector<DatasetRow> load_self_noise_dataset(const std::filesystem::path& file);

struct CaseValidation {
  double aoa_deg = 0.0;
  double chord_m = 0.0;
  double velocity_ms = 0.0;
  std::size_t rows = 0;
  double rmse_db = 0.0;
};

/// Groups rows into measurement cases and computes the per-case RMSE between
/// the model prediction and the published levels over the overlapping band.
/// The dataset geometry is the benchmark rig: span 0.4572 m, observer at
/// 1.22 m perpendicular, tripped boundary layer, published levels scaled by the
/// suction-side displacement-thickness Mach-power normalization.
std::vector<CaseValidation> validate_against_dataset(const std::vector<DatasetRow>& rows);

/// Exposed spectral shape functions (unit-tested for branch continuity).
namespace detail {
double curve_a(double strouhal_ratio, double re_c);
double curve_a_prime(double strouhal_ratio, double re_c);
double curve_b(double strouhal_ratio, double re_c);
double lbl_g1(double e);
double lbl_g2(double d);
double lbl_g3(double aoa_deg);
double blunt_g5(double h_over_dstar, double eta);
double k1(double re_c);
double k2(double k1_value, double mach, double aoa_deg);
}  // namespace detail

}  // namespace aeroforge::acoustics
