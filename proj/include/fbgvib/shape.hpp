#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace fbgvib::shape {

inline constexpr std::size_t kActiveAreas = 3;
inline constexpr double kBandMinNm = 1510.0;
inline constexpr double kBandMaxNm = 1590.0;
inline constexpr double kDefaultBaseWavelengthNm = 1535.3;
inline constexpr double kDefaultSensitivityNmPerInvM = 13.0;

// Linear wavelength-curvature map per active area:
// lambda = base_wavelength_nm + sensitivity_nm_per_invm * kappa.
struct CalibrationModel {
    struct Area {
        double base_wavelength_nm = kDefaultBaseWavelengthNm;
        double sensitivity_nm_per_invm = kDefaultSensitivityNmPerInvM;
    };
    std::vector<Area> areas = std::vector<Area>(kActiveAreas);

    void validate() const;
};

struct CmGeometry {
    double length_mm = 35.0;
    std::array<double, kActiveAreas> aa_positions_mm{8.75, 17.5, 26.25};
    double od_mm = 6.0;
    double id_mm = 4.0;
    double channel_d_mm = 0.5;

    void validate() const;
    // Arc-length boundaries of the constant-curvature segments: 0, midpoints
    // between consecutive active areas, length.
    std::array<double, kActiveAreas + 1> segment_boundaries_mm() const;
};

struct Point2 {
    double x_mm = 0.0;  // lateral, in the bending plane
    double z_mm = 0.0;  // along the straight axis
};

struct CenterlinePoint {
    double s_mm = 0.0;
    Point2 p;
};

struct ShapeEstimate {
    std::array<double, kActiveAreas> curvature_invm{};
    std::vector<CenterlinePoint> centerline;
    Point2 tip;

    double polyline_length_mm() const;
};

// kappa_i = (lambda_i - base_i) / sensitivity_i. Throws MeasurementError for a
// reading outside the interrogator band and DomainError on a count mismatch.
std::vector<double> wavelength_to_curvature(std::span<const double> wavelengths_nm,
                                            const CalibrationModel& calib);

// Inverse map, used by the simulator and the round-trip checks.
std::vector<double> curvature_to_wavelength(std::span<const double> curvatures_invm,
                                            const CalibrationModel& calib);

// Displacement of a circular arc of length s and curvature kappa (1/mm) in its
// own frame: lateral (1 - cos ks)/k, axial sin(ks)/k, with series forms near
// kappa = 0.
Point2 arc_displacement(double kappa_per_mm, double s_mm);

// Planar piecewise-constant-curvature reconstruction.
ShapeEstimate reconstruct(std::span<const double> curvatures_invm, const CmGeometry& geometry = {});

struct CalibrationSample {
    std::vector<double> wavelengths_nm;
    double curvature_invm = 0.0;
};

struct CalibrationFit {
    CalibrationModel model;
    std::vector<double> residual_rms_nm;
};

// Least-squares line per active area. Throws FitError when an area sees fewer
// than two distinct curvature levels.
CalibrationFit fit_calibration(std::span<const CalibrationSample> samples);

}  // namespace fbgvib::shape
