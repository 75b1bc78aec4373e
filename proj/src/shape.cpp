#include "fbgvib/shape.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "fbgvib/error.hpp"

namespace fbgvib::shape {

namespace {

// Below this |kappa * s| the closed forms lose digits to cancellation.
constexpr double kSeriesLimit = 1e-4;

}  // namespace

void CalibrationModel::validate() const {
    if (areas.empty()) throw DomainError("calibration has no active areas");
    for (std::size_t i = 0; i < areas.size(); ++i) {
        const auto& a = areas[i];
        if (!std::isfinite(a.sensitivity_nm_per_invm) || a.sensitivity_nm_per_invm == 0.0) {
            throw DomainError("active area " + std::to_string(i) + ": sensitivity must be nonzero");
        }
        if (!(a.base_wavelength_nm >= kBandMinNm && a.base_wavelength_nm <= kBandMaxNm)) {
            throw DomainError("active area " + std::to_string(i) + ": base wavelength outside 1510-1590 nm");
        }
    }
}

void CmGeometry::validate() const {
    if (!(length_mm > 0.0)) throw DomainError("length must be positive");
    double prev = 0.0;
    for (double p : aa_positions_mm) {
        if (!(p > prev) || p > length_mm) {
            throw DomainError("active-area positions must increase strictly within (0, length]");
        }
        prev = p;
    }
    if (!(id_mm > 0.0) || !(od_mm > id_mm)) throw DomainError("need od > id > 0");
}

std::array<double, kActiveAreas + 1> CmGeometry::segment_boundaries_mm() const {
    std::array<double, kActiveAreas + 1> b{};
    b[0] = 0.0;
    for (std::size_t i = 1; i < kActiveAreas; ++i) b[i] = 0.5 * (aa_positions_mm[i - 1] + aa_positions_mm[i]);
    b[kActiveAreas] = length_mm;
    return b;
}

double ShapeEstimate::polyline_length_mm() const {
    double len = 0.0;
    for (std::size_t i = 1; i < centerline.size(); ++i) {
        len += std::hypot(centerline[i].p.x_mm - centerline[i - 1].p.x_mm,
                          centerline[i].p.z_mm - centerline[i - 1].p.z_mm);
    }
    return len;
}

std::vector<double> wavelength_to_curvature(std::span<const double> wavelengths_nm, const CalibrationModel& calib) {
    if (wavelengths_nm.size() != calib.areas.size()) {
        throw DomainError("expected " + std::to_string(calib.areas.size()) + " wavelengths, got " +
                          std::to_string(wavelengths_nm.size()));
    }
    std::vector<double> kappa(wavelengths_nm.size());
    for (std::size_t i = 0; i < wavelengths_nm.size(); ++i) {
        const double w = wavelengths_nm[i];
        if (!(w >= kBandMinNm && w <= kBandMaxNm)) {
            throw MeasurementError("active area " + std::to_string(i) + ": wavelength " + std::to_string(w) +
                                   " nm outside the interrogator band");
        }
        const auto& a = calib.areas[i];
        kappa[i] = (w - a.base_wavelength_nm) / a.sensitivity_nm_per_invm;
    }
    return kappa;
}

std::vector<double> curvature_to_wavelength(std::span<const double> curvatures_invm, const CalibrationModel& calib) {
    if (curvatures_invm.size() != calib.areas.size()) throw DomainError("curvature count mismatch");
    std::vector<double> w(curvatures_invm.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = calib.areas[i].base_wavelength_nm + calib.areas[i].sensitivity_nm_per_invm * curvatures_invm[i];
    }
    return w;
}

Point2 arc_displacement(double kappa_per_mm, double s_mm) {
    const double phi = kappa_per_mm * s_mm;
    if (std::abs(phi) < kSeriesLimit) {
        const double k2 = kappa_per_mm * kappa_per_mm;
        const double s2 = s_mm * s_mm;
        return {kappa_per_mm * s2 / 2.0 * (1.0 - k2 * s2 / 12.0), s_mm * (1.0 - k2 * s2 / 6.0 * (1.0 - k2 * s2 / 20.0))};
    }
    return {(1.0 - std::cos(phi)) / kappa_per_mm, std::sin(phi) / kappa_per_mm};
}

ShapeEstimate reconstruct(std::span<const double> curvatures_invm, const CmGeometry& geometry) {
    if (curvatures_invm.size() != kActiveAreas) {
        throw DomainError("reconstruction needs exactly " + std::to_string(kActiveAreas) + " curvatures");
    }
    geometry.validate();
    ShapeEstimate est;
    std::copy(curvatures_invm.begin(), curvatures_invm.end(), est.curvature_invm.begin());

    const auto bounds = geometry.segment_boundaries_mm();
    double theta = 0.0;
    Point2 origin;
    est.centerline.push_back({0.0, origin});
    for (std::size_t i = 0; i < kActiveAreas; ++i) {
        const double kappa = curvatures_invm[i] / 1000.0;  // 1/m -> 1/mm
        const double len = bounds[i + 1] - bounds[i];
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        // Chord error of a polyline step is ~ (k h)^2 / 24; 0.05 rad keeps it near 1e-4.
        const auto steps = std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(std::abs(kappa) * len / 0.05)));
        for (std::size_t j = 1; j <= steps; ++j) {
            const double sj = len * static_cast<double>(j) / static_cast<double>(steps);
            const Point2 d = arc_displacement(kappa, sj);
            const Point2 p{origin.x_mm + d.x_mm * c + d.z_mm * s, origin.z_mm - d.x_mm * s + d.z_mm * c};
            est.centerline.push_back({bounds[i] + sj, p});
        }
        origin = est.centerline.back().p;
        theta += kappa * len;
    }
    est.tip = origin;
    return est;
}

CalibrationFit fit_calibration(std::span<const CalibrationSample> samples) {
    if (samples.empty()) throw FitError("no calibration samples");
    const std::size_t areas = samples.front().wavelengths_nm.size();
    if (areas == 0) throw FitError("calibration samples carry no wavelengths");
    std::set<double> levels;
    for (const auto& s : samples) {
        if (s.wavelengths_nm.size() != areas) throw DomainError("calibration samples differ in active-area count");
        levels.insert(s.curvature_invm);
    }
    if (levels.size() < 2) throw FitError("need at least two distinct curvature levels");

    const double n = static_cast<double>(samples.size());
    double mean_k = 0.0;
    for (const auto& s : samples) mean_k += s.curvature_invm;
    mean_k /= n;
    double sxx = 0.0;
    for (const auto& s : samples) sxx += (s.curvature_invm - mean_k) * (s.curvature_invm - mean_k);

    CalibrationFit fit;
    fit.model.areas.resize(areas);
    fit.residual_rms_nm.resize(areas);
    for (std::size_t a = 0; a < areas; ++a) {
        double mean_w = 0.0;
        for (const auto& s : samples) mean_w += s.wavelengths_nm[a];
        mean_w /= n;
        double sxy = 0.0;
        for (const auto& s : samples) sxy += (s.curvature_invm - mean_k) * (s.wavelengths_nm[a] - mean_w);
        const double slope = sxy / sxx;
        if (slope == 0.0 || !std::isfinite(slope)) {
            throw FitError("active area " + std::to_string(a) + ": zero sensitivity");
        }
        const double intercept = mean_w - slope * mean_k;
        double ss = 0.0;
        for (const auto& s : samples) {
            const double r = s.wavelengths_nm[a] - (intercept + slope * s.curvature_invm);
            ss += r * r;
        }
        fit.model.areas[a] = {intercept, slope};
        fit.residual_rms_nm[a] = std::sqrt(ss / n);
    }
    return fit;
}

}  // namespace fbgvib::shape
