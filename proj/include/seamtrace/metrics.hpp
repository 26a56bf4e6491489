/**
 * @file metrics.hpp
 * @brief Contour evaluation: dense and sparse mean errors, landmark
 *        conversions, cumulative error tables and the local parabola-fit
 *        study over ground-truth curves.
 */
#pragma once

#include "seamtrace/geometry.hpp"
#include "seamtrace/initcurve.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"

namespace seamtrace {

struct MetricsReport {
    double dme = 0.0;
    std::optional<double> sme;
    double normalizer = 1.0;
    std::vector<double> nearest_distances;  // pixels, one per estimated point
    std::optional<double> runtime_ms;
};

nlohmann::json report_to_json(const MetricsReport& report);

/// Eye-centre distance; throws when an eye is missing.
double interocular(const Annotation& ann);

/// Distance from p to the nearest segment of a polyline (or its only vertex).
double polyline_distance(Vec2 p, std::span<const Vec2> polyline);

/// Per-point nearest distances from `estimated` to the `truth` polyline.
std::vector<double> nearest_distances(std::span<const Vec2> estimated, std::span<const Vec2> truth);

/// Mean point-to-polyline distance divided by `normalizer`.
double dme(std::span<const Vec2> estimated, std::span<const Vec2> truth, double normalizer);
double dme(const Curve& estimated, const Curve& truth, double normalizer);

/// Mean distance of index-matched pairs divided by `normalizer`.
double sme(std::span<const Vec2> estimated, std::span<const Vec2> truth, double normalizer);

/// n points at uniform arc-length fractions 0, 1/(n-1), ..., 1.
std::vector<Vec2> curve_to_landmarks(const Curve& curve, int n);

/// Same construction as the initial-curve spline.
Curve landmarks_to_curve(std::span<const Vec2> landmarks);

/// (threshold, fraction of errors <= threshold) per threshold.
std::vector<std::pair<double, double>> ced(std::span<const double> errors, std::span<const double> thresholds);

// --- Local parabola-fit study ----------------------------------------------

struct StudyConfig {
    int square_count = 50;
    double size_factor = 0.2;
    double bin_width = 0.01;
    int bin_count = 20;
    /// Resampling step for truth curves before clipping, px.
    double resample_step = 0.5;
};

struct StudySample {
    Curve truth;
    Bbox bbox;
};

struct StudyResult {
    std::vector<double> errors;  // RMS residual / side, one per usable square
    std::vector<double> bin_edges;  // bin_count + 1 edges; last bin also collects overflow
    std::vector<double> histogram;  // fraction per bin
    std::vector<double> cumulative;
    int skipped = 0;  // squares with fewer than 3 distinct rows inside

    double fraction_within(double threshold) const;
};

/// Fit error of one square: the truth run through the centre, expressed in the
/// square's tangent frame, fitted with j(i) quadratic; RMS residual / side.
std::optional<double> square_fit_error(const Curve& truth, Vec2 center, double tangent_angle, int side,
                                       double resample_step);

StudyResult parabola_fit_study(std::span<const StudySample> samples, const StudyConfig& config);

}  // namespace seamtrace
