/**
 * @file initcurve.hpp
 * @brief Annotations, polyline curves, spline fitting and square sampling
 *        along the initial guess curve.
 */
#pragma once

#include "seamtrace/geometry.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace seamtrace {

/// Ordered polyline with cumulative arc lengths.
class Curve {
public:
    /// Throws unless there are at least 2 finite points and no zero-length step.
    explicit Curve(std::vector<Vec2> points);

    const std::vector<Vec2>& points() const { return points_; }
    const std::vector<double>& arc_lengths() const { return arc_; }
    size_t size() const { return points_.size(); }
    double length() const { return arc_.back(); }

    /// Point at arc length s, clamped to [0, length()].
    Vec2 point_at(double s) const;

private:
    std::vector<Vec2> points_;
    std::vector<double> arc_;
};

/// Drops consecutive duplicates so the result is a valid Curve input.
std::vector<Vec2> dedupe_consecutive(std::span<const Vec2> points);

struct Annotation {
    std::vector<Vec2> landmarks;
    std::optional<std::vector<Vec2>> contour;
    std::optional<Vec2> left_eye;
    std::optional<Vec2> right_eye;
    Bbox bbox;
    /// Optional initial-guess landmarks; when absent, `landmarks` seed the curve.
    std::optional<std::vector<Vec2>> initial;

    const std::vector<Vec2>& initial_source() const { return initial ? *initial : landmarks; }
};

/// Landmark extent expanded by 10% on each side.
Bbox default_bbox(std::span<const Vec2> points);

Annotation parse_annotation(const std::filesystem::path& path);
Annotation annotation_from_json(const nlohmann::json& j);
nlohmann::json annotation_to_json(const Annotation& ann);

/// Natural cubic spline through the points (chord-length parameter),
/// densified so consecutive output points are at most 1 px apart.
Curve fit_initial_curve(std::span<const Vec2> landmarks);

struct SquareSpec {
    Vec2 center;
    double tangent_angle = 0.0;  // atan2 of the curve tangent
    int side = 0;
    int order_index = 0;

    /// Patch rotation that makes patch rows advance along the tangent.
    double patch_angle() const { return tangent_angle - kPi / 2.0; }
};

/// side = round(size_factor * max(bbox.w, bbox.h)); throws when below 8.
int square_side(double size_factor, const Bbox& bbox);

/// `count` squares at equal arc-length spacing, endpoints included.
std::vector<SquareSpec> sample_squares(const Curve& curve, int count, double size_factor,
                                       const Bbox& bbox);

/// Tangent angle at arc length s from a +-1 px difference (one-sided at ends).
double tangent_angle_at(const Curve& curve, double s);

}  // namespace seamtrace
