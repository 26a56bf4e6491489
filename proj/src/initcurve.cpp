#include "seamtrace/initcurve.hpp"

#include "seamtrace/error.hpp"
#include "seamtrace/spline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace seamtrace {

// -----------------------------------------------------------------------------
// Curve
// -----------------------------------------------------------------------------

Curve::Curve(std::vector<Vec2> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw Error(Stage::InitCurve, "curve needs at least 2 points");
    arc_.reserve(points_.size());
    arc_.push_back(0.0);
    for (size_t k = 0; k < points_.size(); ++k) {
        if (!std::isfinite(points_[k].x) || !std::isfinite(points_[k].y)) {
            throw Error(Stage::InitCurve, "curve contains a non-finite point");
        }
        if (k == 0) continue;
        const double step = distance(points_[k - 1], points_[k]);
        if (!(step > 0.0)) throw Error(Stage::InitCurve, "curve contains a zero-length step");
        arc_.push_back(arc_.back() + step);
    }
}

Vec2 Curve::point_at(double s) const {
    if (s <= 0.0) return points_.front();
    if (s >= arc_.back()) return points_.back();
    const auto it = std::upper_bound(arc_.begin(), arc_.end(), s);
    const size_t k = static_cast<size_t>(it - arc_.begin()) - 1;
    const double f = (s - arc_[k]) / (arc_[k + 1] - arc_[k]);
    return points_[k] + (points_[k + 1] - points_[k]) * f;
}

std::vector<Vec2> dedupe_consecutive(std::span<const Vec2> points) {
    std::vector<Vec2> out;
    out.reserve(points.size());
    for (const Vec2& p : points) {
        if (out.empty() || !(out.back() == p)) out.push_back(p);
    }
    return out;
}

// -----------------------------------------------------------------------------
// Annotation
// -----------------------------------------------------------------------------

Bbox default_bbox(std::span<const Vec2> points) {
    double x0 = points.front().x, x1 = x0, y0 = points.front().y, y1 = y0;
    for (const Vec2& p : points) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    const double w = x1 - x0;
    const double h = y1 - y0;
    return {x0 - 0.1 * w, y0 - 0.1 * h, 1.2 * w, 1.2 * h};
}

namespace {

double finite_number(const nlohmann::json& v, const char* key) {
    if (!v.is_number()) throw Error(Stage::InitCurve, std::string("annotation: '") + key + "' must hold numbers");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw Error(Stage::InitCurve, std::string("annotation: non-finite coordinate in '") + key + "'");
    return d;
}

Vec2 read_point(const nlohmann::json& v, const char* key) {
    if (!v.is_array() || v.size() != 2) {
        throw Error(Stage::InitCurve, std::string("annotation: '") + key + "' entries must be [x, y]");
    }
    return {finite_number(v[0], key), finite_number(v[1], key)};
}

std::vector<Vec2> read_points(const nlohmann::json& v, const char* key) {
    if (!v.is_array()) throw Error(Stage::InitCurve, std::string("annotation: '") + key + "' must be an array");
    std::vector<Vec2> out;
    out.reserve(v.size());
    for (const auto& p : v) out.push_back(read_point(p, key));
    return out;
}

nlohmann::json write_points(std::span<const Vec2> points) {
    auto arr = nlohmann::json::array();
    for (const Vec2& p : points) arr.push_back({p.x, p.y});
    return arr;
}

}  // namespace

Annotation annotation_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(Stage::InitCurve, "annotation must be a JSON object");
    if (!j.contains("landmarks")) throw Error(Stage::InitCurve, "no initial curve source: annotation has no landmarks");

    Annotation ann;
    ann.landmarks = read_points(j.at("landmarks"), "landmarks");
    if (ann.landmarks.empty()) throw Error(Stage::InitCurve, "no initial curve source: annotation has no landmarks");
    if (ann.landmarks.size() < 2) {
        throw Error(Stage::InitCurve, "annotation needs at least 2 landmarks, got " + std::to_string(ann.landmarks.size()));
    }
    if (j.contains("contour")) ann.contour = read_points(j.at("contour"), "contour");
    if (j.contains("initial")) {
        ann.initial = read_points(j.at("initial"), "initial");
        if (ann.initial->size() < 2) throw Error(Stage::InitCurve, "annotation: 'initial' needs at least 2 points");
    }
    if (j.contains("left_eye")) ann.left_eye = read_point(j.at("left_eye"), "left_eye");
    if (j.contains("right_eye")) ann.right_eye = read_point(j.at("right_eye"), "right_eye");
    if (ann.left_eye && ann.right_eye && distance(*ann.left_eye, *ann.right_eye) <= 0.0) {
        throw Error(Stage::InitCurve, "annotation: eye points coincide");
    }
    if (j.contains("bbox")) {
        const auto& b = j.at("bbox");
        if (!b.is_array() || b.size() != 4) throw Error(Stage::InitCurve, "annotation: 'bbox' must be [x, y, w, h]");
        ann.bbox = {finite_number(b[0], "bbox"), finite_number(b[1], "bbox"), finite_number(b[2], "bbox"),
                    finite_number(b[3], "bbox")};
    } else {
        ann.bbox = default_bbox(ann.landmarks);
    }
    return ann;
}

Annotation parse_annotation(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Stage::Io, "cannot open annotation " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Stage::InitCurve, "annotation " + path.string() + ": " + e.what());
    }
    return annotation_from_json(j);
}

nlohmann::json annotation_to_json(const Annotation& ann) {
    nlohmann::json j;
    j["landmarks"] = write_points(ann.landmarks);
    if (ann.contour) j["contour"] = write_points(*ann.contour);
    if (ann.initial) j["initial"] = write_points(*ann.initial);
    if (ann.left_eye) j["left_eye"] = {ann.left_eye->x, ann.left_eye->y};
    if (ann.right_eye) j["right_eye"] = {ann.right_eye->x, ann.right_eye->y};
    j["bbox"] = {ann.bbox.x, ann.bbox.y, ann.bbox.w, ann.bbox.h};
    return j;
}

// -----------------------------------------------------------------------------
// Spline fit
// -----------------------------------------------------------------------------

Curve fit_initial_curve(std::span<const Vec2> landmarks) {
    if (landmarks.size() < 2) throw Error(Stage::InitCurve, "need at least 2 landmarks to fit a curve");
    std::vector<double> t(landmarks.size()), xs(landmarks.size()), ys(landmarks.size());
    t[0] = 0.0;
    for (size_t k = 0; k < landmarks.size(); ++k) {
        xs[k] = landmarks[k].x;
        ys[k] = landmarks[k].y;
        if (k == 0) continue;
        const double chord = distance(landmarks[k - 1], landmarks[k]);
        if (!(chord > 0.0)) {
            throw Error(Stage::InitCurve, "duplicate consecutive landmarks at index " + std::to_string(k));
        }
        t[k] = t[k - 1] + chord;
    }
    const NaturalSpline sx(t, xs);
    const NaturalSpline sy(t, ys);
    auto eval = [&](double u) { return Vec2{sx(u), sy(u)}; };

    std::vector<Vec2> out{landmarks.front()};
    for (size_t k = 0; k + 1 < landmarks.size(); ++k) {
        const double t0 = t[k];
        const double t1 = t[k + 1];
        // Refine until every step on this interval is at most 1 px.
        int steps = std::max(1, static_cast<int>(std::ceil(t1 - t0)));
        std::vector<Vec2> piece;
        for (;;) {
            piece.clear();
            bool ok = true;
            Vec2 prev = landmarks[k];
            for (int s = 1; s <= steps; ++s) {
                const Vec2 p = s == steps ? landmarks[k + 1] : eval(t0 + (t1 - t0) * s / steps);
                if (distance(prev, p) > 1.0) ok = false;
                piece.push_back(p);
                prev = p;
            }
            if (ok) break;
            steps *= 2;
        }
        for (const Vec2& p : piece) {
            if (!(p == out.back())) out.push_back(p);
        }
    }
    return Curve(std::move(out));
}

// -----------------------------------------------------------------------------
// Square sampling
// -----------------------------------------------------------------------------

int square_side(double size_factor, const Bbox& bbox) {
    if (!(size_factor > 0.0)) throw Error(Stage::InitCurve, "square size factor must be positive");
    const double side = std::round(size_factor * std::max(bbox.w, bbox.h));
    if (!(side >= 8.0)) {
        throw Error(Stage::InitCurve, "square side " + std::to_string(side) + " px is below the minimum of 8");
    }
    return static_cast<int>(side);
}

double tangent_angle_at(const Curve& curve, double s) {
    const double len = curve.length();
    const double a = std::max(0.0, s - 1.0);
    const double b = std::min(len, s + 1.0);
    const Vec2 d = curve.point_at(b) - curve.point_at(a);
    return std::atan2(d.y, d.x);
}

std::vector<SquareSpec> sample_squares(const Curve& curve, int count, double size_factor,
                                       const Bbox& bbox) {
    if (count < 2) throw Error(Stage::InitCurve, "square count must be at least 2");
    const double len = curve.length();
    if (!(len > 0.0)) throw Error(Stage::InitCurve, "degenerate initial curve (zero arc length)");
    const int side = square_side(size_factor, bbox);

    std::vector<SquareSpec> squares;
    squares.reserve(static_cast<size_t>(count));
    for (int k = 0; k < count; ++k) {
        const double s = len * k / (count - 1);
        squares.push_back({curve.point_at(s), tangent_angle_at(curve, s), side, k});
    }
    return squares;
}

}  // namespace seamtrace
