#include "seamtrace/metrics.hpp"

#include "seamtrace/error.hpp"
#include "seamtrace/imggrid.hpp"
#include "seamtrace/seamcut.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace seamtrace {

nlohmann::json report_to_json(const MetricsReport& report) {
    nlohmann::json j;
    j["dme"] = report.dme;
    j["sme"] = report.sme ? nlohmann::json(*report.sme) : nlohmann::json(nullptr);
    j["normalizer"] = report.normalizer;
    j["nearest_distances"] = report.nearest_distances;
    if (report.runtime_ms) j["runtime_ms"] = *report.runtime_ms;
    return j;
}

double interocular(const Annotation& ann) {
    if (!ann.left_eye || !ann.right_eye) {
        throw Error(Stage::Metrics, "missing eye annotations; supply an explicit normalizer");
    }
    const double d = distance(*ann.left_eye, *ann.right_eye);
    if (!(d > 0.0)) throw Error(Stage::Metrics, "eye points coincide");
    return d;
}

double polyline_distance(Vec2 p, std::span<const Vec2> polyline) {
    if (polyline.empty()) throw Error(Stage::Metrics, "empty polyline");
    if (polyline.size() == 1) return distance(p, polyline.front());
    double best = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k + 1 < polyline.size(); ++k) {
        best = std::min(best, point_segment_distance(p, polyline[k], polyline[k + 1]));
    }
    return best;
}

std::vector<double> nearest_distances(std::span<const Vec2> estimated, std::span<const Vec2> truth) {
    std::vector<double> out;
    out.reserve(estimated.size());
    for (const Vec2& p : estimated) out.push_back(polyline_distance(p, truth));
    return out;
}

namespace {

void check_normalizer(double normalizer) {
    if (!(normalizer > 0.0) || !std::isfinite(normalizer)) throw Error(Stage::Metrics, "normalizer must be positive");
}

}  // namespace

double dme(std::span<const Vec2> estimated, std::span<const Vec2> truth, double normalizer) {
    check_normalizer(normalizer);
    if (estimated.empty() || truth.empty()) throw Error(Stage::Metrics, "dme needs non-empty curves");
    double sum = 0.0;
    for (double d : nearest_distances(estimated, truth)) sum += d;
    return sum / static_cast<double>(estimated.size()) / normalizer;
}

double dme(const Curve& estimated, const Curve& truth, double normalizer) {
    return dme(estimated.points(), truth.points(), normalizer);
}

double sme(std::span<const Vec2> estimated, std::span<const Vec2> truth, double normalizer) {
    check_normalizer(normalizer);
    if (estimated.size() != truth.size()) {
        throw Error(Stage::Metrics, "landmark count mismatch: " + std::to_string(estimated.size()) + " vs " +
                                        std::to_string(truth.size()));
    }
    if (estimated.empty()) throw Error(Stage::Metrics, "sme needs at least one landmark");
    double sum = 0.0;
    for (size_t k = 0; k < estimated.size(); ++k) sum += distance(estimated[k], truth[k]);
    return sum / static_cast<double>(estimated.size()) / normalizer;
}

std::vector<Vec2> curve_to_landmarks(const Curve& curve, int n) {
    if (n < 2) throw Error(Stage::Metrics, "need at least 2 landmarks");
    if (!(curve.length() > 0.0)) throw Error(Stage::Metrics, "degenerate curve");
    std::vector<Vec2> out;
    out.reserve(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) out.push_back(curve.point_at(curve.length() * k / (n - 1)));
    return out;
}

Curve landmarks_to_curve(std::span<const Vec2> landmarks) {
    return fit_initial_curve(landmarks);
}

std::vector<std::pair<double, double>> ced(std::span<const double> errors, std::span<const double> thresholds) {
    if (errors.empty()) throw Error(Stage::Metrics, "ced needs at least one error value");
    std::vector<double> sorted(errors.begin(), errors.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<double, double>> out;
    out.reserve(thresholds.size());
    for (double t : thresholds) {
        const auto count = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
        out.emplace_back(t, static_cast<double>(count) / static_cast<double>(sorted.size()));
    }
    return out;
}

// -----------------------------------------------------------------------------
// Parabola-fit study
// -----------------------------------------------------------------------------

double StudyResult::fraction_within(double threshold) const {
    if (errors.empty()) return 0.0;
    const auto n = std::count_if(errors.begin(), errors.end(), [&](double e) { return e <= threshold; });
    return static_cast<double>(n) / static_cast<double>(errors.size());
}

std::optional<double> square_fit_error(const Curve& truth, Vec2 center, double tangent_angle, int side,
                                       double resample_step) {
    const PatchFrame frame{side, center, tangent_angle - kPi / 2.0};
    const double hi = side - 1.0;
    const int steps = std::max(1, static_cast<int>(std::ceil(truth.length() / resample_step)));

    // Walk the resampled truth, keeping the inside run closest to the centre.
    std::vector<RowCol> run;
    std::vector<RowCol> best_run;
    double best_center_dist = std::numeric_limits<double>::infinity();
    double run_center_dist = std::numeric_limits<double>::infinity();
    auto close_run = [&] {
        if (!run.empty() && run_center_dist < best_center_dist) {
            best_run = run;
            best_center_dist = run_center_dist;
        }
        run.clear();
        run_center_dist = std::numeric_limits<double>::infinity();
    };
    for (int s = 0; s <= steps; ++s) {
        const Vec2 g = truth.point_at(truth.length() * s / steps);
        const Vec2 p = frame.to_patch(g);  // x = j, y = i
        if (p.x >= 0.0 && p.x <= hi && p.y >= 0.0 && p.y <= hi) {
            run.push_back({p.y, p.x});
            run_center_dist = std::min(run_center_dist, distance(g, center));
        } else {
            close_run();
        }
    }
    close_run();

    if (best_run.size() < 3) return std::nullopt;
    Parabola fit;
    try {
        fit = fit_parabola(best_run);
    } catch (const Error&) {
        return std::nullopt;
    }
    double ss = 0.0;
    for (const RowCol& p : best_run) {
        const double r = p.j - fit(p.i);
        ss += r * r;
    }
    return std::sqrt(ss / static_cast<double>(best_run.size())) / side;
}

StudyResult parabola_fit_study(std::span<const StudySample> samples, const StudyConfig& config) {
    if (config.bin_count < 1 || !(config.bin_width > 0.0)) throw Error(Stage::Metrics, "invalid histogram bins");
    StudyResult result;
    for (const StudySample& sample : samples) {
        const auto squares = sample_squares(sample.truth, config.square_count, config.size_factor, sample.bbox);
        for (const SquareSpec& sq : squares) {
            const auto err = square_fit_error(sample.truth, sq.center, sq.tangent_angle, sq.side, config.resample_step);
            if (err) {
                result.errors.push_back(*err);
            } else {
                ++result.skipped;
            }
        }
    }

    result.bin_edges.resize(static_cast<size_t>(config.bin_count) + 1);
    for (int b = 0; b <= config.bin_count; ++b) result.bin_edges[static_cast<size_t>(b)] = b * config.bin_width;
    result.histogram.assign(static_cast<size_t>(config.bin_count), 0.0);
    result.cumulative.assign(static_cast<size_t>(config.bin_count), 0.0);
    if (result.errors.empty()) return result;

    const double total = static_cast<double>(result.errors.size());
    std::vector<long> counts(static_cast<size_t>(config.bin_count), 0);
    for (double e : result.errors) {
        auto b = static_cast<long>(std::floor(e / config.bin_width));
        b = std::clamp(b, 0L, static_cast<long>(config.bin_count) - 1);
        ++counts[static_cast<size_t>(b)];
    }
    for (size_t b = 0; b < counts.size(); ++b) result.histogram[b] = static_cast<double>(counts[b]) / total;
    // cumulative[b] counts errors <= the upper edge of bin b (overflow lands in the last bin).
    for (int b = 0; b < config.bin_count; ++b) {
        result.cumulative[static_cast<size_t>(b)] =
            b + 1 == config.bin_count ? 1.0 : result.fraction_within(result.bin_edges[static_cast<size_t>(b) + 1]);
    }
    return result;
}

}  // namespace seamtrace
