#include "seamtrace/pipeline.hpp"

#include "seamtrace/error.hpp"
#include "seamtrace/parallel.hpp"

#include <cmath>
#include <limits>

namespace seamtrace {

// -----------------------------------------------------------------------------
// Config
// -----------------------------------------------------------------------------

void Config::validate() const {
    auto fail = [](const std::string& msg) { throw Error(Stage::Config, msg); };
    if (square_count < 2) fail("square_count must be at least 2");
    if (!(square_size_factor > 0.0)) fail("square_size_factor must be positive");
    if (!(alpha >= 0.0 && alpha <= 1.0)) fail("alpha must lie in [0, 1]");
    if (window < 3) fail("window must be at least 3");
    if (!(d_norm > 0.0)) fail("d_norm must be positive");
    if (!(h > 0.0)) fail("h must be positive");
    if (K < 1) fail("K must be at least 1");
    if (normalizer && !(*normalizer > 0.0)) fail("normalizer must be positive");
}

GuidedOptions Config::guided() const {
    return {alpha, window, d_norm, alpha_weighting, distance_mode};
}

nlohmann::json config_to_json(const Config& cfg) {
    nlohmann::json j;
    j["square_count"] = cfg.square_count;
    j["square_size_factor"] = cfg.square_size_factor;
    j["alpha"] = cfg.alpha;
    j["window"] = cfg.window;
    j["d_norm"] = cfg.d_norm;
    j["h"] = cfg.h;
    j["K"] = cfg.K;
    j["score_variant"] = cfg.score_variant == ScoreVariant::Corrected ? "corrected" : "paper-literal";
    j["alpha_weighting"] = cfg.alpha_weighting == AlphaWeighting::Blend ? "eq4" : "eq5-literal";
    j["distance_mode"] = cfg.distance_mode == DistanceMode::Vertical ? "vertical" : "nearest";
    j["knn_pool"] = cfg.knn_pool == NeighbourPool::Unvisited ? "unvisited" : "all";
    j["trim_to_initial"] = cfg.trim_to_initial;
    j["normalizer"] = cfg.normalizer ? nlohmann::json(*cfg.normalizer) : nlohmann::json(nullptr);
    return j;
}

Config config_from_json(const nlohmann::json& j, Config cfg) {
    if (!j.is_object()) throw Error(Stage::Config, "config must be a JSON object");
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "square_count") cfg.square_count = v.get<int>();
            else if (key == "square_size_factor") cfg.square_size_factor = v.get<double>();
            else if (key == "alpha") cfg.alpha = v.get<double>();
            else if (key == "window") cfg.window = v.get<int>();
            else if (key == "d_norm") cfg.d_norm = v.get<double>();
            else if (key == "h") cfg.h = v.get<double>();
            else if (key == "K") cfg.K = v.get<int>();
            else if (key == "trim_to_initial") cfg.trim_to_initial = v.get<bool>();
            else if (key == "normalizer") {
                cfg.normalizer = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
            } else if (key == "score_variant") {
                const auto s = v.get<std::string>();
                if (s == "corrected") cfg.score_variant = ScoreVariant::Corrected;
                else if (s == "paper-literal") cfg.score_variant = ScoreVariant::Literal;
                else throw Error(Stage::Config, "score_variant must be 'corrected' or 'paper-literal'");
            } else if (key == "alpha_weighting") {
                const auto s = v.get<std::string>();
                if (s == "eq4") cfg.alpha_weighting = AlphaWeighting::Blend;
                else if (s == "eq5-literal") cfg.alpha_weighting = AlphaWeighting::Additive;
                else throw Error(Stage::Config, "alpha_weighting must be 'eq4' or 'eq5-literal'");
            } else if (key == "distance_mode") {
                const auto s = v.get<std::string>();
                if (s == "vertical") cfg.distance_mode = DistanceMode::Vertical;
                else if (s == "nearest") cfg.distance_mode = DistanceMode::Nearest;
                else throw Error(Stage::Config, "distance_mode must be 'vertical' or 'nearest'");
            } else if (key == "knn_pool") {
                const auto s = v.get<std::string>();
                if (s == "unvisited") cfg.knn_pool = NeighbourPool::Unvisited;
                else if (s == "all") cfg.knn_pool = NeighbourPool::All;
                else throw Error(Stage::Config, "knn_pool must be 'unvisited' or 'all'");
            } else {
                throw Error(Stage::Config, "unknown config key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Stage::Config, std::string("config: ") + e.what());
    }
    return cfg;
}

void set_config_value(Config& cfg, const std::string& key, double value) {
    auto as_int = [&]() {
        if (value != std::floor(value)) throw Error(Stage::Config, key + " takes integer values");
        return static_cast<int>(value);
    };
    if (key == "square_count") cfg.square_count = as_int();
    else if (key == "square_size_factor") cfg.square_size_factor = value;
    else if (key == "alpha") cfg.alpha = value;
    else if (key == "window") cfg.window = as_int();
    else if (key == "d_norm") cfg.d_norm = value;
    else if (key == "h") cfg.h = value;
    else if (key == "K") cfg.K = as_int();
    else if (key == "normalizer") cfg.normalizer = value;
    else throw Error(Stage::Config, "parameter '" + key + "' cannot be swept");
}

// -----------------------------------------------------------------------------
// Pipeline
// -----------------------------------------------------------------------------

Curve trim_to_span(const Curve& q, Vec2 start, Vec2 end) {
    const auto& pts = q.points();
    auto nearest = [&](Vec2 target) {
        size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t k = 0; k < pts.size(); ++k) {
            const double d = (pts[k] - target).norm2();
            if (d < best_d) {
                best_d = d;
                best = k;
            }
        }
        return best;
    };
    const size_t a = nearest(start);
    const size_t b = nearest(end);
    if (b <= a) return q;
    return Curve(std::vector<Vec2>(pts.begin() + static_cast<long>(a), pts.begin() + static_cast<long>(b) + 1));
}

PipelineResult run_pipeline(const ImageGrid& image, const Annotation& ann, const Config& cfg, int jobs) {
    cfg.validate();
    Curve initial = fit_initial_curve(ann.initial_source());
    auto squares = sample_squares(initial, cfg.square_count, cfg.square_size_factor, ann.bbox);

    const GradField grads = gradient_magnitude(image);
    const GuidedOptions opts = cfg.guided();
    std::vector<SeamPath> seams(squares.size());
    parallel_for(squares.size(), jobs, [&](size_t k) {
        const SquareSpec& sq = squares[k];
        const SquarePatch patch = extract_patch(image, grads, sq.center, sq.patch_angle(), sq.side);
        seams[k] = guided_seam(patch, opts);
        seams[k].segment_id = sq.order_index;
    });

    SeamCloud cloud(seams);
    compute_directionality(cloud, cfg.h, jobs);
    WalkResult walk = integrate_walk(cloud, cfg.K, cfg.score_variant, cfg.knn_pool);
    Curve q = walk_to_curve(walk);
    Curve contour = cfg.trim_to_initial ? trim_to_span(q, initial.points().front(), initial.points().back()) : q;
    return {std::move(initial), std::move(squares), std::move(seams), std::move(cloud), std::move(walk),
            std::move(contour)};
}

double resolve_normalizer(const Config& cfg, const Annotation& truth) {
    if (cfg.normalizer) return *cfg.normalizer;
    return interocular(truth);
}

MetricsReport evaluate_contour(const Curve& estimated, const Annotation& truth, double normalizer) {
    if (!truth.contour || truth.contour->empty()) throw Error(Stage::Metrics, "ground truth has no contour");
    MetricsReport report;
    report.normalizer = normalizer;
    report.nearest_distances = nearest_distances(estimated.points(), *truth.contour);
    report.dme = dme(estimated.points(), *truth.contour, normalizer);
    if (truth.landmarks.size() >= 2) {
        const auto est = curve_to_landmarks(estimated, static_cast<int>(truth.landmarks.size()));
        report.sme = sme(est, truth.landmarks, normalizer);
    }
    return report;
}

}  // namespace seamtrace
