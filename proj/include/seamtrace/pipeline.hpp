/**
 * @file pipeline.hpp
 * @brief Resolved run configuration and the end-to-end extraction pipeline:
 *        initial curve -> squares -> local seams -> cloud -> walk.
 */
#pragma once

#include "seamtrace/imggrid.hpp"
#include "seamtrace/initcurve.hpp"
#include "seamtrace/integrate.hpp"
#include "seamtrace/metrics.hpp"
#include "seamtrace/seamcut.hpp"

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace seamtrace {

struct Config {
    int square_count = 50;
    double square_size_factor = 0.2;
    double alpha = 0.7;
    int window = 20;
    double d_norm = 3.0;
    double h = 20.0;
    int K = 7;
    ScoreVariant score_variant = ScoreVariant::Corrected;
    AlphaWeighting alpha_weighting = AlphaWeighting::Blend;
    DistanceMode distance_mode = DistanceMode::Vertical;
    NeighbourPool knn_pool = NeighbourPool::Unvisited;
    /// Cut the walk to the stretch between the points nearest the initial curve's ends.
    bool trim_to_initial = true;
    std::optional<double> normalizer;

    /// Throws Error(Stage::Config) on out-of-range values.
    void validate() const;
    GuidedOptions guided() const;
};

nlohmann::json config_to_json(const Config& cfg);
/// Overlays keys present in `j` onto `base`; unknown keys are rejected.
Config config_from_json(const nlohmann::json& j, Config base = {});
/// Sets one numeric field by its JSON key (used by parameter sweeps).
void set_config_value(Config& cfg, const std::string& key, double value);

struct PipelineResult {
    Curve initial;
    std::vector<SquareSpec> squares;
    std::vector<SeamPath> seams;
    SeamCloud cloud;
    WalkResult walk;
    Curve contour;  // walk output, trimmed when configured
};

/// Runs the whole extraction. `jobs` parallelizes seams and directionality.
PipelineResult run_pipeline(const ImageGrid& image, const Annotation& ann, const Config& cfg, int jobs = 1);

/// Sub-curve of `q` between its points nearest to `start` and `end`;
/// returns `q` unchanged when that stretch is empty or reversed.
Curve trim_to_span(const Curve& q, Vec2 start, Vec2 end);

/// Explicit override first, then the inter-ocular distance.
double resolve_normalizer(const Config& cfg, const Annotation& truth);

/// DME against truth.contour and SME against truth.landmarks.
MetricsReport evaluate_contour(const Curve& estimated, const Annotation& truth, double normalizer);

}  // namespace seamtrace
