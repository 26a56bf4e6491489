/**
 * @file synthbench.hpp
 * @brief Synthetic images with analytically known contours, and exhaustive
 *        seam oracles for small grids.
 *
 * Random numbers come from xorshift64* (Vigna 2014):
 *
 *     x ^= x >> 12;  x ^= x << 25;  x ^= x >> 27;
 *     return x * 0x2545F4914F6CDD1D;
 *
 * A zero seed is replaced by 0x9E3779B97F4A7C15. Uniform doubles take the
 * top 53 bits; normals use Box-Muller with both outputs consumed in order.
 */
#pragma once

#include "seamtrace/geometry.hpp"
#include "seamtrace/imggrid.hpp"
#include "seamtrace/initcurve.hpp"
#include "seamtrace/seamcut.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace seamtrace {

class XorShift64Star {
public:
    explicit XorShift64Star(std::uint64_t seed);

    std::uint64_t next();
    /// Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal.
    double normal();

private:
    std::uint64_t state_;
    std::optional<double> spare_;
};

/// Seed for item `index` of a corpus (splitmix64 of seed + index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// FNV-1a 64-bit hash, used for corpus manifests.
std::uint64_t fnv1a64(const std::vector<std::uint8_t>& bytes);

enum class ContourFamily { Parabola, EllipseArc, Spline };

struct Distractor {
    enum class Kind { Stripe, Blob };
    Kind kind = Kind::Stripe;
    Vec2 point;          // stripe: a point on its centre line; blob: centre
    double angle = 0.0;  // stripe direction, radians
    double size = 4.0;   // stripe width or blob radius, px
    double intensity = 1.0;
    double length = 0.0;  // stripe extent along its direction; 0 = unbounded
};

/// Paints the interior intensity over part of the contour, hiding the edge there.
struct Occluder {
    double from = 0.4;  // arc-length fractions of the landmark span
    double to = 0.6;
    double radius = 6.0;
};

struct SynthSpec {
    int width = 500;
    int height = 500;
    ContourFamily family = ContourFamily::Parabola;

    // Parabola: y = vertex.y + curvature * (x - vertex.x)^2 for x in [x_from, x_to].
    Vec2 vertex{250.0, 360.0};
    double curvature = -0.005;
    // Ellipse arc: centre + (radii.x cos t, radii.y sin t) for t in [t_from, t_to].
    Vec2 center{250.0, 250.0};
    Vec2 radii{130.0, 150.0};
    // Spline: y = S(x) through control points with increasing x.
    std::vector<Vec2> control_points;
    // Landmark span in the family's parameter (x for graphs, angle for arcs).
    double span_from = 130.0;
    double span_to = 370.0;
    /// Rotation of the contour about its pivot (vertex, ellipse centre, image centre).
    double rotation = 0.0;

    double contrast = 0.6;
    double softness = 0.0;  // Gaussian blur sigma, px
    double noise = 0.0;     // additive Gaussian std before 8-bit quantization
    std::vector<Distractor> distractors;
    std::optional<Occluder> occluder;

    int landmark_count = 17;
    double eye_distance = 100.0;
    /// Initial-guess landmarks: constant normal offset plus Gaussian jitter, px.
    double init_offset = 0.0;
    double init_jitter = 0.0;
    /// Square-size factor used for the border margin and truth extension.
    double size_factor = 0.2;
    std::uint64_t seed = 1;
};

nlohmann::json spec_to_json(const SynthSpec& spec);
SynthSpec spec_from_json(const nlohmann::json& j);

struct SynthResult {
    ImageGrid image;
    Annotation annotation;
    /// Dense contour over the landmark span only (annotation.contour is extended).
    std::vector<Vec2> inner_contour;
};

/// Renders the image and its annotation. The ground-truth contour extends
/// one square side of arc length beyond the landmark span at both ends.
SynthResult gen_synthetic(const SynthSpec& spec);

enum class Preset { Clean, Noisy, Distractor, Smooth };

Preset preset_from_name(const std::string& name);
std::string preset_name(Preset preset);

/// Spec for item `index` of a preset corpus; contour parameters vary with the seed.
SynthSpec preset_spec(Preset preset, int index, std::uint64_t seed);

/// Writes NNN.pgm, NNN.json and manifest.json. Returns the manifest, which
/// also records `source` when it is not null.
nlohmann::json write_corpus(const std::filesystem::path& dir, const std::vector<SynthSpec>& specs, int jobs = 1,
                            const nlohmann::json& source = nullptr);

// --- Oracles ---------------------------------------------------------------------

/// Exhaustive max-gradient seam with the DP's tie-break order. Rows <= 12.
SeamPath brute_force_seam(const ScalarField& grads);
SeamPath brute_force_seam(const SquarePatch& patch);

/// Exhaustive argmax of the guided objective over full paths. Rows <= 12.
SeamPath brute_force_guided_objective(const ScalarField& grads, const GuidedOptions& opts);
SeamPath brute_force_guided_objective(const SquarePatch& patch, const GuidedOptions& opts);

/// True when `a` precedes `b` in the DP tie-break order (both same length).
bool tie_break_precedes(std::span<const int> a, std::span<const int> b);

}  // namespace seamtrace
