/**
 * @file seamcut.hpp
 * @brief Local seam extraction: gradient-only and parabola-guided dynamic
 *        programming over a patch's gradient field.
 *
 * A seam picks one column per row, top to bottom, with adjacent columns
 * differing by at most one. Grids are ScalarFields indexed at(j, i):
 * width = number of columns, height = number of rows.
 *
 * Ties between equal DP candidates are broken by preferring the
 * predecessor offset 0, then -1, then +1; the final column is the smallest
 * index among equal bottom-row maxima.
 */
#pragma once

#include "seamtrace/geometry.hpp"
#include "seamtrace/imggrid.hpp"

#include <span>
#include <vector>

namespace seamtrace {

/// Patch-frame point: row i, column j.
struct RowCol {
    double i = 0.0;
    double j = 0.0;
};

/// j = a*i^2 + b*i + c in patch coordinates.
struct Parabola {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double operator()(double i) const { return (a * i + b) * i + c; }
};

enum class DistanceMode { Vertical, Nearest };
enum class AlphaWeighting { Blend, Additive };

/// Least-squares quadratic j(i). Needs at least 3 distinct rows.
Parabola fit_parabola(std::span<const RowCol> points);

/// Vertical residual |j - P(i)|, or the exact Euclidean distance to the curve.
double parabola_distance(RowCol p, const Parabola& parabola, DistanceMode mode = DistanceMode::Vertical);

/// e = 1 - (d / d_norm)^2, not clamped.
double parabola_error(RowCol p, const Parabola& parabola, double d_norm = 3.0,
                      DistanceMode mode = DistanceMode::Vertical);

struct GuidedOptions {
    double alpha = 0.7;
    /// Rows of history used for the parabola fit; the prior applies from row `window` on.
    int window = 20;
    double d_norm = 3.0;
    AlphaWeighting weighting = AlphaWeighting::Blend;
    DistanceMode distance = DistanceMode::Vertical;
};

struct SeamPath {
    std::vector<int> cols;
    double score = 0.0;
    std::vector<Vec2> global_points;
    std::vector<Vec2> tangents;
    int segment_id = 0;
};

/// Exact max-gradient seam (globals left empty for bare grids).
SeamPath gradient_seam(const ScalarField& grads);
SeamPath gradient_seam(const SquarePatch& patch);

/// Gradient plus parabola-prior DP. With alpha = 1 it reproduces gradient_seam.
SeamPath guided_seam(const ScalarField& grads, const GuidedOptions& opts);
SeamPath guided_seam(const SquarePatch& patch, const GuidedOptions& opts);

/// Global points via the patch frame, tangents by central differences.
SeamPath seam_to_global(const SquarePatch& patch, std::vector<int> cols);

/// Contribution of row i given its gradient and (when active) parabola error.
double cell_score(double g, double e, int i, const GuidedOptions& opts);

/// Guided objective of a full path, with windows taken from the path itself.
/// Summation order matches the DP so scores compare exactly.
double path_objective(const ScalarField& grads, std::span<const int> cols, const GuidedOptions& opts);

/// True when every step changes the column by at most one.
bool is_continuous(std::span<const int> cols);

}  // namespace seamtrace
