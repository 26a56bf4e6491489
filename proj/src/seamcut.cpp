#include "seamtrace/seamcut.hpp"

#include "seamtrace/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace seamtrace {

namespace {

// Predecessor offsets in tie-break priority order.
constexpr std::array<int, 3> kDeltaOrder{0, -1, 1};

/// Solves the 3x3 system by Gaussian elimination with partial pivoting.
std::array<double, 3> solve3(std::array<std::array<double, 4>, 3> m) {
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        }
        if (std::abs(m[pivot][col]) < 1e-300) throw Error(Stage::SeamCut, "singular parabola normal matrix");
        std::swap(m[col], m[pivot]);
        for (int r = col + 1; r < 3; ++r) {
            const double f = m[r][col] / m[col][col];
            for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
        }
    }
    std::array<double, 3> x{};
    for (int r = 2; r >= 0; --r) {
        double s = m[r][3];
        for (int c = r + 1; c < 3; ++c) s -= m[r][c] * x[c];
        x[r] = s / m[r][r];
    }
    return x;
}

/// Real roots of c3 t^3 + c2 t^2 + c1 t + c0 with c3 != 0.
std::vector<double> cubic_roots(double c3, double c2, double c1, double c0) {
    const double a = c2 / c3;
    const double b = c1 / c3;
    const double c = c0 / c3;
    // Depressed cubic t = u - a/3: u^3 + p u + q = 0.
    const double p = b - a * a / 3.0;
    const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    const double shift = -a / 3.0;
    const double disc = q * q / 4.0 + p * p * p / 27.0;
    std::vector<double> roots;
    if (disc > 0.0) {
        const double s = std::sqrt(disc);
        roots.push_back(std::cbrt(-q / 2.0 + s) + std::cbrt(-q / 2.0 - s) + shift);
    } else if (p == 0.0) {
        roots.push_back(shift);
    } else {
        const double r = 2.0 * std::sqrt(-p / 3.0);
        const double arg = std::clamp(3.0 * q / (p * r), -1.0, 1.0);
        const double phi = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k) roots.push_back(r * std::cos(phi - 2.0 * kPi * k / 3.0) + shift);
    }
    // Newton polish.
    for (double& t : roots) {
        for (int it = 0; it < 3; ++it) {
            const double f = ((c3 * t + c2) * t + c1) * t + c0;
            const double df = (3.0 * c3 * t + 2.0 * c2) * t + c1;
            if (df == 0.0) break;
            t -= f / df;
        }
    }
    return roots;
}

struct DpTables {
    int rows = 0;
    int cols = 0;
    std::vector<double> score;  // M(i, j)
    std::vector<signed char> back;

    double& m(int i, int j) { return score[static_cast<size_t>(i) * cols + j]; }
    signed char& b(int i, int j) { return back[static_cast<size_t>(i) * cols + j]; }
};

SeamPath backtrack(DpTables& t) {
    const int last = t.rows - 1;
    int best = 0;
    for (int j = 1; j < t.cols; ++j) {
        if (t.m(last, j) > t.m(last, best)) best = j;
    }
    SeamPath path;
    path.score = t.m(last, best);
    path.cols.assign(static_cast<size_t>(t.rows), 0);
    int j = best;
    for (int i = last; i >= 0; --i) {
        path.cols[static_cast<size_t>(i)] = j;
        if (i > 0) j += t.b(i, j);
    }
    return path;
}

void check_grid(const ScalarField& grads) {
    if (grads.width < 1 || grads.height < 1) throw Error(Stage::SeamCut, "empty gradient grid");
}

}  // namespace

// -----------------------------------------------------------------------------
// Parabola prior
// -----------------------------------------------------------------------------

Parabola fit_parabola(std::span<const RowCol> points) {
    if (points.size() < 3) throw Error(Stage::SeamCut, "parabola fit needs at least 3 points");
    double mean = 0.0;
    for (const RowCol& p : points) mean += p.i;
    mean /= static_cast<double>(points.size());

    // Normal equations in the centered variable u = i - mean.
    std::array<double, 5> su{};
    std::array<double, 3> sj{};
    for (const RowCol& p : points) {
        const double u = p.i - mean;
        double pw = 1.0;
        for (int k = 0; k < 5; ++k) {
            su[k] += pw;
            if (k < 3) sj[k] += pw * p.j;
            pw *= u;
        }
    }
    // Distinct rows give a positive-definite system; guard against fewer than 3.
    const double det = su[0] * (su[2] * su[4] - su[3] * su[3]) - su[1] * (su[1] * su[4] - su[3] * su[2])
                     + su[2] * (su[1] * su[3] - su[2] * su[2]);
    const double scale = su[0] * su[2] * su[4];
    if (!(std::abs(det) > 1e-12 * scale)) {
        throw Error(Stage::SeamCut, "parabola fit needs at least 3 distinct rows");
    }
    const auto x = solve3({{{su[4], su[3], su[2], sj[2]}, {su[3], su[2], su[1], sj[1]}, {su[2], su[1], su[0], sj[0]}}});
    const double qa = x[0], qb = x[1], qc = x[2];
    return {qa, qb - 2.0 * qa * mean, qa * mean * mean - qb * mean + qc};
}

double parabola_distance(RowCol p, const Parabola& parabola, DistanceMode mode) {
    const double vertical = std::abs(p.j - parabola(p.i));
    if (mode == DistanceMode::Vertical) return vertical;

    const double a = parabola.a;
    const double b = parabola.b;
    const double q = parabola.c - p.j;
    double best = vertical;
    auto consider = [&](double t) {
        const double dj = parabola(t) - p.j;
        const double di = t - p.i;
        best = std::min(best, std::sqrt(di * di + dj * dj));
    };
    if (std::abs(a) < 1e-12) {
        consider((p.i - b * q) / (b * b + 1.0));
    } else {
        // d/dt [(t - i)^2 + (P(t) - j)^2] = 0.
        for (double t : cubic_roots(2.0 * a * a, 3.0 * a * b, b * b + 2.0 * a * q + 1.0, b * q - p.i)) consider(t);
    }
    return best;
}

double parabola_error(RowCol p, const Parabola& parabola, double d_norm, DistanceMode mode) {
    const double d = parabola_distance(p, parabola, mode) / d_norm;
    return 1.0 - d * d;
}

double cell_score(double g, double e, int i, const GuidedOptions& opts) {
    const bool prior = i >= opts.window;
    if (opts.weighting == AlphaWeighting::Additive) return prior ? g + e : g;
    return prior ? opts.alpha * g + (1.0 - opts.alpha) * e : opts.alpha * g;
}

bool is_continuous(std::span<const int> cols) {
    for (size_t k = 1; k < cols.size(); ++k) {
        if (std::abs(cols[k] - cols[k - 1]) > 1) return false;
    }
    return true;
}

// -----------------------------------------------------------------------------
// Dynamic programming
// -----------------------------------------------------------------------------

SeamPath gradient_seam(const ScalarField& grads) {
    check_grid(grads);
    DpTables t{grads.height, grads.width,
               std::vector<double>(grads.values.size()), std::vector<signed char>(grads.values.size(), 0)};
    for (int j = 0; j < t.cols; ++j) t.m(0, j) = grads.at(j, 0);
    for (int i = 1; i < t.rows; ++i) {
        for (int j = 0; j < t.cols; ++j) {
            const double g = grads.at(j, i);
            double best = -std::numeric_limits<double>::infinity();
            int best_delta = 0;
            for (int delta : kDeltaOrder) {
                const int jp = j + delta;
                if (jp < 0 || jp >= t.cols) continue;
                const double cand = t.m(i - 1, jp) + g;
                if (cand > best) {
                    best = cand;
                    best_delta = delta;
                }
            }
            t.m(i, j) = best;
            t.b(i, j) = static_cast<signed char>(best_delta);
        }
    }
    return backtrack(t);
}

SeamPath guided_seam(const ScalarField& grads, const GuidedOptions& opts) {
    check_grid(grads);
    if (opts.alpha < 0.0 || opts.alpha > 1.0) throw Error(Stage::SeamCut, "alpha must lie in [0, 1]");
    if (opts.window < 3) throw Error(Stage::SeamCut, "parabola window must be at least 3");
    if (!(opts.d_norm > 0.0)) throw Error(Stage::SeamCut, "d_norm must be positive");

    const int rows = grads.height;
    const int cols = grads.width;
    const int w = opts.window;
    DpTables t{rows, cols, std::vector<double>(grads.values.size()), std::vector<signed char>(grads.values.size(), 0)};
    // Parabola fitted to the W-row history ending at each cell of the previous row.
    std::vector<Parabola> prev_fit(static_cast<size_t>(cols));
    std::vector<RowCol> window(static_cast<size_t>(w));

    auto refit_row = [&](int i) {
        for (int j = 0; j < cols; ++j) {
            int jj = j;
            for (int r = i; r > i - w; --r) {
                window[static_cast<size_t>(r - (i - w + 1))] = {static_cast<double>(r), static_cast<double>(jj)};
                if (r > 0) jj += t.b(r, jj);
            }
            prev_fit[static_cast<size_t>(j)] = fit_parabola(window);
        }
    };

    for (int j = 0; j < cols; ++j) t.m(0, j) = cell_score(grads.at(j, 0), 0.0, 0, opts);
    for (int i = 1; i < rows; ++i) {
        const bool prior = i >= w;
        if (prior) refit_row(i - 1);
        for (int j = 0; j < cols; ++j) {
            const double g = grads.at(j, i);
            double best = -std::numeric_limits<double>::infinity();
            int best_delta = 0;
            for (int delta : kDeltaOrder) {
                const int jp = j + delta;
                if (jp < 0 || jp >= cols) continue;
                const double e = prior
                    ? parabola_error({static_cast<double>(i), static_cast<double>(j)}, prev_fit[static_cast<size_t>(jp)],
                                     opts.d_norm, opts.distance)
                    : 0.0;
                const double cand = t.m(i - 1, jp) + cell_score(g, e, i, opts);
                if (cand > best) {
                    best = cand;
                    best_delta = delta;
                }
            }
            t.m(i, j) = best;
            t.b(i, j) = static_cast<signed char>(best_delta);
        }
    }
    return backtrack(t);
}

double path_objective(const ScalarField& grads, std::span<const int> cols, const GuidedOptions& opts) {
    if (cols.size() != static_cast<size_t>(grads.height)) throw Error(Stage::SeamCut, "path length must equal row count");
    const int w = opts.window;
    std::vector<RowCol> window(static_cast<size_t>(std::max(w, 0)));
    double total = 0.0;
    for (int i = 0; i < grads.height; ++i) {
        const int j = cols[static_cast<size_t>(i)];
        double e = 0.0;
        if (i >= w) {
            for (int r = i - w; r < i; ++r) {
                window[static_cast<size_t>(r - (i - w))] = {static_cast<double>(r), static_cast<double>(cols[static_cast<size_t>(r)])};
            }
            e = parabola_error({static_cast<double>(i), static_cast<double>(j)}, fit_parabola(window), opts.d_norm,
                               opts.distance);
        }
        const double cell = cell_score(grads.at(j, i), e, i, opts);
        total = i == 0 ? cell : total + cell;
    }
    return total;
}

// -----------------------------------------------------------------------------
// Patch wrappers
// -----------------------------------------------------------------------------

SeamPath seam_to_global(const SquarePatch& patch, std::vector<int> cols) {
    SeamPath path;
    path.cols = std::move(cols);
    const size_t n = path.cols.size();
    path.global_points.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        path.global_points.push_back(patch_to_global(patch, static_cast<int>(i), path.cols[i]));
    }
    path.tangents.resize(n);
    for (size_t i = 0; i < n; ++i) {
        if (n == 1) {
            path.tangents[i] = patch.frame.row_axis();
            break;
        }
        const size_t lo = i == 0 ? 0 : i - 1;
        const size_t hi = i + 1 == n ? i : i + 1;
        path.tangents[i] = normalized(path.global_points[hi] - path.global_points[lo]);
    }
    return path;
}

SeamPath gradient_seam(const SquarePatch& patch) {
    SeamPath dp = gradient_seam(patch.grads);
    SeamPath out = seam_to_global(patch, std::move(dp.cols));
    out.score = dp.score;
    return out;
}

SeamPath guided_seam(const SquarePatch& patch, const GuidedOptions& opts) {
    SeamPath dp = guided_seam(patch.grads, opts);
    SeamPath out = seam_to_global(patch, std::move(dp.cols));
    out.score = dp.score;
    return out;
}

}  // namespace seamtrace
