#include "seamtrace/integrate.hpp"

#include "seamtrace/error.hpp"
#include "seamtrace/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace seamtrace {

namespace {

// theta < 1e-12 beyond r^2 > ln(1e12) * (h/2)^2.
constexpr double kThetaCutoffExponent = 27.631021115928547;

}  // namespace

SeamCloud::SeamCloud(std::span<const SeamPath> seams) {
    if (seams.empty()) return;
    m_ = static_cast<int>(seams.size());
    n_ = static_cast<int>(seams.front().global_points.size());
    points_.reserve(static_cast<size_t>(m_) * n_);
    for (size_t k = 0; k < seams.size(); ++k) {
        const SeamPath& s = seams[k];
        if (static_cast<int>(s.global_points.size()) != n_ || s.tangents.size() != s.global_points.size()) {
            throw Error(Stage::Integrate, "all seams must have the same number of points and tangents");
        }
        for (int i = 0; i < n_; ++i) {
            points_.push_back({static_cast<int>(k), i, s.global_points[static_cast<size_t>(i)],
                               s.tangents[static_cast<size_t>(i)], 0.5});
        }
    }
}

SeamCloud::SeamCloud(std::vector<CloudPoint> points, int m, int n)
    : points_(std::move(points)), m_(m), n_(n) {
    if (static_cast<long>(points_.size()) != static_cast<long>(m) * n) {
        throw Error(Stage::Integrate, "cloud size must equal M x N");
    }
    for (size_t idx = 0; idx < points_.size(); ++idx) {
        if (index_of(points_[idx].k, points_[idx].i) != idx) {
            throw Error(Stage::Integrate, "cloud records must be ordered by (k, i)");
        }
    }
}

double theta_weight(double r, double h) {
    const double s = h / 2.0;
    return std::exp(-(r * r) / (s * s));
}

CovMatrix2 weighted_covariance(Vec2 p, const SeamCloud& cloud, double h) {
    const double s2 = (h / 2.0) * (h / 2.0);
    const double cutoff = kThetaCutoffExponent * s2;
    CovMatrix2 cov;
    for (const CloudPoint& q : cloud.points()) {
        const Vec2 d = p - q.pos;
        const double r2 = d.norm2();
        if (r2 == 0.0 || r2 > cutoff) continue;
        const double w = std::exp(-r2 / s2);
        cov.xx += w * d.x * d.x;
        cov.xy += w * d.x * d.y;
        cov.yy += w * d.y * d.y;
    }
    return cov;
}

std::pair<double, double> eigenvalues(const CovMatrix2& cov) {
    const double mean = 0.5 * (cov.xx + cov.yy);
    const double r = std::hypot(0.5 * (cov.xx - cov.yy), cov.xy);
    return {mean - r, mean + r};
}

double directionality(const CovMatrix2& cov) {
    auto [lo, hi] = eigenvalues(cov);
    if (!(hi > 0.0)) return 0.5;
    lo = std::clamp(lo, 0.0, hi);
    return hi / (lo + hi);
}

void compute_directionality(SeamCloud& cloud, double h, int jobs) {
    if (!(h > 0.0)) throw Error(Stage::Integrate, "support radius h must be positive");
    auto& pts = cloud.points();
    parallel_for(pts.size(), jobs, [&](size_t idx) {
        pts[idx].sigma = directionality(weighted_covariance(pts[idx].pos, cloud, h));
    });
}

std::vector<size_t> knn(const SeamCloud& cloud, size_t query, int k_neighbors) {
    if (k_neighbors < 1) throw Error(Stage::Integrate, "K must be at least 1");
    if (cloud.size() < static_cast<size_t>(k_neighbors) + 1) {
        throw Error(Stage::Integrate, "cloud has fewer than K + 1 points");
    }
    return knn(cloud, query, k_neighbors, {});
}

std::vector<size_t> knn(const SeamCloud& cloud, size_t query, int k_neighbors, const std::vector<bool>& skip) {
    const Vec2 q = cloud.points()[query].pos;
    std::vector<std::pair<double, size_t>> cand;
    cand.reserve(cloud.size() - 1);
    for (size_t idx = 0; idx < cloud.size(); ++idx) {
        if (idx == query || (!skip.empty() && skip[idx])) continue;
        cand.emplace_back((cloud.points()[idx].pos - q).norm2(), idx);
    }
    // Index order equals (k, i) lexicographic order.
    const auto kth = cand.begin() + std::min<long>(k_neighbors, static_cast<long>(cand.size()));
    std::partial_sort(cand.begin(), kth, cand.end());
    std::vector<size_t> out;
    out.reserve(static_cast<size_t>(k_neighbors));
    for (auto it = cand.begin(); it != kth; ++it) out.push_back(it->second);
    return out;
}

WalkResult integrate_walk(const SeamCloud& cloud, int k_neighbors, ScoreVariant variant, NeighbourPool pool) {
    if (cloud.empty()) throw Error(Stage::Integrate, "cannot walk an empty cloud");
    if (k_neighbors < 1) throw Error(Stage::Integrate, "K must be at least 1");
    const int m = cloud.segments();
    const int n = cloud.per_segment();
    const int k_eff = static_cast<int>(std::min<size_t>(static_cast<size_t>(k_neighbors), cloud.size() - 1));
    const size_t max_steps = static_cast<size_t>(m) * n;

    std::vector<bool> visited(cloud.size(), false);
    WalkResult walk;
    size_t cur = cloud.index_of(0, 0);
    visited[cur] = true;
    walk.order.push_back(cur);

    while (walk.order.size() < max_steps && k_eff > 0) {
        const CloudPoint& q = cloud.points()[cur];
        if (q.k == m - 1 && q.i == n - 1) break;
        const auto neighbors =
            pool == NeighbourPool::All ? knn(cloud, cur, k_eff) : knn(cloud, cur, k_eff, visited);
        if (neighbors.empty()) break;
        const bool same_segment = std::all_of(neighbors.begin(), neighbors.end(),
                                              [&](size_t idx) { return cloud.points()[idx].k == q.k; });
        std::optional<size_t> next;
        if (same_segment) {
            if (q.i + 1 == n) break;
            const size_t succ = cloud.index_of(q.k, q.i + 1);
            if (!visited[succ]) next = succ;
        } else {
            double best = -std::numeric_limits<double>::infinity();
            for (size_t idx : neighbors) {
                const CloudPoint& c = cloud.points()[idx];
                if (visited[idx]) continue;
                if (c.k == q.k && c.i != q.i + 1) continue;
                const double align = q.tangent.dot(normalized(c.pos - q.pos));
                const double score = variant == ScoreVariant::Corrected ? c.sigma + align : q.sigma - align;
                if (score > best) {
                    best = score;
                    next = idx;
                }
            }
        }
        if (!next) break;
        cur = *next;
        visited[cur] = true;
        walk.order.push_back(cur);
    }

    walk.points.reserve(walk.order.size());
    for (size_t idx : walk.order) walk.points.push_back(cloud.points()[idx].pos);
    return walk;
}

Curve walk_to_curve(const WalkResult& walk) {
    auto pts = dedupe_consecutive(walk.points);
    if (pts.size() < 2) throw Error(Stage::Integrate, "walk produced fewer than 2 distinct points");
    return Curve(std::move(pts));
}

}  // namespace seamtrace
