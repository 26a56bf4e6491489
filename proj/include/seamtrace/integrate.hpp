/**
 * @file integrate.hpp
 * @brief Pooling of local seams into one point cloud and the greedy walk
 *        that connects them into a single contour.
 *
 * Every cloud point carries a directionality degree sigma in [0.5, 1]:
 * lambda_max / (lambda_min + lambda_max) of its distance-weighted
 * neighbourhood covariance.
 */
#pragma once

#include "seamtrace/geometry.hpp"
#include "seamtrace/initcurve.hpp"
#include "seamtrace/seamcut.hpp"

#include <optional>
#include <span>
#include <vector>

namespace seamtrace {

struct CloudPoint {
    int k = 0;  // segment id
    int i = 0;  // index within the segment
    Vec2 pos;
    Vec2 tangent;
    double sigma = 0.5;
};

/// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct CovMatrix2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;
};

/// M x N records stored segment-major: index = k * N + i.
class SeamCloud {
public:
    SeamCloud() = default;
    /// Builds the cloud from seams ordered by segment; sigma is left at 0.5.
    SeamCloud(std::span<const SeamPath> seams);
    /// Direct construction for tests; all segments must have `n` points.
    SeamCloud(std::vector<CloudPoint> points, int m, int n);

    const std::vector<CloudPoint>& points() const { return points_; }
    std::vector<CloudPoint>& points() { return points_; }
    int segments() const { return m_; }
    int per_segment() const { return n_; }
    size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }

    size_t index_of(int k, int i) const { return static_cast<size_t>(k) * n_ + i; }
    const CloudPoint& at(int k, int i) const { return points_[index_of(k, i)]; }

private:
    std::vector<CloudPoint> points_;
    int m_ = 0;
    int n_ = 0;
};

/// theta(r) = exp(-r^2 / (h/2)^2).
double theta_weight(double r, double h);

/// Sum over the cloud of theta(|p - p'|) (p - p')^T (p - p').
CovMatrix2 weighted_covariance(Vec2 p, const SeamCloud& cloud, double h);

/// Eigenvalues (lambda_min, lambda_max) of a symmetric 2x2 matrix.
std::pair<double, double> eigenvalues(const CovMatrix2& cov);

/// lambda_max / (lambda_min + lambda_max); 0.5 for the zero matrix.
double directionality(const CovMatrix2& cov);

/// Fills sigma for every point. `jobs` > 1 splits the work across threads.
void compute_directionality(SeamCloud& cloud, double h, int jobs = 1);

/// Indices of the K nearest records to record `query` (itself excluded),
/// ordered by distance then (k, i).
std::vector<size_t> knn(const SeamCloud& cloud, size_t query, int k_neighbors);
/// As above, skipping records flagged in `skip`; returns fewer than K when short.
std::vector<size_t> knn(const SeamCloud& cloud, size_t query, int k_neighbors, const std::vector<bool>& skip);

enum class ScoreVariant {
    /// s = sigma(candidate) + v . unit(candidate - q)
    Corrected,
    /// s = sigma(q) - v . unit(candidate - q)
    Literal,
};

enum class NeighbourPool {
    /// K-NN drawn from records not yet on the walk.
    Unvisited,
    /// K-NN over the whole cloud; visited records are then discarded.
    All,
};

struct WalkResult {
    std::vector<size_t> order;  // visited record indices
    std::vector<Vec2> points;
};

/// Greedy walk from record (0, 0). Sigma must already be populated.
WalkResult integrate_walk(const SeamCloud& cloud, int k_neighbors,
                          ScoreVariant variant = ScoreVariant::Corrected,
                          NeighbourPool pool = NeighbourPool::Unvisited);

/// Walk output as a Curve (consecutive duplicate positions dropped).
Curve walk_to_curve(const WalkResult& walk);

}  // namespace seamtrace
