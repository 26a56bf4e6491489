#include "seamtrace/spline.hpp"

#include "seamtrace/error.hpp"

#include <algorithm>

namespace seamtrace {

NaturalSpline::NaturalSpline(std::vector<double> knots, std::vector<double> values)
    : t_(std::move(knots)), y_(std::move(values)), m_(t_.size(), 0.0) {
    const size_t n = t_.size();
    if (n < 2 || y_.size() != n) throw Error(Stage::InitCurve, "spline needs at least 2 knots");
    for (size_t k = 1; k < n; ++k) {
        if (!(t_[k] > t_[k - 1])) throw Error(Stage::InitCurve, "spline knots must increase strictly");
    }
    if (n == 2) return;

    // Thomas algorithm on the interior second derivatives; m_[0] = m_[n-1] = 0.
    const size_t inner = n - 2;
    std::vector<double> diag(inner), upper(inner), rhs(inner);
    for (size_t r = 0; r < inner; ++r) {
        const size_t k = r + 1;
        const double h0 = t_[k] - t_[k - 1];
        const double h1 = t_[k + 1] - t_[k];
        diag[r] = 2.0 * (h0 + h1);
        upper[r] = h1;
        rhs[r] = 6.0 * ((y_[k + 1] - y_[k]) / h1 - (y_[k] - y_[k - 1]) / h0);
    }
    for (size_t r = 1; r < inner; ++r) {
        const double lower = t_[r + 1] - t_[r];
        const double f = lower / diag[r - 1];
        diag[r] -= f * upper[r - 1];
        rhs[r] -= f * rhs[r - 1];
    }
    for (size_t r = inner; r-- > 0;) {
        const double next = r + 1 < inner ? m_[r + 2] : 0.0;
        m_[r + 1] = (rhs[r] - upper[r] * next) / diag[r];
    }
}

double NaturalSpline::operator()(double t) const {
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    size_t k = it == t_.begin() ? 0 : static_cast<size_t>(it - t_.begin()) - 1;
    k = std::min(k, t_.size() - 2);
    const double h = t_[k + 1] - t_[k];
    const double a = t_[k + 1] - t;
    const double b = t - t_[k];
    return m_[k] * a * a * a / (6.0 * h) + m_[k + 1] * b * b * b / (6.0 * h)
         + (y_[k] / h - m_[k] * h / 6.0) * a + (y_[k + 1] / h - m_[k + 1] * h / 6.0) * b;
}

}  // namespace seamtrace
