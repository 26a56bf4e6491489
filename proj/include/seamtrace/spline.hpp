#pragma once

#include <span>
#include <vector>

namespace seamtrace {

/// Natural cubic spline y(t) through strictly increasing knots.
class NaturalSpline {
public:
    NaturalSpline(std::vector<double> knots, std::vector<double> values);

    double operator()(double t) const;
    double knot(size_t k) const { return t_[k]; }
    size_t size() const { return t_.size(); }

private:
    std::vector<double> t_;
    std::vector<double> y_;
    std::vector<double> m_;  // second derivatives at the knots
};

}  // namespace seamtrace
