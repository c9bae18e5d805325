#pragma once

#include "declab/common.hpp"

namespace declab {

// Centered cardinal B-spline of order m (support [-m/2, m/2]).
double bspline(int order, double x);

// 1D partition-of-unity generator over the integer lattice.
//
// Frequency transform is the normalized B-spline ghat(w) = B_m(w/a)/B_m(0)
// with support [-w_half, w_half], w_half = a*m/2 strictly inside the dual
// cell (-2pi, 2pi).  By Poisson summation sum_j g(t - j) = 1 exactly.  In
// space g(t) = c * sinc^m(a t / 2): nonnegative for even m, polynomial decay
// of order m.
class BumpGenerator {
public:
    // support_fraction = w_half / (2 pi), must be in (0, 1).
    BumpGenerator(int order, double support_fraction);

    double operator()(double t) const;      // g(t), lattice units
    double freq_transform(double w) const;  // ghat(w)

    int order() const { return order_; }
    double freq_halfwidth() const { return half_; }     // w_half
    double peak() const { return coeff_; }              // g(0)
    double l2_squared() const { return l2sq_; }         // int g^2 (exact)
    double lp_integral(double p) const;                 // int g^p (quadrature)

    // Smallest integer r with sup_{|t|>=r} g(t) <= tol (from the decay bound
    // g(t) <= c (2/(a t))^m).
    int truncation_radius(double tol) const;

private:
    int order_;
    double half_;    // w_half
    double a_;       // B-spline frequency scale
    double coeff_;   // c = a / (2 pi B_m(0))
    double l2sq_;
};

}  // namespace declab
