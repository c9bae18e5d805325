#include "declab/bump.hpp"

#include <cmath>
#include <vector>

namespace declab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;

double sinc(double x) {
    if (std::abs(x) < 1e-6) {
        double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}
}  // namespace

double bspline(int order, double x) {
    require(order >= 1, "bspline: order must be >= 1");
    const double h = static_cast<double>(order) / 2.0;
    if (std::abs(x) >= h) return 0.0;
    // Cox-de Boor on the uniform knots -h, -h+1, ..., h.
    std::vector<double> b(order, 0.0);
    for (int j = 0; j < order; ++j) {
        double t0 = -h + j;
        b[j] = (x >= t0 && x < t0 + 1.0) ? 1.0 : 0.0;
    }
    for (int r = 2; r <= order; ++r) {
        for (int j = 0; j + r <= order; ++j) {
            double tj = -h + j;
            b[j] = ((x - tj) * b[j] + (tj + r - x) * b[j + 1]) / (r - 1.0);
        }
    }
    return b[0];
}

BumpGenerator::BumpGenerator(int order, double support_fraction) : order_(order) {
    require(order >= 2 && order % 2 == 0, "BumpGenerator: order must be even and >= 2");
    require(support_fraction > 0.0 && support_fraction < 1.0,
            "BumpGenerator: support fraction must be in (0,1)");
    half_ = support_fraction * kTwoPi;
    a_ = 2.0 * half_ / static_cast<double>(order);
    double b0 = bspline(order, 0.0);
    coeff_ = a_ / (kTwoPi * b0);
    // int g^2 = a * B_{2m}(0) / (2 pi B_m(0)^2)   (Plancherel; B_m * B_m = B_{2m})
    l2sq_ = a_ * bspline(2 * order, 0.0) / (kTwoPi * b0 * b0);
}

double BumpGenerator::operator()(double t) const {
    return coeff_ * pow_int(sinc(a_ * t / 2.0), order_);
}

double BumpGenerator::freq_transform(double w) const {
    return bspline(order_, w / a_) / bspline(order_, 0.0);
}

double BumpGenerator::lp_integral(double p) const {
    require(p >= 1.0, "lp_integral: p must be >= 1");
    // Simpson over [0, R], doubled; the tail beyond R is below 1e-14 of the
    // peak, negligible against the quoted tolerances.
    double R = static_cast<double>(truncation_radius(1e-14));
    const int steps = 40000;  // even
    double h = R / steps;
    double sum = std::pow((*this)(0.0), p) + std::pow(std::abs((*this)(R)), p);
    for (int i = 1; i < steps; ++i) {
        double v = std::pow(std::abs((*this)(i * h)), p);
        sum += (i % 2 == 1 ? 4.0 : 2.0) * v;
    }
    return 2.0 * sum * h / 3.0;
}

int BumpGenerator::truncation_radius(double tol) const {
    require(tol > 0.0 && tol < 1.0, "truncation_radius: tol in (0,1)");
    // g(t) <= coeff * (2/(a t))^m  for t > 0.
    double r = (2.0 / a_) * std::pow(coeff_ / tol, 1.0 / static_cast<double>(order_));
    return static_cast<int>(std::ceil(std::max(r, 1.0)));
}

}  // namespace declab
