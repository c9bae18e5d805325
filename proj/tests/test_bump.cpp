#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "declab/bump.hpp"
#include "declab/fft.hpp"
#include "declab/rng.hpp"

using namespace declab;

TEST_CASE("B-spline values at the center match the classical ones") {
    CHECK(bspline(2, 0.0) == doctest::Approx(1.0));
    CHECK(bspline(4, 0.0) == doctest::Approx(2.0 / 3.0));
    CHECK(bspline(2, 0.5) == doctest::Approx(0.5));
    CHECK(bspline(3, 0.0) == doctest::Approx(0.75));
    CHECK(bspline(4, 2.0) == doctest::Approx(0.0));
    // normalization: integral is 1 (trapezoid over the support)
    for (int m : {2, 4, 12}) {
        double h = 1e-3, s = 0.0;
        for (double x = -m / 2.0; x <= m / 2.0; x += h) s += bspline(m, x) * h;
        CHECK(s == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("partition of unity holds to 1e-8 over a truncation window") {
    BumpGenerator g(12, 0.5);
    int W = g.truncation_radius(1e-12);
    Rng rng(5);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        double x = rng.uniform(-0.5, 0.5);
        double s = 0.0;
        for (int j = -W; j <= W; ++j) s += g(x - j);
        worst = std::max(worst, std::abs(s - 1.0));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("decay and nonnegativity: g(0) > g(3 diam) >= 0") {
    BumpGenerator g(12, 0.5);
    CHECK(g(0.0) > g(3.0));
    CHECK(g(3.0) >= 0.0);
    CHECK(g(17.0) >= 0.0);  // even order keeps every lobe nonnegative
    // decay bound honored at the truncation radius
    int r = g.truncation_radius(1e-10);
    CHECK(g(static_cast<double>(r)) <= 1e-10);
    CHECK(g(static_cast<double>(r) + 0.5) <= 1e-10);
}

TEST_CASE("frequency transform vanishes outside [-w_half, w_half] (FFT check)") {
    BumpGenerator g(12, 0.5);
    // sample g on a long 1D grid, DFT, compare mass outside the band
    const double L = 512.0;
    const int N = 4096;
    const double h = L / N;
    std::vector<Complex> data(N);
    for (int i = 0; i < N; ++i) {
        double x = (i < N / 2 ? i : i - N) * h;
        data[i] = g(x);
    }
    fft_nd(data, {N}, false);
    double inside = 0.0, outside = 0.0;
    for (int i = 0; i < N; ++i) {
        double w = 2.0 * M_PI * (i < N / 2 ? i : i - N) / L;
        double m = std::norm(data[i]);
        if (std::abs(w) <= g.freq_halfwidth() + 2.0 * M_PI / L) inside += m;
        else outside += m;
    }
    CHECK(outside <= 1e-8 * (inside + outside));
    // and the analytic transform agrees with the B-spline profile
    CHECK(g.freq_transform(0.0) == doctest::Approx(1.0));
    CHECK(g.freq_transform(g.freq_halfwidth()) == doctest::Approx(0.0));
    CHECK(g.freq_transform(0.37 * g.freq_halfwidth()) > 0.0);
}

TEST_CASE("l2 constant matches direct quadrature of g^2") {
    for (double frac : {0.25, 0.5, 0.9}) {
        BumpGenerator g(12, frac);
        double direct = g.lp_integral(2.0);
        CHECK(g.l2_squared() == doctest::Approx(direct).epsilon(1e-6));
    }
}

TEST_CASE("construction guards") {
    CHECK_THROWS(BumpGenerator(11, 0.5));  // odd order
    CHECK_THROWS(BumpGenerator(12, 1.0));  // support not strictly inside the dual cell
    CHECK_THROWS(BumpGenerator(12, 0.0));
}
