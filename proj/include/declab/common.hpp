#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace declab {

using Complex = std::complex<double>;
using Vec = std::vector<double>;

// Hard cap on the ambient dimension n+1 (n <= 3).  Fixed-size buffers in the
// evaluation kernels rely on it.
inline constexpr int kMaxDim = 4;

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw Error(msg);
}

// ---- dyadic helpers ------------------------------------------------------

inline bool is_power_of_two(long v) { return v > 0 && (v & (v - 1)) == 0; }

inline bool is_dyadic(double v) {
    // Positive power of two (2^k, k in Z), exactly representable.
    if (!(v > 0.0) || !std::isfinite(v)) return false;
    int exp = 0;
    double m = std::frexp(v, &exp);
    return m == 0.5;
}

// Largest power of two <= x (x >= 1).
inline long floor_pow2(double x) {
    require(x >= 1.0, "floor_pow2: argument below 1");
    long p = 1;
    while (2.0 * static_cast<double>(p) <= x) p *= 2;
    return p;
}

// Smallest power of two > x.
inline long ceil_pow2_strict(double x) {
    long p = 1;
    while (static_cast<double>(p) <= x) p *= 2;
    return p;
}

inline double floor_dyadic(double x) {
    // Largest 2^k (k in Z) not exceeding x > 0.
    require(x > 0.0, "floor_dyadic: argument must be positive");
    return std::exp2(std::floor(std::log2(x) + 1e-12));
}

// ---- small dense linear algebra (dim <= kMaxDim) -------------------------

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec scaled(const Vec& a, double s) {
    Vec r(a);
    for (double& v : r) v *= s;
    return r;
}

inline Vec normalized(const Vec& a) {
    double n = norm2(a);
    require(n > 0.0, "normalized: zero vector");
    return scaled(a, 1.0 / n);
}

inline void axpy(Vec& y, double a, const Vec& x) {
    for (size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

// Orthonormalize rows in place (modified Gram-Schmidt); drops vectors with
// residual below tol and returns the surviving count.
inline int gram_schmidt(std::vector<Vec>& rows, double tol = 1e-12) {
    int kept = 0;
    for (size_t i = 0; i < rows.size(); ++i) {
        Vec v = rows[i];
        for (int j = 0; j < kept; ++j) axpy(v, -dot(v, rows[j]), rows[j]);
        // second pass for stability
        for (int j = 0; j < kept; ++j) axpy(v, -dot(v, rows[j]), rows[j]);
        double n = norm2(v);
        if (n > tol) {
            rows[kept++] = scaled(v, 1.0 / n);
        }
    }
    rows.resize(kept);
    return kept;
}

// ---- deterministic reductions --------------------------------------------

// Fixed-order pairwise tree summation; identical result no matter how the
// partials were produced.
inline double tree_sum(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    std::vector<double> buf(xs.begin(), xs.end());
    size_t n = buf.size();
    while (n > 1) {
        size_t half = (n + 1) / 2;
        for (size_t i = 0; i + half < n; ++i) buf[i] += buf[i + half];
        n = half;
    }
    return buf[0];
}

inline Complex tree_sum(std::span<const Complex> xs) {
    if (xs.empty()) return {0.0, 0.0};
    std::vector<Complex> buf(xs.begin(), xs.end());
    size_t n = buf.size();
    while (n > 1) {
        size_t half = (n + 1) / 2;
        for (size_t i = 0; i + half < n; ++i) buf[i] += buf[i + half];
        n = half;
    }
    return buf[0];
}

// ---- misc ----------------------------------------------------------------

inline double sqr(double x) { return x * x; }

// Locale-independent "%.17g"-style formatting (CSV/JSON number fields).
std::string fmt_g17(double v);

inline double pow_int(double x, int e) {
    double r = 1.0;
    double b = x;
    for (int k = e; k > 0; k >>= 1) {
        if (k & 1) r *= b;
        b *= b;
    }
    return r;
}

}  // namespace declab
