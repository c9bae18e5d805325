#include "declab/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "declab/rng.hpp"

namespace declab {

void Ambient::validate() {
    require(n >= 1 && n <= kMaxDim - 1, "Ambient: n must be in [1,3]");
    require(D >= 2 && is_power_of_two(D), "Ambient: D must be a power of two >= 2");
    require(eps > 0.0, "Ambient: eps must be positive");
    require(L >= 1.0, "Ambient: L must be >= 1");
    if (D0 == 0) D0 = default_coarse_scale(D, eps, L);
    require(is_power_of_two(D0) && D0 >= 2 && D0 <= D,
            "Ambient: D0 must be a power of two with 2 <= D0 <= D");
}

long default_coarse_scale(long D, double eps, double L) {
    // Largest dyadic <= D^(eps^(sqrt(L)/2)).  At desk scale the exponent is
    // tiny and this collapses to the clamp value 2.
    double expo = std::pow(eps, std::sqrt(L) / 2.0);
    double target = std::pow(static_cast<double>(D), expo);
    long d0 = target >= 1.0 ? floor_pow2(target) : 1;
    d0 = std::max<long>(d0, 2);
    return std::min(d0, D);
}

Vec paraboloid_normal(const Vec& xi) {
    Vec v(xi.size() + 1);
    for (size_t i = 0; i < xi.size(); ++i) v[i] = 2.0 * xi[i];
    v[xi.size()] = -1.0;
    return normalized(v);
}

Vec Cap::lifted_center() const {
    Vec c(center.size() + 1);
    double s = 0.0;
    for (size_t i = 0; i < center.size(); ++i) {
        c[i] = center[i];
        s += center[i] * center[i];
    }
    c[center.size()] = s;
    return c;
}

namespace {

// Does the half-open cell [lo, lo+h)^n meet the open unit ball?  Uses the
// closest point of the closed cell; tangent cells are excluded by the strict
// inequality.
bool cell_meets_unit_ball(const std::vector<long>& idx, long D, int n) {
    double h = 1.0 / static_cast<double>(D);
    double d2 = 0.0;
    for (int i = 0; i < n; ++i) {
        double lo = static_cast<double>(idx[i]) * h;
        double hi = lo + h;
        double c = 0.0;
        if (lo > 0.0) c = lo;
        else if (hi < 0.0) c = hi;
        d2 += c * c;
    }
    return d2 < 1.0;
}

}  // namespace

std::vector<Cap> build_cap_partition(const Ambient& amb) {
    require(amb.D >= 2 && is_power_of_two(amb.D),
            "build_cap_partition: invalid scale (D must be a power of two >= 2)");
    const int n = amb.n;
    const long D = amb.D;
    std::vector<Cap> caps;
    std::vector<long> idx(n, -D - 1);
    // Lexicographic scan over the index box [-D-1, D]^n.
    for (;;) {
        if (cell_meets_unit_ball(idx, D, n)) {
            Cap c;
            c.index = idx;
            c.scale = D;
            c.center.resize(n);
            for (int i = 0; i < n; ++i)
                c.center[i] = (static_cast<double>(idx[i]) + 0.5) / static_cast<double>(D);
            c.normal = paraboloid_normal(c.center);
            caps.push_back(std::move(c));
        }
        int k = n - 1;
        while (k >= 0 && idx[k] == D) { idx[k] = -D - 1; --k; }
        if (k < 0) break;
        ++idx[k];
    }
    return caps;
}

std::optional<std::vector<long>> cap_index_of(const Vec& xi, long D) {
    std::vector<long> idx(xi.size());
    for (size_t i = 0; i < xi.size(); ++i)
        idx[i] = static_cast<long>(std::floor(xi[i] * static_cast<double>(D)));
    if (!cell_meets_unit_ball(idx, D, static_cast<int>(xi.size()))) return std::nullopt;
    return idx;
}

Subspace::Subspace(int ambient_dim, std::vector<Vec> spanning) {
    require(!spanning.empty(), "Subspace: empty spanning set");
    for (const Vec& v : spanning)
        require(static_cast<int>(v.size()) == ambient_dim, "Subspace: dimension mismatch");
    int kept = gram_schmidt(spanning, 1e-10);
    require(kept > 0, "Subspace: spanning set is degenerate");
    basis = std::move(spanning);
    dim = kept;
}

double dist_to_subspace(const Vec& v, const Subspace& V) {
    double proj2 = 0.0;
    for (const Vec& b : V.basis) proj2 += sqr(dot(v, b));
    double rem = dot(v, v) - proj2;
    return rem > 0.0 ? std::sqrt(rem) : 0.0;
}

std::vector<Cap> caps_near_subspace(const std::vector<Cap>& caps, const Subspace& V, long D) {
    require(V.dim >= 1, "caps_near_subspace: subspace must have dim >= 1");
    std::vector<Cap> out;
    const double thr = 1.0 / static_cast<double>(D);
    for (const Cap& c : caps)
        if (dist_to_subspace(c.normal, V) <= thr) out.push_back(c);
    return out;
}

std::vector<Cap> caps_avoiding(const std::vector<Cap>& caps,
                               const std::vector<Subspace>& tuple, long D) {
    std::vector<Cap> out;
    const double thr = 1.0 / static_cast<double>(D);
    for (const Cap& c : caps) {
        bool captured = false;
        for (const Subspace& V : tuple) {
            if (dist_to_subspace(c.normal, V) <= thr) { captured = true; break; }
        }
        if (!captured) out.push_back(c);
    }
    return out;
}

Vec Cube::center() const {
    Vec c(corner);
    for (double& v : c) v += side / 2.0;
    return c;
}

bool Cube::contains(const Vec& x) const {
    for (size_t i = 0; i < corner.size(); ++i)
        if (x[i] < corner[i] || x[i] >= corner[i] + side) return false;
    return true;
}

bool Cube::intersects_closed(const Cube& o) const {
    for (size_t i = 0; i < corner.size(); ++i) {
        if (corner[i] + side < o.corner[i]) return false;
        if (o.corner[i] + o.side < corner[i]) return false;
    }
    return true;
}

DyadicCube::DyadicCube(Vec corner_, double side_) {
    require(is_dyadic(side_), "DyadicCube: side must be dyadic");
    for (double c : corner_) {
        double q = c / side_;
        require(std::abs(q - std::round(q)) < 1e-9,
                "DyadicCube: corner must be an integer multiple of side");
    }
    corner = std::move(corner_);
    side = side_;
}

std::vector<DyadicCube> dyadic_cubes(const DyadicCube& region, double side) {
    require(is_dyadic(side), "dyadic_cubes: side must be dyadic");
    double ratio = region.side / side;
    long m = std::lround(ratio);
    require(std::abs(ratio - static_cast<double>(m)) < 1e-9 && m >= 1,
            "dyadic_cubes: side must divide region side");
    const int d = static_cast<int>(region.corner.size());
    std::vector<DyadicCube> out;
    std::vector<long> idx(d, 0);
    for (;;) {
        Vec corner(region.corner);
        for (int i = 0; i < d; ++i) corner[i] += static_cast<double>(idx[i]) * side;
        out.push_back(DyadicCube(std::move(corner), side));
        int k = d - 1;
        while (k >= 0 && idx[k] == m - 1) { idx[k] = 0; --k; }
        if (k < 0) break;
        ++idx[k];
    }
    return out;
}

Cube dilate(const Cube& u, double factor) {
    require(factor >= 1.0, "dilate: factor must be >= 1");
    Cube r;
    r.side = u.side * factor;
    r.corner = u.center();
    for (double& c : r.corner) c -= r.side / 2.0;
    return r;
}

bool same_subspace(const Subspace& a, const Subspace& b, double tol) {
    if (a.dim != b.dim) return false;
    for (const Vec& v : a.basis)
        if (dist_to_subspace(v, b) > tol) return false;
    return true;
}

namespace {

void push_unique(std::vector<Subspace>& out, Subspace s) {
    for (const Subspace& t : out)
        if (same_subspace(t, s)) return;
    out.push_back(std::move(s));
}

}  // namespace

std::vector<Subspace> candidate_subspaces(const std::vector<Cap>& caps, int d,
                                          const CandidateOptions& opts) {
    require(!caps.empty(), "candidate_subspaces: no caps");
    const int dim = static_cast<int>(caps[0].normal.size());
    require(d >= 1 && d <= dim, "candidate_subspaces: d out of range");

    // caps ordered by weight hint (largest first) when supplied.
    std::vector<size_t> order(caps.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (opts.weight_hint) {
        require(opts.weight_hint->size() == caps.size(),
                "candidate_subspaces: weight hint size mismatch");
        std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            return (*opts.weight_hint)[a] > (*opts.weight_hint)[b];
        });
    }

    std::vector<Subspace> out;

    // (a) spans of d-subsets of cap normals, largest-weight-first, capped.
    std::vector<int> pick(d);
    for (int i = 0; i < d; ++i) pick[i] = i;
    const int m = static_cast<int>(caps.size());
    if (m >= d) {
        for (;;) {
            std::vector<Vec> rows;
            rows.reserve(d);
            for (int i = 0; i < d; ++i) rows.push_back(caps[order[pick[i]]].normal);
            std::vector<Vec> probe = rows;
            if (gram_schmidt(probe, 1e-9) == d)
                push_unique(out, Subspace(dim, rows));
            if (static_cast<int>(out.size()) >= opts.budget) break;
            int k = d - 1;
            while (k >= 0 && pick[k] == m - d + k) --k;
            if (k < 0) break;
            ++pick[k];
            for (int j = k + 1; j < d; ++j) pick[j] = pick[j - 1] + 1;
        }
    }

    if (opts.strategy == CandidateStrategy::Mixed) {
        // (b) coordinate subspaces.
        std::vector<int> cpick(d);
        for (int i = 0; i < d; ++i) cpick[i] = i;
        for (;;) {
            std::vector<Vec> rows;
            for (int i = 0; i < d; ++i) {
                Vec e(dim, 0.0);
                e[cpick[i]] = 1.0;
                rows.push_back(std::move(e));
            }
            push_unique(out, Subspace(dim, rows));
            int k = d - 1;
            while (k >= 0 && cpick[k] == dim - d + k) --k;
            if (k < 0) break;
            ++cpick[k];
            for (int j = k + 1; j < d; ++j) cpick[j] = cpick[j - 1] + 1;
        }
        // (c) quasi-random Grassmannian samples: orthonormalized Gaussian frames.
        Rng rng(mix_seed(opts.seed, 0x47524153u));
        for (int s = 0; s < opts.random_samples; ++s) {
            std::vector<Vec> rows(d, Vec(dim));
            for (auto& r : rows)
                for (double& v : r) v = rng.gaussian();
            if (gram_schmidt(rows, 1e-9) == d)
                push_unique(out, Subspace(dim, rows));
        }
    }
    return out;
}

}  // namespace declab
