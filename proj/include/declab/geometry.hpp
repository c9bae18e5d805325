#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "declab/common.hpp"

namespace declab {

// Ambient parameters: the function space lives on R^{n+1}, frequency caps
// have transverse width 1/D, and D0 is the coarse sub-scale.
struct Ambient {
    int n = 1;        // spatial dimension; functions live on R^{n+1}
    long D = 4;       // dyadic scale, power of two >= 2
    double eps = 0.1;
    double L = 4.0;
    long D0 = 0;      // 0 = derive from (D, eps, L)

    int dim() const { return n + 1; }
    void validate();  // throws on violation; fills D0 when 0
};

// Largest power of two <= D^(eps^(sqrt(L)/2)), clamped to [2, D].
long default_coarse_scale(long D, double eps, double L);

// One frequency block theta: the grid cell of transverse width 1/D with the
// given integer index, sitting on the truncated paraboloid.
struct Cap {
    std::vector<long> index;  // in Z^n
    Vec center;               // (index + 1/2) / D, in B^n(0,1) + margin
    long scale = 0;           // D
    Vec normal;               // unit normal, last coordinate negative

    // Lifted center (center, |center|^2) on the paraboloid.
    Vec lifted_center() const;
};

// Unit normal to the paraboloid at transverse point xi: (2 xi, -1)/|.|.
Vec paraboloid_normal(const Vec& xi);

// A d-dimensional linear subspace of R^{n+1}, orthonormal basis rows.
// Re-orthonormalizes on construction.
struct Subspace {
    int dim = 0;
    std::vector<Vec> basis;

    Subspace() = default;
    Subspace(int ambient_dim, std::vector<Vec> spanning);

    int ambient_dim() const { return basis.empty() ? 0 : static_cast<int>(basis[0].size()); }
};

// Axis-aligned cube; the workhorse region type.  Dyadic alignment is a
// property checked where required, not an invariant of the struct.
struct Cube {
    Vec corner;   // min corner
    double side = 0.0;

    Vec center() const;
    bool contains(const Vec& x) const;       // half-open [corner, corner+side)
    bool intersects_closed(const Cube& o) const;
};

// Cube validated against the dyadic grid Q_side: side dyadic, corner an
// integer multiple of side.
struct DyadicCube : Cube {
    DyadicCube() = default;
    DyadicCube(Vec corner_, double side_);
};

// ---- operations -----------------------------------------------------------

// All caps whose half-open grid cell intersects the open unit ball B^n(0,1),
// ordered lexicographically by index.  Errors if D < 2 or not a power of two.
std::vector<Cap> build_cap_partition(const Ambient& amb);

// Index of the cap cell containing xi (componentwise floor), or nullopt when
// the cell does not meet the unit ball.
std::optional<std::vector<long>> cap_index_of(const Vec& xi, long D);

// Euclidean distance from a unit vector to its projection onto V.
double dist_to_subspace(const Vec& v, const Subspace& V);

// Theta_{D,V}: caps with dist(e(theta), V) <= 1/D.  Preserves input order.
std::vector<Cap> caps_near_subspace(const std::vector<Cap>& caps, const Subspace& V, long D);

// Theta_D(V_1..V_A): caps with dist(e(theta), V_a) > 1/D for every a.
std::vector<Cap> caps_avoiding(const std::vector<Cap>& caps,
                               const std::vector<Subspace>& tuple, long D);

// The (region.side/side)^{n+1} aligned subcubes, lexicographic by corner.
std::vector<DyadicCube> dyadic_cubes(const DyadicCube& region, double side);

// Same center, side multiplied by factor >= 1.
Cube dilate(const Cube& u, double factor);

enum class CandidateStrategy {
    NormalsOnly,   // spans of d-subsets of cap normals
    Mixed,         // normals + coordinate subspaces + random Grassmannian samples
};

struct CandidateOptions {
    CandidateStrategy strategy = CandidateStrategy::Mixed;
    int budget = 64;          // cap on normal-subset spans
    int random_samples = 8;   // Gaussian-frame samples (Mixed only)
    uint64_t seed = 0;
    const std::vector<double>* weight_hint = nullptr;  // per cap, largest first
};

// Deterministic finite stand-in for the Grassmannian minimization domain.
std::vector<Subspace> candidate_subspaces(const std::vector<Cap>& caps, int d,
                                          const CandidateOptions& opts);

// True when all principal angles between equal-dimension subspaces are below
// ~1e-9 (used for dedupe).
bool same_subspace(const Subspace& a, const Subspace& b, double tol = 1e-9);

}  // namespace declab
