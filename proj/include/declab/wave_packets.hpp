#pragma once

#include <map>
#include <optional>
#include <vector>

#include "declab/bump.hpp"
#include "declab/geometry.hpp"

namespace declab {

struct Field;     // field.hpp
struct GridSpec;  // quadrature.hpp

// Orthonormal frame adapted to a cap: rows 0..n-1 span the tangent
// directions, row n is e(theta).  Deterministic in the cap alone.
std::vector<Vec> cap_frame(const Cap& cap);

// One dual box T of a cap: lattice translate j in frame coordinates, with
// spacings D (transverse) and D^2 (along the normal).
struct Tile {
    Cap cap;
    std::vector<long> index;  // in Z^{n+1}
    Vec center;               // sum_i index_i * spacing_i * frame_i

    static Tile make(const Cap& cap, std::vector<long> index);
    // spacing per frame axis: D, ..., D, D^2
    static double spacing(const Cap& cap, int axis);
};

struct WavePacket {
    Tile tile;
    Complex coefficient;
    double l2_mass = 0.0;  // |coefficient| * bump L2 norm (per-scale constant)
};

// L2 norm of one unit-coefficient packet at scale D in R^{n+1}:
// sqrt(D^{n+2}) * (int g^2)^{(n+1)/2}.
double packet_l2_norm(const BumpGenerator& g, int n, long D);

// Spatial profile phi_T(x) = prod_i g((y_i - index_i * s_i)/s_i) in the tile
// frame.  'frame' must be cap_frame(tile.cap).
double bump_value(const BumpGenerator& g, const Tile& tile,
                  const std::vector<Vec>& frame, const Vec& x);

// All tiles whose D0-dilation T* intersects the region (closed, separating
// axis test on face normals), ordered by index.
std::vector<Tile> tile_lattice(const Cap& cap, const Cube& region, long D0);

// Does the D0-dilated tile T* intersect the cube (closed sets)?
bool tile_dilation_intersects(const Tile& tile, const std::vector<Vec>& frame,
                              long D0, const Cube& region);

struct MuBucket {
    double mu = 0.0;  // dyadic; members obey mu/2 < l2_mass <= mu
    std::vector<WavePacket> packets;
    bool paper_insignificant = false;  // mu below D^{-1/eps} * max mass
};

struct MuBucketing {
    std::map<double, MuBucket> buckets;
    int dropped_zero_mass = 0;
};

MuBucketing mu_buckets(const std::vector<WavePacket>& packets, double eps = 0.1);

// S_{D,mu,U}: members of the bucket whose T* meets U.
std::vector<WavePacket> localize(const MuBucket& bucket, const Cube& u, long D0);
std::vector<WavePacket> localize(const std::vector<WavePacket>& packets, const Cube& u, long D0);

// Partition of the Q in Q_scale inside B by the dyadic class
// gamma/2 < #{packets : T* cap Q != 0} <= gamma; zero-count cubes omitted.
std::map<double, std::vector<DyadicCube>> gamma_cubes(const DyadicCube& b,
                                                      const std::vector<WavePacket>& packets,
                                                      long scale, long D0);

// ||F_{theta,T}||_p / (D^{(n+2)(1/p-1/2)} ||F_{theta,T}||_2); independent of
// the coefficient.  The profile is separable, so this reduces to 1D
// quadratures of the generator.
double bernstein_ratio(const WavePacket& packet, double p, int n, const BumpGenerator& g);

struct RedecomposeResult {
    std::vector<WavePacket> packets;  // at the new scale
    double residual = 0.0;            // ||F - sum packets||_{L2(Q)} / ||F||_{L2(Q)}
    long grid_points = 0;
};

struct RedecomposeOptions {
    double dilation = 2.0;     // fit box = dilate(Q, max(dilation, 4))
    double spacing = 0.5;      // sample spacing (must resolve |xi| <= sqrt(n)+1)
    long max_grid_points = 100'000'000;
    double freq_window = 0.0;  // 0 = use the field's support constant c0
};

// Wave packet decomposition of F at the coarser scale D on the cube Q:
// samples F on a periodized grid, projects onto scale-D caps by discrete
// Fourier cutoff, and least-squares fits scale-D bump translates whose T*
// meets Q.  Throws a budget error naming the required grid size when the
// full grid would exceed max_grid_points.
RedecomposeResult redecompose(const Field& f, const DyadicCube& q, long D, long D0,
                              const RedecomposeOptions& opts = {});

}  // namespace declab
