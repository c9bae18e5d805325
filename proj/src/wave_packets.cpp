#include "declab/wave_packets.hpp"

#include <algorithm>
#include <cmath>

namespace declab {

std::vector<Vec> cap_frame(const Cap& cap) {
    const int dim = static_cast<int>(cap.normal.size());
    std::vector<Vec> rows;
    rows.reserve(dim + 1);
    rows.push_back(cap.normal);
    for (int i = 0; i < dim; ++i) {
        Vec e(dim, 0.0);
        e[i] = 1.0;
        rows.push_back(std::move(e));
    }
    int kept = gram_schmidt(rows, 1e-9);
    require(kept == dim, "cap_frame: frame completion failed");
    // tangent axes first, e(theta) last
    std::vector<Vec> frame(rows.begin() + 1, rows.end());
    frame.push_back(rows[0]);
    return frame;
}

double Tile::spacing(const Cap& cap, int axis) {
    const int n = static_cast<int>(cap.center.size());
    double d = static_cast<double>(cap.scale);
    return axis < n ? d : d * d;
}

Tile Tile::make(const Cap& cap, std::vector<long> index) {
    const int dim = static_cast<int>(cap.normal.size());
    require(static_cast<int>(index.size()) == dim, "Tile: index dimension mismatch");
    Tile t;
    t.cap = cap;
    t.index = std::move(index);
    auto frame = cap_frame(cap);
    t.center.assign(dim, 0.0);
    for (int i = 0; i < dim; ++i)
        axpy(t.center, static_cast<double>(t.index[i]) * spacing(cap, i), frame[i]);
    return t;
}

double packet_l2_norm(const BumpGenerator& g, int n, long D) {
    double d = static_cast<double>(D);
    return std::sqrt(std::pow(d, n + 2)) * std::pow(g.l2_squared(), (n + 1) / 2.0);
}

double bump_value(const BumpGenerator& g, const Tile& tile,
                  const std::vector<Vec>& frame, const Vec& x) {
    const int dim = static_cast<int>(x.size());
    double prod = 1.0;
    for (int i = 0; i < dim; ++i) {
        double s = Tile::spacing(tile.cap, i);
        double u = dot(frame[i], x) / s - static_cast<double>(tile.index[i]);
        prod *= g(u);
    }
    return prod;
}

bool tile_dilation_intersects(const Tile& tile, const std::vector<Vec>& frame,
                              long D0, const Cube& region) {
    const int dim = static_cast<int>(region.corner.size());
    // Half-extents of T* along the frame axes.
    double half[kMaxDim];
    for (int i = 0; i < dim; ++i)
        half[i] = static_cast<double>(D0) * Tile::spacing(tile.cap, i) / 2.0;

    // Coordinate axes.
    for (int kaxis = 0; kaxis < dim; ++kaxis) {
        double r = 0.0;
        for (int i = 0; i < dim; ++i) r += half[i] * std::abs(frame[i][kaxis]);
        double c = tile.center[kaxis];
        if (c + r < region.corner[kaxis]) return false;
        if (c - r > region.corner[kaxis] + region.side) return false;
    }
    // Frame axes.
    Vec rc = region.center();
    for (int i = 0; i < dim; ++i) {
        double r = 0.0;
        for (int kaxis = 0; kaxis < dim; ++kaxis)
            r += (region.side / 2.0) * std::abs(frame[i][kaxis]);
        double c = dot(frame[i], rc);
        double tc = dot(frame[i], tile.center);
        if (tc + half[i] < c - r) return false;
        if (tc - half[i] > c + r) return false;
    }
    return true;
}

std::vector<Tile> tile_lattice(const Cap& cap, const Cube& region, long D0) {
    require(region.side > 0.0, "tile_lattice: degenerate region");
    require(D0 >= 1, "tile_lattice: D0 must be >= 1");
    const int dim = static_cast<int>(region.corner.size());
    auto frame = cap_frame(cap);
    Vec rc = region.center();

    long lo[kMaxDim], hi[kMaxDim];
    for (int i = 0; i < dim; ++i) {
        double s = Tile::spacing(cap, i);
        double proj = dot(frame[i], rc);
        double r = 0.0;
        for (int kaxis = 0; kaxis < dim; ++kaxis)
            r += (region.side / 2.0) * std::abs(frame[i][kaxis]);
        double reach = r + static_cast<double>(D0) * s / 2.0;
        lo[i] = static_cast<long>(std::floor((proj - reach) / s)) - 1;
        hi[i] = static_cast<long>(std::ceil((proj + reach) / s)) + 1;
    }

    std::vector<Tile> out;
    std::vector<long> idx(dim);
    for (int i = 0; i < dim; ++i) idx[i] = lo[i];
    for (;;) {
        Tile t = Tile::make(cap, idx);
        if (tile_dilation_intersects(t, frame, D0, region)) out.push_back(std::move(t));
        int k = dim - 1;
        while (k >= 0 && idx[k] == hi[k]) { idx[k] = lo[k]; --k; }
        if (k < 0) break;
        ++idx[k];
    }
    return out;
}

MuBucketing mu_buckets(const std::vector<WavePacket>& packets, double eps) {
    MuBucketing out;
    double max_mass = 0.0;
    for (const WavePacket& p : packets) max_mass = std::max(max_mass, p.l2_mass);
    for (const WavePacket& p : packets) {
        if (p.l2_mass <= 0.0) {
            ++out.dropped_zero_mass;
            continue;
        }
        int e = 0;
        double f = std::frexp(p.l2_mass, &e);  // mass = f * 2^e, f in [0.5, 1)
        double mu = (f == 0.5) ? std::ldexp(1.0, e - 1) : std::ldexp(1.0, e);
        MuBucket& b = out.buckets[mu];
        b.mu = mu;
        b.packets.push_back(p);
    }
    if (max_mass > 0.0 && !out.buckets.empty()) {
        long D = out.buckets.begin()->second.packets.front().tile.cap.scale;
        double threshold = std::pow(static_cast<double>(D), -1.0 / eps) * max_mass;
        for (auto& [mu, b] : out.buckets) b.paper_insignificant = mu < threshold;
    }
    return out;
}

std::vector<WavePacket> localize(const std::vector<WavePacket>& packets, const Cube& u,
                                 long D0) {
    std::vector<WavePacket> out;
    for (const WavePacket& p : packets) {
        auto frame = cap_frame(p.tile.cap);
        if (tile_dilation_intersects(p.tile, frame, D0, u)) out.push_back(p);
    }
    return out;
}

std::vector<WavePacket> localize(const MuBucket& bucket, const Cube& u, long D0) {
    return localize(bucket.packets, u, D0);
}

std::map<double, std::vector<DyadicCube>> gamma_cubes(const DyadicCube& b,
                                                      const std::vector<WavePacket>& packets,
                                                      long scale, long D0) {
    require(scale >= 1, "gamma_cubes: bad scale");
    auto cubes = dyadic_cubes(b, static_cast<double>(scale));
    std::map<double, std::vector<DyadicCube>> out;
    // Cache frames per distinct cap.
    std::vector<std::vector<Vec>> frames(packets.size());
    for (size_t i = 0; i < packets.size(); ++i) frames[i] = cap_frame(packets[i].tile.cap);
    for (const DyadicCube& q : cubes) {
        long count = 0;
        for (size_t i = 0; i < packets.size(); ++i)
            if (tile_dilation_intersects(packets[i].tile, frames[i], D0, q)) ++count;
        if (count == 0) continue;
        int e = 0;
        double f = std::frexp(static_cast<double>(count), &e);
        double gamma = (f == 0.5) ? std::ldexp(1.0, e - 1) : std::ldexp(1.0, e);
        out[gamma].push_back(q);
    }
    return out;
}

double bernstein_ratio(const WavePacket& packet, double p, int n, const BumpGenerator& g) {
    require(std::abs(packet.coefficient) > 0.0, "bernstein_ratio: zero packet");
    require(p >= 2.0, "bernstein_ratio: p must be >= 2");
    // Separable profile: both norms factor into 1D quadratures of the
    // generator, and the D powers cancel against the normalization.
    double gp = g.lp_integral(p);
    double g2 = g.l2_squared();
    double e = static_cast<double>(n + 1);
    return std::pow(gp, e / p) / std::pow(g2, e / 2.0);
}

}  // namespace declab
