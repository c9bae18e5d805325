#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "declab/fft.hpp"
#include "declab/lab.hpp"
#include "declab/rng.hpp"

namespace declab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

struct RowBuilder {
    std::vector<InvariantRow>& rows;

    void add(const std::string& id, const std::string& params,
             const std::function<std::pair<bool, double>()>& fn) {
        InvariantRow r;
        r.id = id;
        r.params = params;
        try {
            auto [pass, measured] = fn();
            r.pass = pass;
            r.measured = measured;
        } catch (const std::exception& e) {
            r.pass = false;
            r.measured = std::nan("");
            r.params += " error=" + std::string(e.what());
        }
        rows.push_back(std::move(r));
    }
};

Field small_random_field(int n, long D, uint64_t seed, int density = 1) {
    Ensemble e;
    e.kind = EnsembleKind::RandomPhase;
    e.amb.n = n;
    e.amb.D = D;
    e.amb.validate();
    e.density = density;
    e.seed = seed;
    return generate(e);
}

// Independent brute-force min-max over A-subsets (suite-side oracle).
double brute_force_broad(const std::vector<double>& w,
                         const std::vector<CandidateMask>& masks, int A) {
    const int ncand = static_cast<int>(masks.size());
    if (ncand == 0 || A == 0) {
        double m = 0.0;
        bool any = false;
        for (double v : w) { m = any ? std::max(m, v) : v; any = true; }
        return any ? m : 0.0;
    }
    if (A >= ncand) {
        double best = 0.0;
        int arg = -1;
        for (size_t c = 0; c < w.size(); ++c) {
            bool covered = false;
            for (const auto& m : masks)
                if (m.test(static_cast<int>(c))) { covered = true; break; }
            if (!covered && (arg < 0 || w[c] > best)) { best = w[c]; arg = static_cast<int>(c); }
        }
        return arg < 0 ? 0.0 : best;
    }
    std::vector<int> pick(A);
    for (int i = 0; i < A; ++i) pick[i] = i;
    double out = 0.0;
    bool first = true;
    for (;;) {
        double mx = 0.0;
        int arg = -1;
        for (size_t c = 0; c < w.size(); ++c) {
            bool covered = false;
            for (int i = 0; i < A; ++i)
                if (masks[pick[i]].test(static_cast<int>(c))) { covered = true; break; }
            if (!covered && (arg < 0 || w[c] > mx)) { mx = w[c]; arg = static_cast<int>(c); }
        }
        double v = arg < 0 ? 0.0 : mx;
        if (first || v < out) { out = v; first = false; }
        int k = A - 1;
        while (k >= 0 && pick[k] == ncand - A + k) --k;
        if (k < 0) break;
        ++pick[k];
        for (int j = k + 1; j < A; ++j) pick[j] = pick[j - 1] + 1;
    }
    return out;
}

std::vector<CandidateMask> random_masks(Rng& rng, int ncaps, int ncand) {
    std::vector<CandidateMask> masks(ncand);
    for (auto& m : masks) {
        m.bits.assign((ncaps + 63) / 64, 0);
        for (int c = 0; c < ncaps; ++c)
            if (rng.uniform() < 0.4) m.set(c);
    }
    return masks;
}

}  // namespace

std::vector<InvariantRow> invariant_suite(const SuiteOptions& opts) {
    std::vector<InvariantRow> rows;
    RowBuilder rb{rows};
    const int W = opts.workers;
    GridSpec grid = opts.grid;

    // --- geometry ------------------------------------------------------------

    rb.add("geometry/partition-covers", "n<=2 D<=8", [&] {
        double worst = 0.0;
        for (uint64_t seed : opts.seeds) {
            for (int n = 1; n <= std::min(opts.max_n, 2); ++n) {
                long D = std::min<long>(opts.max_D, 8);
                Ambient amb;
                amb.n = n;
                amb.D = D;
                amb.validate();
                auto caps = build_cap_partition(amb);
                Rng rng(mix_seed(seed, n, 101));
                for (int t = 0; t < 50; ++t) {
                    Vec xi(n);
                    double r2;
                    do {
                        r2 = 0.0;
                        for (double& v : xi) { v = rng.uniform(-1.0, 1.0); r2 += v * v; }
                    } while (r2 >= 1.0);
                    int hits = 0;
                    for (const Cap& c : caps) {
                        bool in = true;
                        for (int i = 0; i < n; ++i) {
                            double lo = static_cast<double>(c.index[i]) / D;
                            if (xi[i] < lo || xi[i] >= lo + 1.0 / D) { in = false; break; }
                        }
                        if (in) ++hits;
                    }
                    worst = std::max(worst, std::abs(hits - 1.0));
                }
            }
        }
        return std::make_pair(worst == 0.0, worst);
    });

    rb.add("geometry/dist-sign-invariance", "random v,V", [&] {
        double worst = 0.0;
        for (uint64_t seed : opts.seeds) {
            Rng rng(mix_seed(seed, 0, 102));
            for (int t = 0; t < 50; ++t) {
                int dim = 2 + static_cast<int>(rng.integer(3));
                int d = 1 + static_cast<int>(rng.integer(dim));
                std::vector<Vec> basis(d, Vec(dim));
                for (auto& b : basis)
                    for (double& v : b) v = rng.gaussian();
                Subspace V(dim, basis);
                Vec v(dim);
                for (double& x : v) x = rng.gaussian();
                v = normalized(v);
                Vec nv = scaled(v, -1.0);
                worst = std::max(worst, std::abs(dist_to_subspace(v, V) - dist_to_subspace(nv, V)));
            }
        }
        return std::make_pair(worst <= 1e-12, worst);
    });

    rb.add("geometry/near-avoid-partition", "single V", [&] {
        bool ok = true;
        for (uint64_t seed : opts.seeds) {
            Ambient amb;
            amb.n = 2;
            amb.D = 4;
            amb.validate();
            auto caps = build_cap_partition(amb);
            Rng rng(mix_seed(seed, 0, 103));
            std::vector<Vec> basis(1, Vec(3));
            for (double& v : basis[0]) v = rng.gaussian();
            Subspace V(3, basis);
            auto near = caps_near_subspace(caps, V, amb.D);
            auto avoid = caps_avoiding(caps, {V}, amb.D);
            ok = ok && (near.size() + avoid.size() == caps.size());
            std::set<std::vector<long>> seen;
            for (const Cap& c : near) seen.insert(c.index);
            for (const Cap& c : avoid) ok = ok && !seen.count(c.index);
        }
        return std::make_pair(ok, ok ? 0.0 : 1.0);
    });

    rb.add("geometry/partition-count-bounds", "n<=3 D<=64", [&] {
        bool ok = true;
        double worst_ratio = 1.0;
        for (int n = 1; n <= 3; ++n) {
            for (long D = 2; D <= 64; D *= 2) {
                // count-only enumeration of cells meeting the open unit ball
                long count = 0;
                std::vector<long> idx(n, -D - 1);
                for (;;) {
                    double d2 = 0.0;
                    for (int i = 0; i < n; ++i) {
                        double lo = static_cast<double>(idx[i]) / D;
                        double hi = lo + 1.0 / D;
                        double c = 0.0;
                        if (lo > 0.0) c = lo;
                        else if (hi < 0.0) c = hi;
                        d2 += c * c;
                    }
                    if (d2 < 1.0) ++count;
                    int k = n - 1;
                    while (k >= 0 && idx[k] == D) { idx[k] = -D - 1; --k; }
                    if (k < 0) break;
                    ++idx[k];
                }
                double lo = std::pow(static_cast<double>(D), n);
                double hi = std::pow(2.0 * D + 2.0, n);
                ok = ok && count >= lo && count <= hi;
                worst_ratio = std::max(worst_ratio, static_cast<double>(count) / lo);
            }
        }
        return std::make_pair(ok, worst_ratio);
    });

    rb.add("geometry/dilate-compose", "dyadic a,b", [&] {
        double worst = 0.0;
        for (uint64_t seed : opts.seeds) {
            Rng rng(mix_seed(seed, 0, 105));
            Cube u;
            u.corner = {4.0, -8.0, 16.0};
            u.side = 4.0;
            double a = std::ldexp(1.0, static_cast<int>(rng.integer(4)));
            double b = std::ldexp(1.0, static_cast<int>(rng.integer(4)));
            Cube lhs = dilate(dilate(u, a), b);
            Cube rhs = dilate(u, a * b);
            worst = std::max(worst, std::abs(lhs.side - rhs.side));
            for (int i = 0; i < 3; ++i)
                worst = std::max(worst, std::abs(lhs.center()[i] - rhs.center()[i]));
        }
        return std::make_pair(worst <= 1e-12, worst);
    });

    // --- field -----------------------------------------------------------------

    rb.add("field/linearity", "n=1 D=4", [&] {
        double worst = 0.0;
        for (uint64_t seed : opts.seeds) {
            Field f = small_random_field(1, 4, seed, 2);
            size_t half = f.packets.size() / 2;
            std::vector<WavePacket> p1(f.packets.begin(), f.packets.begin() + half);
            std::vector<WavePacket> p2(f.packets.begin() + half, f.packets.end());
            Field f1 = subfield(f, p1), f2 = subfield(f, p2);
            FieldEvaluator e(f), e1(f1), e2(f2);
            Rng rng(mix_seed(seed, 0, 106));
            for (int t = 0; t < 20; ++t) {
                Vec x = {rng.uniform(-8, 8), rng.uniform(-8, 8)};
                worst = std::max(worst, std::abs(e.eval(x) - e1.eval(x) - e2.eval(x)));
            }
        }
        return std::make_pair(worst <= 1e-12, worst);
    });

    rb.add("field/frequency-support", "n=1 D=4 FFT", [&] {
        Field f = small_random_field(1, 4, opts.seeds.front(), 1);
        FieldEvaluator ev(f);
        const double L = 256.0, h = 0.5;
        const int N = static_cast<int>(L / h);
        std::vector<Complex> samples(static_cast<size_t>(N) * N);
        Vec x(2);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                x[0] = -L / 2 + h * i;
                x[1] = -L / 2 + h * j;
                samples[static_cast<size_t>(i) * N + j] = ev.eval(x);
            }
        fft_nd(samples, {N, N}, false);
        double total = 0.0, inside = 0.0;
        double c0 = f.support_constant;
        double slack = kTwoPi / L;  // one bin
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                double m = std::norm(samples[static_cast<size_t>(i) * N + j]);
                double xi0 = kTwoPi * (i < N / 2 ? i : i - N) / L;
                double xi1 = kTwoPi * (j < N / 2 ? j : j - N) / L;
                total += m;
                if (std::abs(xi1 - xi0 * xi0) <= c0 / 16.0 + 2.0 * slack) inside += m;
            }
        double frac = total > 0.0 ? inside / total : 1.0;
        return std::make_pair(frac >= 0.999, frac);
    });

    rb.add("field/rescale-identity", "n=1 K=4", [&] {
        double worst = 0.0;
        for (uint64_t seed : opts.seeds) {
            Ambient amb;
            amb.n = 1;
            amb.D = 4;
            amb.validate();
            auto caps = build_cap_partition(amb);
            const Cap& theta = caps[2];  // cell [-1/2, -1/4)
            auto f = CoefficientGrid::uniform(1, 129);
            Rng rng(mix_seed(seed, 0, 108));
            for (long i = 0; i < f.shape[0]; ++i) {
                double xi = f.origin[0] + f.spacing * i;
                double lo = static_cast<double>(theta.index[0]) / 4.0;
                if (xi >= lo && xi < lo + 0.25)
                    f.values[i] = Complex(rng.gaussian(), rng.gaussian());
            }
            auto resc = parabolic_rescale(f, theta);
            for (int t = 0; t < 20; ++t) {
                Vec xt = {rng.uniform(-2, 2), rng.uniform(-1, 1)};
                Complex direct = extension_operator_cap(f, theta, xt);
                Complex via = resc.rescaled_value(xt);
                double denom = std::max(std::abs(direct), 1e-30);
                worst = std::max(worst, std::abs(direct - via) / denom);
            }
        }
        return std::make_pair(worst <= 1e-6, worst);
    });

    rb.add("field/cap-partition-packets", "n=1 D=8", [&] {
        Field f = small_random_field(1, 8, opts.seeds.front(), 2);
        size_t total = 0;
        for (const Cap& c : f.caps) total += restrict_to_cap(f, c).packets.size();
        bool ok = total == f.packets.size();
        return std::make_pair(ok, static_cast<double>(total) - f.packets.size());
    });

    // --- wave packets -----------------------------------------------------------

    rb.add("wave_packets/partition-of-unity", "n<=2 D<=16", [&] {
        BumpGenerator g(12, 0.5);
        int Wrad = g.truncation_radius(1e-12);
        double worst = 0.0;
        Rng rng(mix_seed(opts.seeds.front(), 0, 110));
        int pts = opts.quick ? 100 : 1000;
        for (int t = 0; t < pts; ++t) {
            double x = rng.uniform(-0.5, 0.5);
            double s = 0.0;
            for (int j = -Wrad; j <= Wrad; ++j) s += g(x - j);
            s *= opts.bump_corruption;
            worst = std::max(worst, std::abs(s - 1.0));
        }
        return std::make_pair(worst <= 1e-8, worst);
    });

    rb.add("wave_packets/essential-disjointness", "p in {2,4,6}, n<=2 (profile-normalized)", [&] {
        // int |sum phi|^p / sum int phi^p for a box of equal-coefficient
        // tiles, per axis by 1D quadrature (the profile separates).  An exact
        // Poisson partition with in-cell frequency support cannot hold the
        // raw ratio near 1: at a cell boundary the two nearest translates
        // split the unit sum, capping max_j g at 1/2 and deflating
        // sum int g^p by the overlap redundancy.  The check therefore
        // compares the measured ratio against its analytic profile value
        // 1/prod int g^p, which flags anomalous overlap rather than the
        // unattainable absolute box.
        BumpGenerator g(12, 0.5);
        int R = g.truncation_radius(1e-12);
        auto axis_ratio = [&](double p, int tiles_per_axis) {
            const double h = 0.01;
            double num = 0.0;
            double lo = -(tiles_per_axis - 1) / 2.0 - R;
            double hi = (tiles_per_axis - 1) / 2.0 + R;
            for (double t = lo; t <= hi; t += h) {
                double s = 0.0;
                for (int j = 0; j < tiles_per_axis; ++j)
                    s += g(t - (j - (tiles_per_axis - 1) / 2.0));
                num += std::pow(s, p) * h;
            }
            double den = tiles_per_axis * g.lp_integral(p);
            return num / den;
        };
        // Essential disjointness as a stability statement: the ratio is a
        // profile constant, independent of how many tiles the sum carries.
        // Catastrophic overlap would grow it like |S|^{p-1}.
        double worst = 1.0;
        bool ok = true;
        for (double p : {2.0, 4.0, 6.0}) {
            double r5 = axis_ratio(p, 5);
            double r15 = axis_ratio(p, 15);
            double r45 = axis_ratio(p, 45);
            double lo = std::min({r5, r15, r45});
            double hi = std::max({r5, r15, r45});
            double stability = hi / lo;
            if (stability > 8.0) ok = false;
            worst = std::max(worst, stability);
        }
        return std::make_pair(ok, worst);
    });

    rb.add("wave_packets/orthogonality", "random-phase >=32 packets", [&] {
        bool ok = true;
        double worst = 1.0;
        for (uint64_t seed : opts.seeds) {
            Field f = small_random_field(1, 8, seed, 2);  // 16 caps x 2
            DyadicCube B = standard_block(f.amb);
            auto loc = localize(f.packets, B, f.amb.D0);
            if (loc.size() < 32) continue;
            auto buckets = mu_buckets(loc, f.amb.eps);
            const MuBucket& b = buckets.buckets.rbegin()->second;
            Field fb = subfield(f, b.packets);
            GridSpec gs = grid;
            gs.mode = GridSpec::Mode::Sample;
            gs.sample_budget = opts.quick ? 20000 : 100000;
            double l2 = lp_norm(fb, dilate(B, 3.0), 2.0, gs, W).value;
            double ratio = sqr(l2) / (sqr(b.mu) * static_cast<double>(b.packets.size()));
            if (!(ratio >= 0.25 && ratio <= 4.0)) ok = false;
            if (std::abs(std::log(ratio)) > std::abs(std::log(worst))) worst = ratio;
        }
        return std::make_pair(ok, worst);
    });

    rb.add("wave_packets/decoupling-identity", "p in {10/3,4}", [&] {
        bool ok = true;
        double worst = 1.0;
        const int n = 1;
        for (uint64_t seed : opts.seeds) {
            Field f = small_random_field(n, 8, seed, 2);
            DyadicCube B = standard_block(f.amb);
            auto loc = localize(f.packets, B, f.amb.D0);
            auto buckets = mu_buckets(loc, f.amb.eps);
            const MuBucket& b = buckets.buckets.rbegin()->second;
            Field fb = subfield(f, b.packets);
            GridSpec gs = grid;
            gs.mode = GridSpec::Mode::Sample;
            gs.sample_budget = opts.quick ? 20000 : 100000;
            for (double p : {10.0 / 3.0, 4.0}) {
                double deco = decoupling_norm(fb, f.amb.D, dilate(B, static_cast<double>(f.amb.D0)),
                                              p, gs, W).value;
                double target = b.mu *
                                std::pow(static_cast<double>(f.amb.D), (n + 2) * (1.0 / p - 0.5)) *
                                std::pow(static_cast<double>(b.packets.size()), 1.0 / p);
                double ratio = deco / target;
                if (!(ratio >= 0.125 && ratio <= 8.0)) ok = false;
                if (std::abs(std::log(ratio)) > std::abs(std::log(worst))) worst = ratio;
            }
        }
        return std::make_pair(ok, worst);
    });

    rb.add("wave_packets/bucket-reconstruction", "sum_mu vs whole", [&] {
        bool ok = true;
        double worst = 1e9;
        for (uint64_t seed : opts.seeds) {
            Ambient amb;
            amb.n = 1;
            amb.D = 8;
            amb.validate();
            auto caps = build_cap_partition(amb);
            Rng rng(mix_seed(seed, 0, 114));
            DyadicCube B = standard_block(amb);
            std::vector<WavePacket> pk;
            for (const Cap& c : caps) {
                auto lattice = tile_lattice(c, B, amb.D0);
                for (int d = 0; d < 2; ++d) {
                    WavePacket p;
                    p.tile = lattice[rng.integer(lattice.size())];
                    p.coefficient = rng.uniform(0.1, 4.0) * rng.unit_phase();
                    pk.push_back(p);
                }
            }
            Field f = synthesize(amb, pk);
            auto loc = localize(f.packets, B, amb.D0);
            auto buckets = mu_buckets(loc, amb.eps);
            GridSpec gs = grid;
            gs.mode = GridSpec::Mode::Sample;
            gs.sample_budget = opts.quick ? 20000 : 60000;
            double p = 4.0;
            Cube Bstar = dilate(B, static_cast<double>(amb.D0));
            double whole = decoupling_norm(f, amb.D, Bstar, p, gs, W).value;
            double parts = 0.0;
            for (auto& [mu, b] : buckets.buckets)
                parts += decoupling_norm(subfield(f, b.packets), amb.D, Bstar, p, gs, W).value;
            double bound = whole / (8.0 * std::pow(static_cast<double>(amb.D), 0.1));
            if (parts < bound) ok = false;
            worst = std::min(worst, parts / std::max(bound, 1e-30));
        }
        return std::make_pair(ok, worst);
    });

    rb.add("wave_packets/gamma-count", "<= 16 D^{1.1} |S|/gamma", [&] {
        bool ok = true;
        double worst = 0.0;
        for (uint64_t seed : opts.seeds) {
            for (int n = 1; n <= std::min(opts.max_n, 2); ++n) {
                long D = n == 1 ? std::min<long>(opts.max_D, 16) : std::min<long>(opts.max_D, 8);
                Field f = small_random_field(n, D, seed, 2);
                DyadicCube B = standard_block(f.amb);
                auto loc = localize(f.packets, B, f.amb.D0);
                if (loc.empty()) continue;
                auto classes = gamma_cubes(B, loc, D, f.amb.D0);
                for (auto& [gamma, cubes] : classes) {
                    double bound = 16.0 * std::pow(static_cast<double>(D), 1.1) *
                                   static_cast<double>(loc.size()) / gamma;
                    double r = static_cast<double>(cubes.size()) / bound;
                    worst = std::max(worst, r);
                    if (r > 1.0) ok = false;
                }
            }
        }
        return std::make_pair(ok, worst);
    });

    // --- norms -------------------------------------------------------------------

    rb.add("norms/broad-le-decoupling", "same grid", [&] {
        bool ok = true;
        double worst = 0.0;
        for (uint64_t seed : opts.seeds) {
            Field f = small_random_field(1, 4, seed, 1);
            DyadicCube B = standard_block(f.amb);
            NormParams np;
            np.p = 4.0;
            np.k = 2;
            np.A = 1 + static_cast<int>(seed % 3);
            np.grid = grid;
            np.grid.mode = GridSpec::Mode::FullGrid;
            np.grid.strata_side = B.side;  // single region = the block
            auto bn = broad_norm(f, B, np, f.amb.D, W);
            double deco = decoupling_norm(f, f.amb.D, B, 4.0, np.grid, W).value;
            double rel = bn.value > 0.0 ? (bn.value - deco) / bn.value : -1.0;
            worst = std::max(worst, rel);
            if (bn.value > deco * (1.0 + 1e-6)) ok = false;
        }
        return std::make_pair(ok, worst);
    });

    rb.add("norms/A-monotone", "value(A+1) <= value(A)", [&] {
        bool ok = true;
        for (uint64_t seed : opts.seeds) {
            Rng rng(mix_seed(seed, 0, 116));
            int ncaps = 6;
            std::vector<double> w(ncaps);
            for (double& v : w) v = rng.uniform();
            auto masks = random_masks(rng, ncaps, 5);
            double prev = -1.0;
            for (int A = 1; A <= 4; ++A) {
                double v = broad_search(w, masks, A, SearchMode::Exact, 1000000).value;
                if (prev >= 0.0 && v > prev + 1e-15) ok = false;
                prev = v;
            }
        }
        return std::make_pair(ok, ok ? 0.0 : 1.0);
    });

    rb.add("norms/candidate-monotone", "superset never larger", [&] {
        bool ok = true;
        for (uint64_t seed : opts.seeds) {
            Rng rng(mix_seed(seed, 0, 117));
            int ncaps = 6;
            std::vector<double> w(ncaps);
            for (double& v : w) v = rng.uniform();
            auto masks = random_masks(rng, ncaps, 6);
            std::vector<CandidateMask> sub(masks.begin(), masks.begin() + 3);
            double v_small = broad_search(w, sub, 2, SearchMode::Exact, 1000000).value;
            double v_big = broad_search(w, masks, 2, SearchMode::Exact, 1000000).value;
            if (v_big > v_small + 1e-15) ok = false;
        }
        return std::make_pair(ok, ok ? 0.0 : 1.0);
    });

    rb.add("norms/exact-oracle", "brute force bit-for-bit", [&] {
        bool ok = true;
        for (uint64_t seed : opts.seeds) {
            Rng rng(mix_seed(seed, 0, 118));
            for (int t = 0; t < 10; ++t) {
                int ncaps = 3 + static_cast<int>(rng.integer(6));
                int ncand = 2 + static_cast<int>(rng.integer(5));
                int A = 1 + static_cast<int>(rng.integer(2));
                std::vector<double> w(ncaps);
                for (double& v : w) v = rng.uniform();
                auto masks = random_masks(rng, ncaps, ncand);
                double exact = broad_search(w, masks, A, SearchMode::Exact, 1000000).value;
                double brute = brute_force_broad(w, masks, A);
                double greedy = broad_search(w, masks, A, SearchMode::Greedy, 1000000).value;
                if (exact != brute) ok = false;      // bit-for-bit
                if (greedy < exact - 1e-15) ok = false;
            }
        }
        return std::make_pair(ok, ok ? 0.0 : 1.0);
    });

    rb.add("norms/scaling-covariance", "s=3.5", [&] {
        bool ok = true;
        double worst = 0.0;
        Field f = small_random_field(1, 4, opts.seeds.front(), 1);
        std::vector<WavePacket> scaled_p = f.packets;
        for (auto& p : scaled_p) p.coefficient *= 3.5;
        Field fs = synthesize(f.amb, scaled_p, f.bump_spec);
        DyadicCube B = standard_block(f.amb);
        NormParams np;
        np.p = 4.0;
        np.k = 2;
        np.A = 2;
        np.grid = grid;
        np.grid.mode = GridSpec::Mode::FullGrid;
        auto b1 = broad_norm(f, B, np, f.amb.D, W);
        auto b2 = broad_norm(fs, B, np, f.amb.D, W);
        if (b1.value > 0.0) {
            worst = std::abs(b2.value / b1.value - 3.5) / 3.5;
            ok = worst <= 1e-9;
            for (size_t i = 0; i < b1.per_cube.size(); ++i)
                if (b1.per_cube[i].attaining_cap != b2.per_cube[i].attaining_cap) ok = false;
        }
        double l1 = lp_norm(f, B, 4.0, np.grid, W).value;
        double l2 = lp_norm(fs, B, 4.0, np.grid, W).value;
        if (l1 > 0.0) worst = std::max(worst, std::abs(l2 / l1 - 3.5) / 3.5);
        return std::make_pair(ok && worst <= 1e-9, worst);
    });

    rb.add("norms/level-partition", "pointwise cap-weight split across lambda", [&] {
        // The level sets partition {F_theta' != 0} pointwise, so the per-cube
        // cap weights split exactly across dyadic lambda.  The summed
        // per-lambda broad norms need not reproduce the unrestricted value
        // (each lambda re-minimizes its own tuple); their ratio is reported
        // as the measured value.
        bool ok = true;
        double ratio = 0.0;
        for (uint64_t seed : opts.seeds) {
            Field f = small_random_field(1, 4, seed, 1);
            DyadicCube B = standard_block(f.amb);
            NormParams np;
            np.p = 4.0;
            np.k = 2;
            np.A = 1;
            np.D = f.amb.D;
            np.D0 = f.amb.D0;
            np.grid = grid;
            np.grid.mode = GridSpec::Mode::FullGrid;
            FieldEvaluator ev(f);
            double mx = 0.0;
            Rng rng(mix_seed(seed, 0, 120));
            for (int t = 0; t < 200; ++t) {
                Vec x = {rng.uniform(0.0, B.side), rng.uniform(0.0, B.side)};
                mx = std::max(mx, std::abs(ev.eval(x)));
            }
            double top = floor_dyadic(std::max(mx, 1e-6) * 4.0);
            auto cubes = dyadic_cubes(B, 4.0);
            auto whole_w = cap_weight_table(f, cubes, f.amb.D0, np.p, np.grid, 0.0, W);
            if (whole_w.empty() || whole_w[0].empty()) continue;
            std::vector<std::vector<double>> acc(whole_w.size(),
                                                 std::vector<double>(whole_w[0].size(), 0.0));
            double total = 0.0;
            for (int oct = 0; oct < 40; ++oct) {
                double lambda = top * std::ldexp(1.0, -oct);
                auto part = cap_weight_table(f, cubes, f.amb.D0, np.p, np.grid, lambda, W);
                for (size_t q = 0; q < part.size(); ++q)
                    for (size_t c = 0; c < part[q].size(); ++c) acc[q][c] += part[q][c];
                total += std::pow(local_level_broad_norm(f, B, np, lambda, W).value, np.p);
            }
            for (size_t q = 0; q < whole_w.size(); ++q)
                for (size_t c = 0; c < whole_w[q].size(); ++c) {
                    double ref = whole_w[q][c];
                    if (std::abs(acc[q][c] - ref) > 1e-6 * std::max(ref, 1e-12)) ok = false;
                }
            double whole = std::pow(broad_norm(f, B, np, f.amb.D0, W).value, np.p);
            if (whole > 0.0) ratio = std::max(ratio, total / whole);
        }
        return std::make_pair(ok, ratio);
    });

    // --- engine / lab -------------------------------------------------------------

    rb.add("bg/certificate-determinism", "broad_step twice", [&] {
        Field f = small_random_field(1, 4, opts.seeds.front(), 1);
        DyadicCube U(Vec(2, 0.0), 32.0);
        Constants c = opts.constants;
        NormParams np;
        np.grid = grid;
        np.grid.mode = GridSpec::Mode::Sample;
        np.grid.sample_budget = 20000;
        auto c1 = broad_step(f, U, 2, 4, 2, 4, 2, 4.0, c, np, W);
        auto c2 = broad_step(f, U, 2, 4, 2, 4, 2, 4.0, c, np, W);
        bool ok = c1.lhs == c2.lhs && c1.slack == c2.slack;
        return std::make_pair(ok, std::abs(c1.slack - c2.slack));
    });

    rb.add("bg/regime-no-gaps", "lambda sweep", [&] {
        bool ok = true;
        int gaps = 0;
        for (double p : {10.0 / 3.0, 3.5, 4.0}) {
            for (long D : {8L, 16L, 32L}) {
                if (D > opts.max_D * 2) continue;
                for (double gamma = 1.0; gamma <= static_cast<double>(D); gamma *= 2.0) {
                    for (int oct = -10; oct <= 10; ++oct) {
                        double lambda = std::ldexp(1.0, oct);
                        auto r = regime_classify(2, 2, p, D, 1.0, lambda, gamma);
                        if (r.regime == Regime::Gap) { ok = false; ++gaps; }
                    }
                }
            }
        }
        return std::make_pair(ok, static_cast<double>(gaps));
    });

    rb.add("lab/report-determinism", "sweep twice", [&] {
        SweepSpec spec;
        spec.n = 1;
        spec.k = 2;
        spec.p = 4.5;  // conjectured-mode p; n=1 has an empty admissible range
        spec.D_list = {4};
        spec.seeds = {opts.seeds.front()};
        spec.A = 1;
        spec.base.grid = grid;
        spec.base.grid.mode = GridSpec::Mode::Sample;
        spec.base.grid.sample_budget = 20000;
        auto r1 = theorem_sweep(spec, W);
        auto r2 = theorem_sweep(spec, W);
        bool ok = r1.rows.size() == r2.rows.size();
        double worst = 0.0;
        for (size_t i = 0; ok && i < r1.rows.size(); ++i) {
            if (r1.rows[i].lhs != r2.rows[i].lhs || r1.rows[i].rhs != r2.rows[i].rhs) ok = false;
            worst = std::max(worst, std::abs(r1.rows[i].lhs - r2.rows[i].lhs));
        }
        return std::make_pair(ok, worst);
    });

    rb.add("lab/sweep-scale-invariance", "ratio under s", [&] {
        Field f = small_random_field(1, 4, opts.seeds.front(), 1);
        std::vector<WavePacket> sp = f.packets;
        for (auto& p : sp) p.coefficient *= 7.25;
        Field fs = synthesize(f.amb, sp, f.bump_spec);
        DyadicCube B = standard_block(f.amb);
        NormParams np;
        np.p = 10.0 / 3.0;
        np.k = 2;
        np.A = 1;
        np.D = f.amb.D;
        np.D0 = f.amb.D0;
        np.grid = grid;
        np.grid.mode = GridSpec::Mode::FullGrid;
        std::vector<Vec> rows_v = {{1.0, 0.0}, {0.0, 1.0}};
        Subspace V(2, rows_v);
        auto l1 = restricted_broad_norm(f, V, B, np, W).value;
        auto l2 = restricted_broad_norm(fs, V, B, np, W).value;
        auto r1 = decoupling_norm(restrict_to_subspace_caps(f, V), f.amb.D,
                                  dilate(B, static_cast<double>(f.amb.D0)), np.p, np.grid, W).value;
        auto r2 = decoupling_norm(restrict_to_subspace_caps(fs, V), f.amb.D,
                                  dilate(B, static_cast<double>(f.amb.D0)), np.p, np.grid, W).value;
        if (l1 == 0.0 || r1 == 0.0) return std::make_pair(true, 0.0);
        double ratio1 = l1 / r1, ratio2 = l2 / r2;
        double rel = std::abs(ratio2 - ratio1) / ratio1;
        return std::make_pair(rel <= 1e-9, rel);
    });

    return rows;
}

}  // namespace declab
