#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "declab/geometry.hpp"
#include "declab/rng.hpp"

using namespace declab;

namespace {

Ambient make_amb(int n, long D) {
    Ambient a;
    a.n = n;
    a.D = D;
    a.validate();
    return a;
}

// Independent cell/ball intersection oracle: densely samples the cell.
bool cell_hits_ball_oracle(const std::vector<long>& idx, long D, int n) {
    const int steps = 32;
    double h = 1.0 / static_cast<double>(D);
    std::vector<int> grid(n, 0);
    for (;;) {
        double r2 = 0.0;
        for (int i = 0; i < n; ++i) {
            double t = static_cast<double>(grid[i]) / steps;
            double x = (static_cast<double>(idx[i]) + t) * h;
            r2 += x * x;
        }
        if (r2 < 1.0 - 1e-12) return true;
        int k = n - 1;
        while (k >= 0 && grid[k] == steps) { grid[k] = 0; --k; }
        if (k < 0) break;
        ++grid[k];
    }
    return false;
}

}  // namespace

TEST_CASE("cap partition: n=1, D=4 gives the eight half-integer centers") {
    auto caps = build_cap_partition(make_amb(1, 4));
    REQUIRE(caps.size() == 8);
    std::vector<double> expect = {-0.875, -0.625, -0.375, -0.125, 0.125, 0.375, 0.625, 0.875};
    for (size_t i = 0; i < 8; ++i) CHECK(caps[i].center[0] == doctest::Approx(expect[i]));
}

TEST_CASE("cap partition: n=2, D=2 covers all 16 cells touching the disk") {
    // oracle: enumerate cells and test intersection by dense sampling
    auto caps = build_cap_partition(make_amb(2, 2));
    long oracle = 0;
    for (long i = -3; i <= 2; ++i)
        for (long j = -3; j <= 2; ++j)
            if (cell_hits_ball_oracle({i, j}, 2, 2)) ++oracle;
    CHECK(oracle == 16);
    CHECK(caps.size() == 16);
}

TEST_CASE("cap partition: n=1, D=2 gives 4 caps; D<2 is rejected") {
    CHECK(build_cap_partition(make_amb(1, 2)).size() == 4);
    Ambient bad;
    bad.n = 1;
    bad.D = 1;
    CHECK_THROWS(build_cap_partition(bad));
    bad.D = 3;  // not a power of two
    CHECK_THROWS(build_cap_partition(bad));
}

TEST_CASE("cap normals") {
    CHECK(paraboloid_normal({0.0}) == Vec{0.0, -1.0});
    Vec v = paraboloid_normal({0.5});
    CHECK(v[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(v[1] == doctest::Approx(-1.0 / std::sqrt(2.0)));
    Vec w = paraboloid_normal({0.5, 0.0});
    CHECK(w[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(w[1] == doctest::Approx(0.0));
    CHECK(w[2] == doctest::Approx(-1.0 / std::sqrt(2.0)));
    // normals are unit and have negative last coordinate on the whole partition
    for (const Cap& c : build_cap_partition(make_amb(2, 4))) {
        CHECK(std::abs(norm2(c.normal) - 1.0) < 1e-12);
        CHECK(c.normal.back() < 0.0);
    }
}

TEST_CASE("dist_to_subspace basics and sign invariance") {
    Subspace V(2, {{1.0, 0.0}});
    CHECK(dist_to_subspace({1.0, 0.0}, V) == doctest::Approx(0.0));
    CHECK(dist_to_subspace({0.0, 1.0}, V) == doctest::Approx(1.0));
    double r = std::sqrt(2.0) / 2.0;
    CHECK(dist_to_subspace({r, r}, V) == doctest::Approx(r));

    Rng rng(7);
    for (int t = 0; t < 200; ++t) {
        int dim = 2 + static_cast<int>(rng.integer(3));
        int d = 1 + static_cast<int>(rng.integer(dim));
        std::vector<Vec> rows(d, Vec(dim));
        for (auto& b : rows)
            for (double& x : b) x = rng.gaussian();
        Subspace W(dim, rows);
        Vec v(dim);
        for (double& x : v) x = rng.gaussian();
        v = normalized(v);
        CHECK(std::abs(dist_to_subspace(v, W) - dist_to_subspace(scaled(v, -1.0), W)) < 1e-12);
    }
}

TEST_CASE("caps_near_subspace: vertical line at D=4 keeps only the two inner caps") {
    auto caps = build_cap_partition(make_amb(1, 4));
    Subspace V(2, {{0.0, 1.0}});
    // independent arithmetic: dist of e(xi) to span{(0,1)} is |2 xi|/sqrt(1+4 xi^2)
    for (const Cap& c : caps) {
        double xi = c.center[0];
        double expect = std::abs(2.0 * xi) / std::sqrt(1.0 + 4.0 * xi * xi);
        CHECK(dist_to_subspace(c.normal, V) == doctest::Approx(expect));
    }
    auto near = caps_near_subspace(caps, V, 4);
    REQUIRE(near.size() == 2);
    CHECK(near[0].center[0] == doctest::Approx(-0.125));
    CHECK(near[1].center[0] == doctest::Approx(0.125));
    CHECK(dist_to_subspace(near[1].normal, V) == doctest::Approx(0.2425).epsilon(1e-3));
}

TEST_CASE("caps_near_subspace: full space keeps everything; an isolated normal keeps itself") {
    auto caps = build_cap_partition(make_amb(1, 4));
    Subspace full(2, {{1.0, 0.0}, {0.0, 1.0}});
    CHECK(caps_near_subspace(caps, full, 4).size() == caps.size());

    // the inner cap at -1/8; normals of edge caps crowd below 1/D of each other
    const Cap& theta0 = caps[3];
    Subspace line(2, {theta0.normal});
    // verify the premise: every other normal is farther than 1/D from the line
    for (size_t i = 0; i < caps.size(); ++i)
        if (caps[i].index != theta0.index)
            CHECK(dist_to_subspace(caps[i].normal, line) > 0.25);
    auto near = caps_near_subspace(caps, line, 4);
    REQUIRE(near.size() == 1);
    CHECK(near[0].index == theta0.index);
}

TEST_CASE("caps_avoiding: complement structure") {
    auto caps = build_cap_partition(make_amb(1, 4));
    CHECK(caps_avoiding(caps, {}, 4).size() == caps.size());

    std::vector<Subspace> all_lines;
    for (const Cap& c : caps) all_lines.push_back(Subspace(2, {c.normal}));
    CHECK(caps_avoiding(caps, all_lines, 4).empty());

    Subspace V(2, {{0.0, 1.0}});
    auto avoid = caps_avoiding(caps, {V}, 4);
    REQUIRE(avoid.size() == 6);
    for (const Cap& c : avoid) CHECK(std::abs(c.center[0]) >= 0.375);

    // near + avoiding partition the caps for any single V
    auto near = caps_near_subspace(caps, V, 4);
    CHECK(near.size() + avoid.size() == caps.size());
}

TEST_CASE("dyadic_cubes: subdivision counts and errors") {
    DyadicCube r2(Vec{0.0, 0.0}, 4.0);
    CHECK(dyadic_cubes(r2, 4.0).size() == 1);
    CHECK(dyadic_cubes(r2, 2.0).size() == 4);
    DyadicCube r3(Vec{0.0, 0.0, 0.0}, 16.0);
    CHECK(dyadic_cubes(r3, 4.0).size() == 64);
    CHECK_THROWS(dyadic_cubes(r2, 3.0));           // not dyadic
    CHECK_THROWS(dyadic_cubes(r2, 8.0));           // does not divide
    CHECK_THROWS(DyadicCube(Vec{1.0, 0.0}, 2.0));  // misaligned corner
}

TEST_CASE("dilate: identity, center preservation, composition") {
    Cube u;
    u.corner = {2.0, 2.0};
    u.side = 4.0;
    Cube same = dilate(u, 1.0);
    CHECK(same.side == 4.0);
    CHECK(same.corner == u.corner);
    Cube d = dilate(u, 2.0);
    CHECK(d.side == 8.0);
    CHECK(d.center() == u.center());
    CHECK(dilate(u, 4.0).side == 16.0);
    CHECK_THROWS(dilate(u, 0.5));

    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
        double a = std::ldexp(1.0, static_cast<int>(rng.integer(5)));
        double b = std::ldexp(1.0, static_cast<int>(rng.integer(5)));
        Cube lhs = dilate(dilate(u, a), b);
        Cube rhs = dilate(u, a * b);
        CHECK(lhs.side == doctest::Approx(rhs.side));
        CHECK(lhs.center()[0] == doctest::Approx(rhs.center()[0]));
        CHECK(lhs.center()[1] == doctest::Approx(rhs.center()[1]));
    }
}

TEST_CASE("candidate_subspaces: counts, strategies, dedupe") {
    auto caps = build_cap_partition(make_amb(1, 4));

    CandidateOptions normals_only;
    normals_only.strategy = CandidateStrategy::NormalsOnly;
    normals_only.budget = 64;
    std::vector<Cap> two(caps.begin(), caps.begin() + 2);
    CHECK(candidate_subspaces(two, 1, normals_only).size() == 2);

    // 8 caps, d=1, budget >= 8, no sampling -> exactly 8 lines
    CHECK(candidate_subspaces(caps, 1, normals_only).size() == 8);

    // d = n+1 contains the full space
    CandidateOptions mixed;
    auto cands = candidate_subspaces(caps, 2, mixed);
    bool has_full = false;
    Subspace full(2, {{1.0, 0.0}, {0.0, 1.0}});
    for (const Subspace& s : cands)
        if (same_subspace(s, full)) has_full = true;
    CHECK(has_full);

    CHECK_THROWS(candidate_subspaces(caps, 3, mixed));  // d > n+1

    // determinism and dedupe
    auto c1 = candidate_subspaces(caps, 1, mixed);
    auto c2 = candidate_subspaces(caps, 1, mixed);
    REQUIRE(c1.size() == c2.size());
    for (size_t i = 0; i < c1.size(); ++i) CHECK(same_subspace(c1[i], c2[i]));
    for (size_t i = 0; i < c1.size(); ++i)
        for (size_t j = i + 1; j < c1.size(); ++j) CHECK(!same_subspace(c1[i], c1[j]));
}

TEST_CASE("partition covers: every point of the ball lies in exactly one cell") {
    for (int n : {1, 2}) {
        Ambient amb = make_amb(n, 8);
        auto caps = build_cap_partition(amb);
        std::set<std::vector<long>> index_set;
        for (const Cap& c : caps) index_set.insert(c.index);
        Rng rng(11);
        for (int t = 0; t < 500; ++t) {
            Vec xi(n);
            double r2;
            do {
                r2 = 0.0;
                for (double& v : xi) { v = rng.uniform(-1.0, 1.0); r2 += v * v; }
            } while (r2 >= 1.0);
            auto idx = cap_index_of(xi, 8);
            REQUIRE(idx.has_value());
            CHECK(index_set.count(*idx) == 1);
            // cross-check: exactly one cap cell contains xi
            int hits = 0;
            for (const Cap& c : caps) {
                bool in = true;
                for (int i = 0; i < n; ++i) {
                    double lo = static_cast<double>(c.index[i]) / 8.0;
                    if (xi[i] < lo || xi[i] >= lo + 0.125) { in = false; break; }
                }
                if (in) ++hits;
            }
            CHECK(hits == 1);
        }
    }
}

TEST_CASE("partition size bounds by enumeration: D^n <= count <= (2D+2)^n") {
    for (int n = 1; n <= 3; ++n) {
        for (long D = 2; D <= 64; D *= 2) {
            if (n == 3 && D > 32) break;  // the D=64 case runs in the suite
            auto caps = build_cap_partition(make_amb(n, D));
            double count = static_cast<double>(caps.size());
            CHECK(count >= std::pow(static_cast<double>(D), n));
            CHECK(count <= std::pow(2.0 * D + 2.0, n));
        }
    }
}

TEST_CASE("default coarse scale collapses to 2 at desk scale") {
    CHECK(default_coarse_scale(16, 0.1, 4.0) == 2);
    CHECK(default_coarse_scale(1024, 0.5, 4.0) >= 2);
    Ambient amb;
    amb.n = 1;
    amb.D = 16;
    amb.D0 = 32;  // exceeds D
    CHECK_THROWS(amb.validate());
}
