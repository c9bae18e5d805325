#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "declab/lab.hpp"
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

Field random_field(int n, long D, uint64_t seed, int density = 1) {
    Ensemble e;
    e.kind = EnsembleKind::RandomPhase;
    e.amb = make_amb(n, D);
    e.seed = seed;
    e.density = density;
    return generate(e);
}

NormParams sampled_params(long budget) {
    NormParams np;
    np.grid.mode = GridSpec::Mode::Sample;
    np.grid.sample_budget = budget;
    return np;
}

}  // namespace

TEST_CASE("ladder: formulas, overrides, collapse") {
    // R=2^16, eps=0.5, L=4: K_1 = largest dyadic <= 2^{16 * 0.25} = 16
    ScaleLadder lad = make_ladder(1L << 16, 0.5, 4.0, 2);
    CHECK(lad.K[0] == 16);
    CHECK(lad.K.size() == 2);
    CHECK(lad.A.size() == 3);
    CHECK(lad.K[1] > lad.K[0]);
    CHECK(lad.A[0] >= lad.A[1]);
    CHECK(lad.A[1] >= lad.A[2]);
    CHECK(!lad.overridden);

    // explicit override is accepted and flagged
    LadderOverride ov;
    ov.K = {4, 16};
    ov.A = {16, 4, 2};
    ScaleLadder l2 = make_ladder(256, 0.1, 4.0, 2, ov);
    CHECK(l2.overridden);
    CHECK(l2.K == std::vector<long>({4, 16}));
    CHECK(l2.A == std::vector<long>({16, 4, 2}));

    // non-monotone overrides are rejected
    ov.K = {16, 4};
    CHECK_THROWS(make_ladder(256, 0.1, 4.0, 2, ov));
    ov.K = {4, 16};
    ov.A = {2, 4, 16};
    CHECK_THROWS(make_ladder(256, 0.1, 4.0, 2, ov));

    // eps -> 0: K_1 would fall below 2, the ladder collapses
    try {
        make_ladder(256, 1e-9, 4.0, 2);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("collapsed") != std::string::npos);
    }
}

TEST_CASE("certificate arithmetic and serialization") {
    Certificate c = make_certificate("demo", 2.0,
                                     {{"t1", 3.0, 1.0, ""}, {"t2", 1.0, 0.5, "candidate-min"}},
                                     "{\"k\":2}");
    CHECK(c.slack == doctest::Approx(1.5));
    CHECK(c.holds);
    Certificate bad = make_certificate("fail", 5.0, {{"t", 1.0, 1.0, ""}}, "{}");
    CHECK(!bad.holds);
    CHECK(bad.slack == doctest::Approx(-4.0));  // a failed certificate is still a record

    std::string csv = certificates_to_csv({c, bad}, false);
    CHECK(csv.find("demo") != std::string::npos);
    CHECK(csv.find(",1\n") != std::string::npos);
    CHECK(csv.find(",0\n") != std::string::npos);
    std::string js = certificates_to_json({c});
    CHECK(js.find("\"slack\"") != std::string::npos);
    CHECK(js.find("candidate-min") != std::string::npos);
}

TEST_CASE("base_step: single cap and zero field hold trivially") {
    Ambient amb = make_amb(1, 4);
    auto caps = build_cap_partition(amb);
    WavePacket p;
    p.tile.cap = caps[3];
    p.tile.index = {0, 0};
    p.coefficient = 1.0;
    Field single = synthesize(amb, {p});
    DyadicCube U(Vec{0.0, 0.0}, 32.0);
    Constants c;
    NormParams np;
    np.grid.mode = GridSpec::Mode::FullGrid;
    np.grid.max_full_points = 10'000'000;
    auto cert = base_step(single, U, 4, amb.D, 4.0, c, np, 1);
    CHECK(cert.holds);  // ||F_theta||_p <= C A ||max|F_theta|||_p alone

    Field z = synthesize(amb, {});
    auto zc = base_step(z, U, 4, amb.D, 4.0, c, np, 1);
    CHECK(zc.lhs == 0.0);
    CHECK(zc.holds);
}

TEST_CASE("base_step: random field at default constants") {
    Constants c;
    DyadicCube U(Vec{0.0, 0.0}, 32.0);
    for (uint64_t seed : {1, 2, 3}) {
        Field f = random_field(1, 4, seed, 1);
        NormParams np = sampled_params(60000);
        auto cert = base_step(f, U, 4, 4, 4.0, c, np, 1);
        CHECK(cert.holds);
        CHECK(cert.slack >= 0.0);
    }
}

TEST_CASE("broad_step: preconditions and the single-cap case") {
    Ambient amb = make_amb(1, 4);
    auto caps = build_cap_partition(amb);
    WavePacket p;
    p.tile.cap = caps[3];
    p.tile.index = {0, 0};
    p.coefficient = 1.0;
    Field single = synthesize(amb, {p});
    DyadicCube U(Vec{0.0, 0.0}, 32.0);
    Constants c;
    NormParams np;
    np.grid.mode = GridSpec::Mode::FullGrid;
    np.grid.max_full_points = 10'000'000;

    CHECK_THROWS(broad_step(single, U, 2, 4, 4, 4, 2, 4.0, c, np, 1));  // M^2 > A
    DyadicCube small(Vec{0.0, 0.0}, 16.0);
    CHECK_THROWS(broad_step(single, small, 2, 4, 2, 4, 2, 4.0, c, np, 1));  // U side == D^2

    auto cert = broad_step(single, U, 2, 4, 2, 4, 2, 4.0, c, np, 1);
    CHECK(cert.lhs == 0.0);  // one cap is annihilated by one normal-spanned line
    CHECK(cert.holds);
}

TEST_CASE("broad_step: random field, n=1, default constants") {
    Constants c;
    DyadicCube U(Vec{0.0, 0.0}, 32.0);
    for (uint64_t seed : {1, 2}) {
        Field f = random_field(1, 4, seed, 1);
        NormParams np = sampled_params(40000);
        auto cert = broad_step(f, U, 2, 4, 2, 4, 2, 4.0, c, np, 1);
        CHECK(cert.holds);
    }
}

TEST_CASE("recursion: override ladder runs end to end; m is validated") {
    Field f = random_field(2, 4, 7, 1);
    DyadicCube U(Vec{0.0, 0.0, 0.0}, 32.0);
    Constants c;
    LadderOverride ov;
    ov.K = {2, 4};
    ov.A = {16, 4, 2};
    ScaleLadder lad = make_ladder(256, 0.1, 4.0, 2, ov);
    NormParams np = sampled_params(20000);
    np.search_mode = SearchMode::Greedy;
    auto certs = recursion(f, U, 2, lad, 4.0, c, np, 1);
    REQUIRE(certs.size() == 3);  // base + broad(j=2) + composite
    CHECK(certs[0].name == "base-step");
    CHECK(certs[1].name == "broad-step(j=2)");
    CHECK(certs[2].name == "recursion-composite");
    for (const auto& cert : certs) CHECK(std::isfinite(cert.slack));

    CHECK_THROWS(recursion(f, U, 3, lad, 4.0, c, np, 1));  // m > n
    CHECK_THROWS(recursion(f, U, 1, lad, 4.0, c, np, 1));  // m < 2

    // zero field: every step trivially holds
    Field z = synthesize(f.amb, {});
    auto zcerts = recursion(z, U, 2, lad, 4.0, c, np, 1);
    for (const auto& cert : zcerts) {
        CHECK(cert.lhs == 0.0);
        CHECK(cert.holds);
    }
}

TEST_CASE("multiscale checks: zero-ish and random pipelines") {
    Constants c;
    // n=1, K=16, D=4 random field
    Field f = random_field(1, 16, 3, 1);
    MultiscaleSetup ms;
    ms.V = Subspace(2, {{1.0, 0.0}, {0.0, 1.0}});
    ms.B = standard_block(f.amb);
    ms.D = 4;
    ms.p = 4.0;
    ms.k = 2;
    ms.A = 2;
    NormParams np = sampled_params(30000);
    auto certs = multiscale_checks(f, ms, c, np, 1);
    REQUIRE(certs.size() == 3);
    CHECK(certs[0].name == "redecomposition-mass");
    CHECK(certs[0].holds);  // the re0 bound at C=16
    CHECK(certs[1].name == "local-broad-vs-decoupling");
    CHECK(certs[2].name == "class-broad-vs-decoupling");
    for (const auto& cert : certs) CHECK(std::isfinite(cert.slack));

    // single packet through a gamma-cube at D = sqrt(K)
    Ambient amb = make_amb(1, 16);
    auto caps = build_cap_partition(amb);
    WavePacket p;
    p.tile.cap = caps[16];
    p.tile.index = {0, 0};
    p.coefficient = 1.0;
    Field single = synthesize(amb, {p});
    MultiscaleSetup ms1 = ms;
    ms1.B = standard_block(amb);
    auto certs1 = multiscale_checks(single, ms1, c, np, 1);
    CHECK(certs1[0].holds);

    // D > sqrt(K) is rejected
    MultiscaleSetup bad = ms;
    bad.D = 8;
    CHECK_THROWS(multiscale_checks(f, bad, c, np, 1));
}

TEST_CASE("regime classifier: trivial directions and the p=2 / p=p_k notes") {
    // lambda -> 0+: the small-lambda condition is vacuous
    auto r = regime_classify(2, 2, 3.5, 16, 1.0, 1e-30, 8.0);
    CHECK(r.regime == Regime::SmallLambda);

    // huge lambda with large D: large-lambda
    auto r2 = regime_classify(2, 2, 3.5, 16, 1.0, 1e30, 8.0);
    CHECK(r2.regime == Regime::LargeLambda);

    // p=2: small-lambda test is singular, note recorded
    auto r3 = regime_classify(2, 2, 2.0, 16, 1.0, 1e-30, 8.0);
    CHECK(!r3.small_holds);
    CHECK(!r3.note.empty());

    // p=p_k endpoint: classified by the gamma bound
    auto r4 = regime_classify(2, 2, 4.0, 16, 1.0, 1.0, 8.0);
    CHECK(r4.regime == Regime::LargeLambda);
    CHECK(r4.note.find("endpoint") != std::string::npos);

    CHECK_THROWS(regime_classify(2, 2, 4.5, 16, 1.0, 1.0, 8.0));  // p > p_k
}

TEST_CASE("regime dichotomy: no gaps across the admissible sweep") {
    // n=2, k=2: admissible p in [10/3, 4]; gamma <= D^{k-1}; mu = 1
    for (double p : {10.0 / 3.0, 3.5, 4.0}) {
        for (long D : {8L, 16L, 32L}) {
            for (double gamma = 1.0; gamma <= static_cast<double>(D); gamma *= 2.0) {
                for (int oct = -10; oct <= 10; ++oct) {
                    auto r = regime_classify(2, 2, p, D, 1.0, std::ldexp(1.0, oct), gamma);
                    CHECK(r.regime != Regime::Gap);
                }
            }
        }
    }
    // outside the admissible lower bound gaps may exist; they are flagged
    int gaps = 0;
    for (int oct = -10; oct <= 10; ++oct) {
        auto r = regime_classify(2, 2, 3.1, 32, 1.0, std::ldexp(1.0, oct), 32.0);
        if (r.regime == Regime::Gap) ++gaps;
    }
    CHECK(gaps > 0);
}

TEST_CASE("restriction-type empirical checks evaluate and serialize") {
    Field f = random_field(1, 16, 5, 1);
    Subspace V(2, {{1.0, 0.0}, {0.0, 1.0}});
    Constants c;
    NormParams np = sampled_params(30000);
    DyadicCube B = standard_block(f.amb);

    auto g = broad_l2_check(f, V, B, c, np, 1);
    CHECK(std::isfinite(g.slack));
    CHECK(g.name == "broad-vs-l2");

    DyadicCube Q(Vec{0.0, 0.0}, 16.0);
    auto l = restricted_l2_check(f, V, Q, c, np, 1);
    CHECK(std::isfinite(l.slack));

    auto eq = equidistribution_check(f, V, Q, c, np, 1);
    CHECK(std::isfinite(eq.slack));
    CHECK(eq.name == "slab-equidistribution");

    // single cap: the broad part vanishes and both l2 checks hold
    auto caps = build_cap_partition(f.amb);
    WavePacket p;
    p.tile.cap = caps[16];
    p.tile.index = {0, 0};
    p.coefficient = 1.0;
    Field single = synthesize(f.amb, {p});
    auto gs = broad_l2_check(single, V, B, c, np, 1);
    CHECK(gs.lhs == 0.0);
    CHECK(gs.holds);
}

TEST_CASE("semi triangle check") {
    Field f1 = random_field(1, 4, 11, 1);
    Field f2 = random_field(1, 4, 12, 1);
    Constants c;
    NormParams np;
    np.A = 4;
    np.grid.mode = GridSpec::Mode::FullGrid;
    DyadicCube B = standard_block(f1.amb);
    auto cert = semi_triangle_check(f1, f2, B, c, np, 1);
    CHECK(std::isfinite(cert.slack));
    CHECK(cert.holds);  // 2^3 headroom over the exact display inequality
}

TEST_CASE("certificates are bit-reproducible under a fixed seed and grid") {
    Field f = random_field(1, 4, 21, 1);
    DyadicCube U(Vec{0.0, 0.0}, 32.0);
    Constants c;
    NormParams np = sampled_params(20000);
    auto c1 = broad_step(f, U, 2, 4, 2, 4, 2, 4.0, c, np, 1);
    auto c2 = broad_step(f, U, 2, 4, 2, 4, 2, 4.0, c, np, 8);  // different workers
    CHECK(c1.lhs == c2.lhs);
    CHECK(c1.slack == c2.slack);
    for (size_t i = 0; i < c1.rhs_terms.size(); ++i)
        CHECK(c1.rhs_terms[i].value == c2.rhs_terms[i].value);
}
