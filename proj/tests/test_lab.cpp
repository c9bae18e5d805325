#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "declab/config.hpp"
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

}  // namespace

TEST_CASE("generate: packet counts per kind") {
    Ensemble e;
    e.amb = make_amb(1, 4);

    e.kind = EnsembleKind::SinglePacket;
    CHECK(generate(e).packets.size() == 1);

    e.kind = EnsembleKind::Constant;
    CHECK(generate(e).packets.size() == 8);  // one per cap at n=1, D=4

    e.kind = EnsembleKind::Focusing;
    Field foc = generate(e);
    CHECK(foc.packets.size() == 8);
    for (const auto& p : foc.packets) {
        CHECK(p.tile.index == std::vector<long>({0, 0}));
        CHECK(p.coefficient == Complex(1.0, 0.0));
    }

    e.kind = EnsembleKind::RandomPhase;
    e.density = 2;
    e.seed = 5;
    Field rp = generate(e);
    CHECK(rp.packets.size() == 16);
    for (const auto& p : rp.packets) CHECK(std::abs(std::abs(p.coefficient) - 1.0) < 1e-12);

    // determinism: the same seed reproduces the same packet list
    Field rp2 = generate(e);
    REQUIRE(rp2.packets.size() == rp.packets.size());
    for (size_t i = 0; i < rp.packets.size(); ++i) {
        CHECK(rp.packets[i].tile.index == rp2.packets[i].tile.index);
        CHECK(rp.packets[i].coefficient == rp2.packets[i].coefficient);
    }

    // flat(V): caps near V only; empty capture is an error
    e.kind = EnsembleKind::Flat;
    e.density = 1;
    e.V = Subspace(2, {{0.0, 1.0}});
    Field flat = generate(e);
    CHECK(flat.packets.size() == 2);  // the caps at +-1/8
    for (const auto& p : flat.packets)
        CHECK(std::abs(p.tile.cap.center[0]) == doctest::Approx(0.125));
    e.V.reset();
    CHECK_THROWS(generate(e));
}

TEST_CASE("p range checks") {
    // n=2, k=2: admissible [10/3, 4]
    auto r = check_p_range(2, 2, 4.0);
    CHECK(r.theorem_mode);
    CHECK(r.theorem_low == doctest::Approx(10.0 / 3.0));
    CHECK(r.theorem_high == doctest::Approx(4.0));
    // n=2, k=3: empty admissible range, conjectured for p > 3
    auto r2 = check_p_range(2, 3, 3.2);
    CHECK(!r2.theorem_mode);
    CHECK(r2.conjecture_mode);
    // outside both
    auto r3 = check_p_range(2, 2, 2.5);
    CHECK(!r3.theorem_mode);
    CHECK(!r3.conjecture_mode);
}

TEST_CASE("theorem_sweep: single-packet ensemble skips the fit") {
    SweepSpec spec;
    spec.kind = EnsembleKind::SinglePacket;
    spec.n = 1;
    spec.k = 2;
    spec.p = 4.5;  // n=1 has an empty admissible range; conjectured mode
    spec.D_list = {4, 8, 16};
    spec.seeds = {1};
    spec.A = 1;
    spec.base.grid.mode = GridSpec::Mode::Sample;
    spec.base.grid.sample_budget = 20000;
    auto rep = theorem_sweep(spec, 1);
    CHECK(!rep.fit_done);
    CHECK(rep.zero_lhs_rows == static_cast<int>(rep.rows.size()));
    CHECK(rep.note.find("skipped") != std::string::npos);
    for (const auto& row : rep.rows) CHECK(row.flags.find("zero-lhs") != std::string::npos);
}

TEST_CASE("theorem_sweep: conjecture mode flags, invalid p errors naming ranges") {
    SweepSpec spec;
    spec.n = 2;
    spec.k = 3;
    spec.p = 3.2;  // conjectured range only
    spec.D_list = {4};
    spec.seeds = {1};
    spec.A = 1;
    spec.base.grid.mode = GridSpec::Mode::Sample;
    spec.base.grid.sample_budget = 20000;
    spec.base.search_mode = SearchMode::Greedy;
    auto rep = theorem_sweep(spec, 1);
    CHECK(rep.flags.find("outside-theorem-range") != std::string::npos);

    spec.p = 2.5;
    try {
        theorem_sweep(spec, 1);
        CHECK(false);
    } catch (const Error& e) {
        std::string msg = e.what();
        CHECK(msg.find("admissible") != std::string::npos);
        CHECK(msg.find("conjectured") != std::string::npos);
    }
}

TEST_CASE("theorem_sweep: ratio is invariant under coefficient scaling") {
    // numerator and denominator are 1-homogeneous; check on a tiny instance
    Ambient amb = make_amb(1, 4);
    Ensemble e;
    e.kind = EnsembleKind::RandomPhase;
    e.amb = amb;
    e.seed = 3;
    Field f = generate(e);
    std::vector<WavePacket> sp = f.packets;
    for (auto& p : sp) p.coefficient *= 5.5;
    Field fs = synthesize(amb, sp, f.bump_spec);

    Subspace V(2, {{1.0, 0.0}, {0.0, 1.0}});
    DyadicCube B = standard_block(amb);
    NormParams np;
    np.p = 10.0 / 3.0;
    np.k = 2;
    np.A = 1;
    np.D = amb.D;
    np.D0 = amb.D0;
    np.grid.mode = GridSpec::Mode::FullGrid;
    double l1 = restricted_broad_norm(f, V, B, np, 1).value;
    double l2 = restricted_broad_norm(fs, V, B, np, 1).value;
    double r1 = decoupling_norm(restrict_to_subspace_caps(f, V), amb.D,
                                dilate(B, 2.0), np.p, np.grid, 1).value;
    double r2 = decoupling_norm(restrict_to_subspace_caps(fs, V), amb.D,
                                dilate(B, 2.0), np.p, np.grid, 1).value;
    REQUIRE(l1 > 0.0);
    REQUIRE(r1 > 0.0);
    CHECK(std::abs((l2 / r2) / (l1 / r1) - 1.0) <= 1e-9);
}

TEST_CASE("theorem_sweep: three-octave fit produces a finite exponent") {
    SweepSpec spec;
    spec.kind = EnsembleKind::RandomPhase;
    spec.n = 1;
    spec.k = 2;
    spec.p = 4.5;  // conjectured range for n=1 (the admissible one is empty)
    spec.D_list = {4, 8, 16};
    spec.seeds = {1, 2};
    spec.A = 1;
    spec.base.grid.mode = GridSpec::Mode::Sample;
    spec.base.grid.sample_budget = 30000;
    auto rep = theorem_sweep(spec, 1);
    if (rep.fit_done) {
        CHECK(std::isfinite(rep.alpha));
        CHECK(std::isfinite(rep.fit_residual));
    }
    CHECK(rep.target_exponent == doctest::Approx(1.0 - 4.0 / spec.p));
    CHECK(rep.rows.size() == 6);
}

TEST_CASE("decoupling application check: zero and single-cap coefficients vanish") {
    Constants c;
    GridSpec grid;
    grid.mode = GridSpec::Mode::Sample;
    grid.sample_budget = 20000;
    DyadicCube U(Vec{0.0, 0.0}, 16.0);

    auto f0 = CoefficientGrid::uniform(1, 65);
    auto cert0 = decoupling_application_check(f0, 4, 2, 2, 4.5, 2, U, c, grid, 1);
    CHECK(cert0.lhs == 0.0);
    CHECK(cert0.holds);

    // supported in one cap: Xi vanishes with normal-spanned candidates
    auto f1 = CoefficientGrid::uniform(1, 65);
    Rng rng(2);
    for (long i = 0; i < f1.shape[0]; ++i) {
        double xi = f1.origin[0] + f1.spacing * i;
        if (xi >= 0.25 && xi < 0.5) f1.values[i] = Complex(rng.gaussian(), rng.gaussian());
    }
    auto cert1 = decoupling_application_check(f1, 4, 2, 2, 4.5, 2, U, c, grid, 1);
    CHECK(cert1.lhs == 0.0);
    CHECK(cert1.holds);
}

TEST_CASE("decoupling application check: random coefficients, slack recorded") {
    Constants c;
    GridSpec grid;
    grid.mode = GridSpec::Mode::Sample;
    grid.sample_budget = 20000;
    DyadicCube U(Vec{0.0, 0.0}, 16.0);
    auto f = CoefficientGrid::uniform(1, 65);
    Rng rng(7);
    for (auto& v : f.values) v = Complex(rng.gaussian(), rng.gaussian());
    auto cert = decoupling_application_check(f, 4, 2, 2, 4.5, 2, U, c, grid, 1);
    CHECK(std::isfinite(cert.slack));
    CHECK(cert.holds);  // generous K^{n-2(n+1)/p} headroom at desk scale

    // p outside the admissible range for j is rejected
    CHECK_THROWS(decoupling_application_check(f, 4, 2, 2, 2.5, 2, U, c, grid, 1));
}

TEST_CASE("invariant suite: empty seeds give empty-but-valid rows; corrupted bump fails") {
    SuiteOptions opts;
    opts.seeds = {1};
    opts.quick = true;
    opts.grid.mode = GridSpec::Mode::Sample;
    opts.grid.sample_budget = 20000;
    auto rows = invariant_suite(opts);
    CHECK(rows.size() >= 20);
    std::set<std::string> ids;
    for (const auto& r : rows) ids.insert(r.id);
    CHECK(ids.count("wave_packets/partition-of-unity") == 1);
    CHECK(ids.count("norms/exact-oracle") == 1);

    // fault injection: a partition sum scaled to 0.9 must fail that row
    SuiteOptions bad = opts;
    bad.bump_corruption = 0.9;
    auto rows2 = invariant_suite(bad);
    for (const auto& r : rows2)
        if (r.id == "wave_packets/partition-of-unity") CHECK(!r.pass);

    std::string csv = suite_to_csv(rows, false);
    CHECK(csv.find("invariant,params,pass,measured") != std::string::npos);
}

TEST_CASE("config: defaults, file errors, overrides") {
    RunConfig cfg = RunConfig::defaults();
    cfg.validate();
    CHECK(cfg.ambient().D == 8);
    CHECK(cfg.constants().C_broadstep == 10.0);

    CHECK_THROWS(RunConfig::from_file("/nonexistent/path.json"));
    try {
        RunConfig::from_file("/nonexistent/path.json");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("/nonexistent/path.json") != std::string::npos);
    }

    cfg.override_path("norms.p", "3.5");
    CHECK(cfg.norm_params().p == 3.5);
    cfg.override_path("ambient.D", "16");
    CHECK(cfg.ambient().D == 16);
    cfg.override_path("output.prefix", "abc");
    CHECK(cfg.prefix() == "abc");
    cfg.override_path("ambient.D", "5");  // not a power of two
    CHECK_THROWS(cfg.validate());

    // unknown subcommand refuses with the expected naming
    RunConfig fresh = RunConfig::defaults();
    try {
        run_subcommand("frobnicate", fresh);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("unknown subcommand") != std::string::npos);
    }
}

TEST_CASE("runner: sweep CSV is byte-identical for workers 1 and 8") {
    namespace fs = std::filesystem;
    RunConfig cfg = RunConfig::defaults();
    cfg.override_path("sweep.n", "1");
    cfg.override_path("sweep.p", "4.5");
    cfg.override_path("sweep.D_list", "[4,8]");
    cfg.override_path("sweep.seeds", "[1]");
    cfg.override_path("sweep.A", "1");
    cfg.override_path("quadrature.mode", "\"sample\"");
    cfg.override_path("quadrature.sample_budget", "20000");
    cfg.override_path("output.dir", "/tmp/declab_test_w1");
    cfg.override_path("workers", "1");
    auto o1 = run_subcommand("sweep", cfg);
    cfg.override_path("output.dir", "/tmp/declab_test_w8");
    cfg.override_path("workers", "8");
    auto o8 = run_subcommand("sweep", cfg);

    auto read_no_ts = [](const std::string& p) {
        std::ifstream in(p);
        std::string line, out;
        while (std::getline(in, line))
            if (line.rfind("# generated", 0) != 0) out += line + "\n";
        return out;
    };
    CHECK(read_no_ts("/tmp/declab_test_w1/run_sweep.csv") ==
          read_no_ts("/tmp/declab_test_w8/run_sweep.csv"));
}
