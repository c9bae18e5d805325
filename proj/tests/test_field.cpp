#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "declab/fft.hpp"
#include "declab/field.hpp"
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

// Direct unaccelerated packet summation (no truncation): the evaluation oracle.
Complex brute_eval(const Field& f, const Vec& x) {
    BumpGenerator g(f.bump_spec.order, f.bump_spec.support_fraction);
    Complex sum{};
    for (const WavePacket& p : f.packets) {
        auto frame = cap_frame(p.tile.cap);
        double phi = bump_value(g, p.tile, frame, x);
        Vec c = p.tile.cap.lifted_center();
        double phase = dot(c, x);
        sum += p.coefficient * phi * Complex(std::cos(phase), std::sin(phase));
    }
    return sum;
}

}  // namespace

TEST_CASE("synthesize: empty packets give the zero field") {
    Field f = synthesize(make_amb(1, 4), {});
    CHECK(f.packets.empty());
    CHECK(evaluate_at(f, {0.3, -1.2}) == Complex{});
}

TEST_CASE("synthesize: a single unit packet evaluates to phi_T e^{ix.c}") {
    Ambient amb = make_amb(1, 4);
    auto caps = build_cap_partition(amb);
    WavePacket p;
    p.tile.cap = caps[5];
    p.tile.index = {2, -1};
    p.coefficient = 1.0;
    Field f = synthesize(amb, {p});
    BumpGenerator g(12, 0.5);
    auto frame = cap_frame(f.packets[0].tile.cap);
    Rng rng(3);
    for (int t = 0; t < 25; ++t) {
        Vec x = {rng.uniform(-20, 20), rng.uniform(-30, 30)};
        Complex got = evaluate_at(f, x);
        double phi = bump_value(g, f.packets[0].tile, frame, x);
        Vec c = f.packets[0].tile.cap.lifted_center();
        double ph = dot(c, x);
        Complex expect = phi * Complex(std::cos(ph), std::sin(ph));
        CHECK(std::abs(got - expect) < 1e-12);
    }
    // at the tile center the modulus is phi_T(center)
    Complex at_center = evaluate_at(f, f.packets[0].tile.center);
    double phi0 = bump_value(g, f.packets[0].tile, frame, f.packets[0].tile.center);
    CHECK(std::abs(at_center) == doctest::Approx(phi0));
}

TEST_CASE("synthesize: packet on an unknown cap is rejected") {
    Ambient amb = make_amb(1, 4);
    WavePacket p;
    p.tile.cap.index = {99};
    p.tile.index = {0, 0};
    p.coefficient = 1.0;
    CHECK_THROWS(synthesize(amb, {p}));
}

TEST_CASE("evaluate: linearity over a packet split") {
    Field f = random_field(1, 4, 77, 2);
    size_t half = f.packets.size() / 2;
    Field f1 = subfield(f, {f.packets.begin(), f.packets.begin() + half});
    Field f2 = subfield(f, {f.packets.begin() + half, f.packets.end()});
    Rng rng(8);
    for (int t = 0; t < 30; ++t) {
        Vec x = {rng.uniform(-16, 16), rng.uniform(-16, 16)};
        Complex lhs = evaluate_at(f, x);
        Complex rhs = evaluate_at(f1, x) + evaluate_at(f2, x);
        CHECK(std::abs(lhs - rhs) <= 1e-12);
    }
}

TEST_CASE("evaluate: matches brute-force summation to 1e-9") {
    Field f = random_field(1, 8, 5, 1);
    std::vector<WavePacket> ten(f.packets.begin(),
                                f.packets.begin() + std::min<size_t>(10, f.packets.size()));
    Field f10 = subfield(f, ten);
    Rng rng(21);
    for (int t = 0; t < 5; ++t) {
        Vec x = {rng.uniform(0, 64), rng.uniform(0, 64)};
        CHECK(std::abs(evaluate_at(f10, x) - brute_eval(f10, x)) < 1e-9);
    }
}

TEST_CASE("restrict_to_cap: labels partition the packets and reproduce F") {
    Field f = random_field(1, 4, 13, 2);
    size_t total = 0;
    Rng rng(2);
    Vec x = {rng.uniform(0, 16), rng.uniform(0, 16)};
    Complex sum{};
    for (const Cap& c : f.caps) {
        Field fc = restrict_to_cap(f, c);
        total += fc.packets.size();
        sum += evaluate_at(fc, x);
    }
    CHECK(total == f.packets.size());
    CHECK(std::abs(sum - evaluate_at(f, x)) < 1e-10);

    // single-cap field: restriction to that cap is the field, to others zero
    Field single = subfield(f, {f.packets.front()});
    const Cap& own = single.packets.front().tile.cap;
    CHECK(restrict_to_cap(single, own).packets.size() == 1);
    for (const Cap& c : f.caps)
        if (c.index != own.index) CHECK(restrict_to_cap(single, c).packets.empty());

    Cap unknown;
    unknown.index = {1234};
    CHECK_THROWS(restrict_to_cap(f, unknown));
}

TEST_CASE("restrict_to_cap: L2 masses nearly add across caps") {
    Field f = random_field(1, 8, 31, 2);
    DyadicCube B = standard_block(f.amb);
    Cube wide = dilate(B, 3.0);
    GridSpec gs;
    gs.mode = GridSpec::Mode::Sample;
    gs.sample_budget = 60000;
    double whole = lp_norm(f, wide, 2.0, gs, 1).value;
    double parts = 0.0;
    for (const Cap& c : f.caps) {
        Field fc = restrict_to_cap(f, c);
        if (fc.packets.empty()) continue;
        double v = lp_norm(fc, wide, 2.0, gs, 1).value;
        parts += v * v;
    }
    double ratio = parts / sqr(whole);
    CHECK(ratio >= 0.25);
    CHECK(ratio <= 4.0);
}

TEST_CASE("restrict_to_subspace_caps") {
    Field f = random_field(1, 4, 3, 1);
    Subspace full(2, {{1.0, 0.0}, {0.0, 1.0}});
    CHECK(restrict_to_subspace_caps(f, full).packets.size() == f.packets.size());

    // a line far from every normal keeps nothing: use the horizontal axis
    Subspace horiz(2, {{1.0, 0.0}});
    bool any_near = false;
    for (const Cap& c : f.caps)
        if (dist_to_subspace(c.normal, horiz) <= 0.25) any_near = true;
    if (!any_near) CHECK(restrict_to_subspace_caps(f, horiz).packets.empty());

    // the vertical line keeps exactly the caps at xi = +-1/8
    Subspace vert(2, {{0.0, 1.0}});
    Field sub = restrict_to_subspace_caps(f, vert);
    for (const WavePacket& p : sub.packets)
        CHECK(std::abs(p.tile.cap.center[0]) == doctest::Approx(0.125));
    CHECK(sub.packets.size() == 2);
}

TEST_CASE("field JSON round trip (field-v1)") {
    Field f = random_field(2, 4, 19, 1);
    std::string json = field_to_json(f);
    CHECK(json.find("field-v1") != std::string::npos);
    Field g = field_from_json(json);
    REQUIRE(g.packets.size() == f.packets.size());
    for (size_t i = 0; i < f.packets.size(); ++i) {
        CHECK(g.packets[i].tile.cap.index == f.packets[i].tile.cap.index);
        CHECK(g.packets[i].tile.index == f.packets[i].tile.index);
        CHECK(std::abs(g.packets[i].coefficient - f.packets[i].coefficient) == 0.0);
        CHECK(g.packets[i].l2_mass == doctest::Approx(f.packets[i].l2_mass));
    }
    CHECK_THROWS(field_from_json("{\"version\":\"field-v2\",\"packets\":[]}"));
}

TEST_CASE("frequency support: DFT mass concentrates near the paraboloid") {
    Field f = random_field(1, 4, 23, 1);
    FieldEvaluator ev(f);
    const double L = 256.0, h = 0.5;
    const int N = static_cast<int>(L / h);
    std::vector<Complex> data(static_cast<size_t>(N) * N);
    Vec x(2);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            x[0] = -L / 2 + h * i;
            x[1] = -L / 2 + h * j;
            data[static_cast<size_t>(i) * N + j] = ev.eval(x);
        }
    fft_nd(data, {N, N}, false);
    double total = 0.0, inside = 0.0;
    double tol = f.support_constant / 16.0 + 2.0 * (2.0 * M_PI / L);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            double m = std::norm(data[static_cast<size_t>(i) * N + j]);
            double xi0 = 2.0 * M_PI * (i < N / 2 ? i : i - N) / L;
            double xi1 = 2.0 * M_PI * (j < N / 2 ? j : j - N) / L;
            total += m;
            if (std::abs(xi1 - xi0 * xi0) <= tol) inside += m;
        }
    CHECK(inside / total >= 0.999);
}

TEST_CASE("extension operator: closed forms") {
    // n=1, f == 1: Rf(0,0) = 2 and Rf(x,0) = 2 sin(x)/x
    auto f = CoefficientGrid::uniform(1, 257);
    for (auto& v : f.values) v = 1.0;
    CHECK(std::abs(extension_operator(f, {0.0, 0.0}) - Complex(2.0, 0.0)) < 1e-12);
    for (double x : {0.5, 1.0, 2.0, 3.0}) {
        Complex got = extension_operator(f, {x, 0.0});
        double expect = 2.0 * std::sin(x) / x;
        CHECK(std::abs(got - Complex(expect, 0.0)) < 1e-3);
    }
    // n=2, f == 1: Rf(0,0) = pi (area of the unit disk); boundary cells make
    // this first-order accurate only
    auto f2 = CoefficientGrid::uniform(2, 129);
    for (auto& v : f2.values) v = 1.0;
    Complex disk = extension_operator(f2, {0.0, 0.0, 0.0});
    CHECK(std::abs(disk.real() - M_PI) < 0.05);
    CHECK(std::abs(disk.imag()) < 1e-12);

    CoefficientGrid empty;
    empty.n = 1;
    CHECK_THROWS(extension_operator(empty, {0.0, 0.0}));
}

TEST_CASE("parabolic rescaling: K=1 whole-cell identity") {
    Cap theta;
    theta.index = {0};
    theta.center = {0.0};
    theta.scale = 1;
    theta.normal = paraboloid_normal(theta.center);
    auto f = CoefficientGrid::uniform(1, 129);
    Rng rng(4);
    for (long i = 0; i < f.shape[0]; ++i) {
        double xi = f.origin[0] + f.spacing * i;
        if (xi >= 0.0 && xi < 1.0) f.values[i] = Complex(rng.gaussian(), rng.gaussian());
    }
    auto r = parabolic_rescale(f, theta);
    CHECK(r.jacobian_factor == doctest::Approx(1.0));
    Vec xt = {0.7, -0.3};
    Vec mapped = r.map(xt);
    CHECK(mapped[0] == doctest::Approx(0.7));
    CHECK(mapped[1] == doctest::Approx(-0.3));
    CHECK(r.phase(xt) == doctest::Approx(0.0));
}

TEST_CASE("parabolic rescaling: K=2 cell at the origin halves arguments") {
    Ambient amb = make_amb(1, 2);
    auto caps = build_cap_partition(amb);
    const Cap& theta = caps[2];  // cell [0, 1/2), center 1/4
    auto f = CoefficientGrid::uniform(1, 129);
    Rng rng(14);
    for (long i = 0; i < f.shape[0]; ++i) {
        double xi = f.origin[0] + f.spacing * i;
        if (xi >= 0.0 && xi < 0.5) f.values[i] = Complex(rng.gaussian(), rng.gaussian());
    }
    auto r = parabolic_rescale(f, theta);
    CHECK(r.jacobian_factor == doctest::Approx(0.5));
    Vec xt = {1.2, 0.8};
    Vec mapped = r.map(xt);
    CHECK(mapped[0] == doctest::Approx((1.2 + 2.0 * 0.8 * 0.25) / 2.0));
    CHECK(mapped[1] == doctest::Approx(0.8 / 4.0));
    // identity against the direct cap integral
    for (int t = 0; t < 20; ++t) {
        Vec pt = {rng.uniform(-2, 2), rng.uniform(-1, 1)};
        Complex direct = extension_operator_cap(f, theta, pt);
        Complex via = r.rescaled_value(pt);
        double denom = std::max({std::abs(direct), 1e-30});
        CHECK(std::abs(direct - via) / denom < 1e-6);
    }
}

TEST_CASE("parabolic rescaling: K=4 random cap, pointwise identity at 20 points") {
    Ambient amb = make_amb(1, 4);
    auto caps = build_cap_partition(amb);
    const Cap& theta = caps[6];  // cell [1/2, 3/4)
    auto f = CoefficientGrid::uniform(1, 257);
    Rng rng(99);
    for (long i = 0; i < f.shape[0]; ++i) {
        double xi = f.origin[0] + f.spacing * i;
        double lo = static_cast<double>(theta.index[0]) / 4.0;
        if (xi >= lo && xi < lo + 0.25) f.values[i] = Complex(rng.gaussian(), rng.gaussian());
    }
    auto r = parabolic_rescale(f, theta);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        Vec pt = {rng.uniform(-4, 4), rng.uniform(-2, 2)};
        Complex direct = extension_operator_cap(f, theta, pt);
        Complex via = r.rescaled_value(pt);
        worst = std::max(worst, std::abs(direct - via) / std::max(std::abs(direct), 1e-30));
    }
    CHECK(worst < 1e-6);

    // support violation is rejected
    auto bad = CoefficientGrid::uniform(1, 65);
    for (auto& v : bad.values) v = 1.0;
    CHECK_THROWS(parabolic_rescale(bad, theta));
}
