#include "declab/bg_engine.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>

#include "declab/rng.hpp"
#include "json.hpp"

namespace declab {

std::string fmt_g17(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

// ---- ladder -----------------------------------------------------------------

ScaleLadder make_ladder(long R, double eps, double L, int n,
                        const std::optional<LadderOverride>& ov) {
    require(R >= 4 && is_power_of_two(R), "ladder: R must be a dyadic number >= 4");
    require(n >= 1, "ladder: n must be >= 1");
    ScaleLadder lad;
    lad.R = R;
    lad.eps = eps;
    lad.L = L;
    if (ov) {
        require(static_cast<int>(ov->K.size()) == n, "ladder: override K must have n entries");
        require(static_cast<int>(ov->A.size()) == n + 1,
                "ladder: override A must have n+1 entries");
        for (long k : ov->K) require(is_power_of_two(k) && k >= 2, "ladder: K entries must be dyadic >= 2");
        for (int j = 1; j < n; ++j)
            require(ov->K[j] > ov->K[j - 1], "ladder: override K must be increasing");
        for (long a : ov->A) require(a >= 1, "ladder: A entries must be >= 1");
        for (int j = 1; j <= n; ++j)
            require(ov->A[j] <= ov->A[j - 1], "ladder: override A must be non-increasing");
        lad.K = ov->K;
        lad.A = ov->A;
        lad.overridden = true;
        return lad;
    }
    double k1 = std::pow(static_cast<double>(R), std::pow(eps, L / 2.0));
    require(k1 >= 2.0, "ladder collapsed: K_1 below 2 at these (R, eps, L)");
    lad.K.push_back(floor_pow2(k1));
    for (int j = 2; j <= n; ++j) {
        double next = std::pow(static_cast<double>(lad.K.back()), std::pow(eps, -std::sqrt(L) / 2.0));
        require(next < 9e17, "ladder: K grew past representable range");
        lad.K.push_back(ceil_pow2_strict(next));
    }
    double a1 = std::pow(static_cast<double>(R), std::pow(eps, L));
    lad.A.push_back(std::max<long>(1, std::lround(a1)));
    for (int j = 2; j <= n + 1; ++j) {
        double aj = std::pow(static_cast<double>(lad.A[0]), std::pow(2.0, 1.0 - j));
        lad.A.push_back(std::max<long>(1, std::lround(aj)));
    }
    return lad;
}

// ---- certificates -------------------------------------------------------------

Certificate make_certificate(std::string name, double lhs, std::vector<RhsTerm> terms,
                             std::string params_json) {
    Certificate c;
    c.name = std::move(name);
    c.lhs = lhs;
    c.rhs_terms = std::move(terms);
    c.params = std::move(params_json);
    double rhs = 0.0;
    for (const RhsTerm& t : c.rhs_terms) rhs += t.coefficient * t.value;
    c.slack = rhs - lhs;
    c.holds = c.slack >= 0.0;
    return c;
}

std::string Certificate::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["lhs"] = lhs;
    auto& terms = j["rhs_terms"] = nlohmann::json::array();
    double rhs = 0.0;
    for (const RhsTerm& t : rhs_terms) {
        terms.push_back({{"label", t.label},
                         {"coefficient", t.coefficient},
                         {"value", t.value},
                         {"approx", t.approx}});
        rhs += t.coefficient * t.value;
    }
    j["rhs"] = rhs;
    j["slack"] = slack;
    j["holds"] = holds;
    j["params"] = params.empty() ? nlohmann::json::object() : nlohmann::json::parse(params);
    return j.dump();
}

std::string certificates_to_csv(const std::vector<Certificate>& certs, bool timestamp) {
    std::string out;
    if (timestamp) {
        auto now = std::chrono::system_clock::now();
        out += "# generated " +
               std::to_string(std::chrono::duration_cast<std::chrono::seconds>(
                                  now.time_since_epoch()).count()) + "\n";
    }
    out += "name,lhs,rhs,slack,pass\n";
    for (const Certificate& c : certs) {
        double rhs = 0.0;
        for (const RhsTerm& t : c.rhs_terms) rhs += t.coefficient * t.value;
        out += c.name + "," + fmt_g17(c.lhs) + "," + fmt_g17(rhs) + "," + fmt_g17(c.slack) +
               "," + (c.holds ? "1" : "0") + "\n";
    }
    return out;
}

std::string certificates_to_json(const std::vector<Certificate>& certs) {
    std::string out = "[";
    for (size_t i = 0; i < certs.size(); ++i) {
        if (i) out += ",";
        out += certs[i].to_json();
    }
    out += "]";
    return out;
}

// ---- decomposition steps -------------------------------------------------------

namespace {

std::vector<Cap> occupied_caps_at_scale(const Field& f, long scale) {
    FieldEvaluator ev(f);
    std::map<std::vector<long>, Cap> cells;
    for (int i = 0; i < ev.cap_count(); ++i) {
        const Cap& c = ev.cap(i);
        std::vector<long> idx(c.center.size());
        for (size_t a = 0; a < c.center.size(); ++a)
            idx[a] = static_cast<long>(std::floor(c.center[a] * static_cast<double>(scale)));
        if (cells.count(idx)) continue;
        Cap cc;
        cc.index = idx;
        cc.scale = scale;
        cc.center.resize(idx.size());
        for (size_t a = 0; a < idx.size(); ++a)
            cc.center[a] = (static_cast<double>(idx[a]) + 0.5) / static_cast<double>(scale);
        cc.normal = paraboloid_normal(cc.center);
        cells.emplace(idx, std::move(cc));
    }
    std::vector<Cap> out;
    for (auto& [idx, c] : cells) out.push_back(std::move(c));
    return out;
}

nlohmann::json norm_params_json(const NormParams& np) {
    return {{"p", np.p}, {"k", np.k}, {"A", np.A},
            {"search_mode", np.search_mode == SearchMode::Exact ? "exact" : "greedy"}};
}

}  // namespace

Certificate broad_step(const Field& f, const Cube& u, int k, int A, int M, long D, long D0,
                       double p, const Constants& c, const NormParams& base, int workers) {
    require(static_cast<long>(M) * M <= A, "broad_step: requires M^2 <= A");
    require(u.side > static_cast<double>(D) * static_cast<double>(D),
            "broad_step: U side must exceed D^2");
    const int n = f.amb.n;

    NormParams lhs_np = base;
    lhs_np.p = p; lhs_np.k = k; lhs_np.A = A; lhs_np.D = D; lhs_np.D0 = D0;
    double lhs = broad_norm(f, u, lhs_np, D0, workers).value;

    NormParams t1_np = lhs_np;
    t1_np.k = k + 1;
    t1_np.A = std::max(1, A / M);
    double bl_next = broad_norm(f, u, t1_np, D, workers).value;

    NormParams xi_np = lhs_np;
    xi_np.A = std::max(1, M / 2);
    auto occupied = occupied_caps_at_scale(f, D);
    double xi_v = 0.0;
    if (!occupied.empty()) {
        auto cand_k = candidate_subspaces(occupied, k, base.candidates);
        xi_v = xi_functional(f, k, p, std::max(1, M / 2), D, u, cand_k, xi_np, workers).value;
    }

    nlohmann::json params = norm_params_json(lhs_np);
    params["M"] = M;
    params["D"] = D;
    params["D0"] = D0;
    params["C_broadstep"] = c.C_broadstep;

    std::vector<RhsTerm> terms;
    terms.push_back({"D^n * broad(k+1, A/M, D)", std::pow(static_cast<double>(D), n), bl_next,
                     "candidate-min"});
    terms.push_back({"(A/M)^C * xi(k, M/2, D)",
                     std::pow(static_cast<double>(A) / M, c.C_broadstep), xi_v,
                     "candidate-sup/min"});
    return make_certificate("broad-step(k=" + std::to_string(k) + ")", lhs, std::move(terms),
                            params.dump());
}

Certificate base_step(const Field& f, const Cube& u, int A, long D, double p,
                      const Constants& c, const NormParams& base, int workers) {
    const int n = f.amb.n;
    NormParams np = base;
    np.p = p; np.k = 2; np.A = A; np.D = D;

    double lhs = lp_norm(f, u, p, np.grid, workers).value;
    double bl = broad_norm(f, u, np, D, workers).value;
    double mx = max_cap_norm(f, D, u, p, np.grid, workers).value;

    nlohmann::json params = norm_params_json(np);
    params["D"] = D;
    params["C_base"] = c.C_base;

    std::vector<RhsTerm> terms;
    terms.push_back({"D^n * broad(2, A, D)", std::pow(static_cast<double>(D), n), bl,
                     "candidate-min"});
    terms.push_back({"C A * max-cap", c.C_base * static_cast<double>(A), mx, ""});
    return make_certificate("base-step", lhs, std::move(terms), params.dump());
}

std::vector<Certificate> recursion(const Field& f, const Cube& u, int m,
                                   const ScaleLadder& ladder, double p, const Constants& c,
                                   const NormParams& base, int workers) {
    const int n = f.amb.n;
    require(m >= 2 && m <= n, "recursion: need 2 <= m <= n");
    require(static_cast<int>(ladder.K.size()) >= m, "recursion: ladder too short");
    require(ladder.K[m - 1] <= f.amb.D, "recursion: K_m exceeds the field scale");

    std::vector<Certificate> certs;
    certs.push_back(base_step(f, u, static_cast<int>(ladder.A[0]), ladder.K[0], p, c, base,
                              workers));
    for (int j = 2; j <= m; ++j) {
        certs.push_back(broad_step(f, u, j, static_cast<int>(ladder.A[j - 2]),
                                   static_cast<int>(ladder.A[j - 1]), ladder.K[j - 1],
                                   ladder.K[j - 2], p, c, base, workers));
        certs.back().name = "broad-step(j=" + std::to_string(j) + ")";
    }

    // Composite three-term bound across the ladder.
    NormParams np = base;
    np.p = p;
    double lhs = lp_norm(f, u, p, np.grid, workers).value;
    std::vector<RhsTerm> terms;
    double mx = max_cap_norm(f, ladder.K[0], u, p, np.grid, workers).value;
    terms.push_back({"C A_1 * max-cap(K_1)", c.C_base * static_cast<double>(ladder.A[0]), mx, ""});

    NormParams bl_np = np;
    bl_np.k = m + 1;
    bl_np.A = static_cast<int>(ladder.A[m - 1]);
    double bl = broad_norm(f, u, bl_np, ladder.K[m - 1], workers).value;
    terms.push_back({"K_m^{2n} * broad(m+1, A_m, K_m)",
                     std::pow(static_cast<double>(ladder.K[m - 1]), 2 * n), bl, "candidate-min"});

    for (int j = 2; j <= m; ++j) {
        NormParams xi_np = np;
        xi_np.k = j;
        xi_np.D0 = ladder.K[j - 2];
        int Mj = std::max<long>(1, ladder.A[j - 1] / 2);
        auto occupied = occupied_caps_at_scale(f, ladder.K[j - 1]);
        double xi_v = 0.0;
        if (!occupied.empty()) {
            auto cand = candidate_subspaces(occupied, j, base.candidates);
            xi_v = xi_functional(f, j, p, Mj, ladder.K[j - 1], u, cand, xi_np, workers).value;
        }
        double coeff = std::pow(static_cast<double>(ladder.K[j - 1]), std::pow(c.eps_slack, 10.0));
        terms.push_back({"K_j^{eps^10} * xi(j=" + std::to_string(j) + ")", coeff, xi_v,
                         "candidate-sup/min"});
    }
    nlohmann::json params;
    params["m"] = m;
    params["p"] = p;
    params["K"] = ladder.K;
    params["A"] = ladder.A;
    params["asserted"] = false;  // steps compose with constants; recorded, not gated
    certs.push_back(make_certificate("recursion-composite", lhs, std::move(terms), params.dump()));
    return certs;
}

// ---- multiscale checks ---------------------------------------------------------

std::vector<Certificate> multiscale_checks(const Field& f, const MultiscaleSetup& ms,
                                           const Constants& c, const NormParams& base,
                                           int workers) {
    const long K = f.amb.D;
    const long K0 = f.amb.D0;
    const int n = f.amb.n;
    require(ms.D >= 2 && static_cast<double>(ms.D) <= std::sqrt(static_cast<double>(K)) + 1e-9,
            "multiscale: D must satisfy D <= sqrt(K)");
    require(std::abs(ms.B.side - static_cast<double>(K) * K) < 1e-9,
            "multiscale: B must have side K^2");
    double p = ms.p;
    double p_k = 2.0 * ms.k / (ms.k - 1.0);
    require(p >= 2.0 && p <= p_k + 1e-9, "multiscale: need 2 <= p <= p_k");

    std::vector<Certificate> certs;
    Field sub = restrict_to_subspace_caps(f, ms.V);
    auto bucketing = mu_buckets(sub.packets, f.amb.eps);
    if (bucketing.buckets.empty()) {
        certs.push_back(make_certificate("redecomposition-mass", 0.0,
                                         {{"C/K * mu^2 gamma", 1.0, 0.0, ""}}, "{}"));
        return certs;
    }
    // Default mu: the bucket with the largest total energy.
    double mu = ms.mu;
    if (mu <= 0.0) {
        double best = -1.0;
        for (auto& [m, b] : bucketing.buckets) {
            double e = m * m * static_cast<double>(b.packets.size());
            if (e >= best) { best = e; mu = m; }
        }
    }
    require(bucketing.buckets.count(mu), "multiscale: no bucket at the requested mu");
    const MuBucket& bucket = bucketing.buckets.at(mu);

    auto s_loc = localize(bucket.packets, ms.B, K0);
    auto classes = gamma_cubes(ms.B, s_loc, K, K0);
    if (classes.empty()) {
        certs.push_back(make_certificate("redecomposition-mass", 0.0,
                                         {{"C/K * mu^2 gamma", 1.0, 0.0, ""}}, "{}"));
        return certs;
    }
    double gamma = ms.gamma;
    if (gamma <= 0.0) gamma = classes.rbegin()->first;
    require(classes.count(gamma), "multiscale: no gamma-cubes in the requested class");
    const auto& gcubes = classes.at(gamma);
    const DyadicCube& Q = gcubes.front();

    nlohmann::json params;
    params["K"] = K;
    params["K0"] = K0;
    params["D"] = ms.D;
    params["mu"] = mu;
    params["gamma"] = gamma;
    params["p"] = p;
    params["k"] = ms.k;
    params["A"] = ms.A;

    // (a) mass of every mu' bucket of the re-decomposition on Q
    {
        Field f_q = subfield(f, localize(s_loc, Q, K0));
        auto rd = redecompose(f_q, Q, ms.D, K0);
        std::vector<WavePacket> near_v;
        const double thr = 1.0 / static_cast<double>(ms.D);
        for (const WavePacket& pk : rd.packets)
            if (dist_to_subspace(pk.tile.cap.normal, ms.V) <= thr) near_v.push_back(pk);
        auto rb = mu_buckets(near_v, f.amb.eps);
        double lhs = 0.0;
        nlohmann::json rows = nlohmann::json::array();
        for (auto& [mup, b] : rb.buckets) {
            double v = mup * mup * static_cast<double>(b.packets.size());
            rows.push_back({{"mu_prime", mup}, {"count", b.packets.size()}, {"mass", v}});
            lhs = std::max(lhs, v);
        }
        nlohmann::json pa = params;
        pa["buckets"] = rows;
        pa["residual"] = rd.residual;
        double rhs = mu * mu * gamma / static_cast<double>(K);
        certs.push_back(make_certificate("redecomposition-mass", lhs,
                                         {{"C/K * mu^2 gamma", c.C_re0, rhs, ""}}, pa.dump()));
    }

    // (b), (c): local level broad norm against the scale-D decoupling norm.
    Field f_mu = subfield(f, bucket.packets);
    double lambda = ms.lambda;
    if (lambda <= 0.0) {
        // probe the coarse-cap sups on Q
        FieldEvaluator ev(f_mu);
        double mx = 0.0;
        Vec qc = Q.center();
        for (int t = 0; t < 64; ++t) {
            Vec x(qc);
            Rng rng(mix_seed(1234, t));
            for (double& v : x) v += Q.side * (rng.uniform() - 0.5);
            mx = std::max(mx, std::abs(ev.eval(x)));
        }
        lambda = mx > 0.0 ? floor_dyadic(mx) : 1.0;
    }
    NormParams np = base;
    np.p = p; np.k = ms.k; np.A = ms.A; np.D = ms.D; np.D0 = K0;

    double dk = static_cast<double>(ms.D);
    double factor = std::pow(mu * std::sqrt(gamma) / (lambda * std::pow(static_cast<double>(K), (n + 2) / 2.0)),
                             p_k - p) * std::pow(dk, (ms.k - 1) * (p / 2.0 - 1.0));
    double kslack = std::pow(static_cast<double>(K), sqr(c.eps_slack));

    {
        double lhs = std::pow(local_level_broad_norm(f_mu, Q, np, lambda, workers).value, p);
        double deco = decoupling_norm(f_mu, ms.D, dilate(Q, static_cast<double>(K0)), p,
                                      np.grid, workers).value;
        nlohmann::json pa = params;
        pa["lambda"] = lambda;
        pa["scope"] = "gamma-cube";
        certs.push_back(make_certificate(
            "local-broad-vs-decoupling", lhs,
            {{"C K^{eps^2} (mu sqrt(gamma)/(lambda K^{(n+2)/2}))^{p_k-p} D^{(k-1)(p/2-1)} * deco^p",
              c.C_75 * kslack * factor, std::pow(deco, p), "candidate-min"}},
            pa.dump()));
    }
    {
        std::vector<double> per_cube(gcubes.size(), 0.0);
        for (size_t i = 0; i < gcubes.size(); ++i)
            per_cube[i] = std::pow(local_level_broad_norm(f_mu, gcubes[i], np, lambda, workers).value, p);
        double lhs = tree_sum(per_cube);
        double deco = decoupling_norm(f_mu, ms.D, dilate(ms.B, static_cast<double>(K0)), p,
                                      np.grid, workers).value;
        nlohmann::json pa = params;
        pa["lambda"] = lambda;
        pa["scope"] = "gamma-class-union";
        pa["class_cubes"] = gcubes.size();
        certs.push_back(make_certificate(
            "class-broad-vs-decoupling", lhs,
            {{"C K^{eps^2} (mu sqrt(gamma)/(lambda K^{(n+2)/2}))^{p_k-p} D^{(k-1)(p/2-1)} * deco^p",
              c.C_75 * kslack * factor, std::pow(deco, p), "candidate-min"}},
            pa.dump()));
    }
    return certs;
}

// ---- regime classifier ----------------------------------------------------------

RegimeResult regime_classify(int n, int k, double p, long D, double mu, double lambda,
                             double gamma) {
    double p_k = 2.0 * k / (k - 1.0);
    require(p >= 2.0 && p <= p_k + 1e-12, "regime_classify: need p in [2, p_k]");
    RegimeResult r;
    double dD = static_cast<double>(D);
    double base = mu * std::pow(dD, -(n + 2) / 2.0);

    if (std::abs(p - 2.0) < 1e-12) {
        r.note = "p=2 makes the small-lambda exponent singular; large-lambda only";
        r.small_threshold = 0.0;
    } else {
        r.small_threshold = base * std::pow(dD, (p * n - 2.0 * (n + 1)) / (p - 2.0));
        r.small_holds = lambda <= r.small_threshold * (1.0 + 1e-12);
    }
    if (std::abs(p - p_k) < 1e-12) {
        // Endpoint: the class-size bound gamma <= D^{k-1} replaces the
        // lambda condition.
        r.large_holds = gamma <= std::pow(dD, k - 1) * (1.0 + 1e-12);
        r.large_threshold = 0.0;
        if (!r.note.empty()) r.note += "; ";
        r.note += "endpoint p=p_k: classified by the gamma bound";
    } else {
        r.large_threshold =
            base * std::pow(std::pow(gamma, 1.0 / (k - 1.0)) / std::pow(dD, n * p - 2.0 * (n + 1)),
                            1.0 / (p_k - p));
        r.large_holds = lambda >= r.large_threshold * (1.0 - 1e-12);
    }
    if (r.small_holds) r.regime = Regime::SmallLambda;
    else if (r.large_holds) r.regime = Regime::LargeLambda;
    else r.regime = Regime::Gap;
    return r;
}

// ---- restriction-type empirical checks -------------------------------------------

Certificate broad_l2_check(const Field& f, const Subspace& v, const DyadicCube& b,
                           const Constants& c, const NormParams& base, int workers) {
    const int n = f.amb.n;
    const long D = f.amb.D;
    NormParams np = base;
    Field sub = restrict_to_subspace_caps(f, v);
    double lhs = broad_norm(sub, b, np, f.amb.D0, workers).value;
    double l2 = lp_norm(sub, b, 2.0, np.grid, workers).value;
    double expo = sqr(c.eps_slack) - 1.0 - (n - np.k + 1) * (0.5 - 1.0 / np.p);
    nlohmann::json params = norm_params_json(np);
    params["D"] = D;
    return make_certificate("broad-vs-l2", lhs,
                            {{"C D^{eps^2-1-(n-k+1)(1/2-1/p)} * ||F_{D,V}||_2",
                              c.C_guth * std::pow(static_cast<double>(D), expo), l2,
                              "candidate-min"}},
                            params.dump());
}

Certificate restricted_l2_check(const Field& f, const Subspace& v, const DyadicCube& q,
                                const Constants& c, const NormParams& base, int workers) {
    const int n = f.amb.n;
    const long D = f.amb.D;
    require(std::abs(q.side - static_cast<double>(D)) < 1e-9,
            "restricted_l2_check: Q must have side D");
    NormParams np = base;
    Field sub = restrict_to_subspace_caps(f, v);
    double lhs = broad_norm(sub, q, np, f.amb.D0, workers).value;
    double l2 = lp_norm(sub, q, 2.0, np.grid, workers).value;
    double expo = sqr(c.eps_slack) - 0.5 - (n - np.k + 1) * (0.5 - 1.0 / np.p);
    nlohmann::json params = norm_params_json(np);
    params["D"] = D;
    return make_certificate("local-broad-vs-l2", lhs,
                            {{"C D^{eps^2-1/2-(n-k+1)(1/2-1/p)} * ||F_{D,V}||_{L2(Q)}",
                              c.C_42 * std::pow(static_cast<double>(D), expo), l2,
                              "candidate-min"}},
                            params.dump());
}

Certificate equidistribution_check(const Field& f, const Subspace& v, const DyadicCube& q,
                                   const Constants& c, const NormParams& base, int workers) {
    const int n = f.amb.n;
    const long D = f.amb.D;
    long s = std::lround(std::sqrt(static_cast<double>(D)));
    require(s * s == D && is_power_of_two(s), "equidistribution_check: D must be a dyadic square");
    require(std::abs(q.side - static_cast<double>(D)) < 1e-9,
            "equidistribution_check: Q must have side D");
    Field sub = restrict_to_subspace_caps(f, v);
    double l2 = lp_norm(sub, q, 2.0, base.grid, workers).value;

    auto rd = redecompose(sub, q, s, f.amb.D0);
    Ambient amb_s = f.amb;
    amb_s.D = s;
    amb_s.D0 = std::min(f.amb.D0, s);
    Field fine = synthesize(amb_s, rd.packets, f.bump_spec);

    // slabs: width-sqrt(D) translates of V along an orthonormal basis of V-perp
    std::vector<Vec> rows = v.basis;
    for (int i = 0; i < n + 1; ++i) {
        Vec e(n + 1, 0.0);
        e[i] = 1.0;
        rows.push_back(std::move(e));
    }
    gram_schmidt(rows, 1e-10);
    std::vector<Vec> perp(rows.begin() + v.dim, rows.end());

    std::map<std::vector<long>, std::vector<WavePacket>> slabs;
    double sd = std::sqrt(static_cast<double>(D));
    for (const WavePacket& pk : fine.packets) {
        std::vector<long> key(perp.size());
        for (size_t i = 0; i < perp.size(); ++i)
            key[i] = static_cast<long>(std::floor(dot(perp[i], pk.tile.center) / sd));
        slabs[key].push_back(pk);
    }
    double lhs = 0.0;
    for (auto& [key, pks] : slabs) {
        double v2 = lp_norm(subfield(fine, pks), q, 2.0, base.grid, workers).value;
        lhs = std::max(lhs, v2 * v2);
    }
    double coeff = c.C_equi * std::pow(static_cast<double>(D), c.eps_slack) *
                   std::pow(sd / static_cast<double>(D), n - base.k + 1);
    nlohmann::json params;
    params["D"] = D;
    params["slabs"] = slabs.size();
    params["residual"] = rd.residual;
    return make_certificate("slab-equidistribution", lhs,
                            {{"C D^eps (sqrtD/D)^{n-k+1} * ||F_{D,V}||^2_{L2(Q)}", coeff, l2 * l2,
                              ""}},
                            params.dump());
}

Certificate semi_triangle_check(const Field& f1, const Field& f2, const Cube& u,
                                const Constants& c, const NormParams& base, int workers) {
    require(f1.amb.n == f2.amb.n && f1.amb.D == f2.amb.D,
            "semi_triangle_check: fields must share an ambient");
    require(base.A >= 2, "semi_triangle_check: A must be >= 2");
    std::vector<WavePacket> merged = f1.packets;
    merged.insert(merged.end(), f2.packets.begin(), f2.packets.end());
    Field sum = synthesize(f1.amb, std::move(merged), f1.bump_spec);

    NormParams np = base;
    double lhs = broad_norm(sum, u, np, f1.amb.D0, workers).value;
    NormParams half = np;
    half.A = std::max(1, np.A / 2);
    double r1 = broad_norm(f1, u, half, f1.amb.D0, workers).value;
    double r2 = broad_norm(f2, u, half, f2.amb.D0, workers).value;
    nlohmann::json params = norm_params_json(np);
    return make_certificate("semi-triangle", lhs,
                            {{"2^C * ||F1||_{BL(A/2)}", std::pow(2.0, c.C_semi), r1, "candidate-min"},
                             {"2^C * ||F2||_{BL(A/2)}", std::pow(2.0, c.C_semi), r2, "candidate-min"}},
                            params.dump());
}

}  // namespace declab
