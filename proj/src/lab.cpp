#include "declab/lab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>

#include "declab/fft.hpp"
#include "declab/parallel.hpp"
#include "declab/rng.hpp"
#include "json.hpp"

namespace declab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;
}

EnsembleKind ensemble_kind_from_string(const std::string& s) {
    if (s == "random-phase") return EnsembleKind::RandomPhase;
    if (s == "constant") return EnsembleKind::Constant;
    if (s == "single-packet") return EnsembleKind::SinglePacket;
    if (s == "flat") return EnsembleKind::Flat;
    if (s == "focusing") return EnsembleKind::Focusing;
    throw Error("unknown ensemble kind: " + s);
}

std::string to_string(EnsembleKind k) {
    switch (k) {
        case EnsembleKind::RandomPhase: return "random-phase";
        case EnsembleKind::Constant: return "constant";
        case EnsembleKind::SinglePacket: return "single-packet";
        case EnsembleKind::Flat: return "flat";
        case EnsembleKind::Focusing: return "focusing";
    }
    return "?";
}

DyadicCube standard_block(const Ambient& amb) {
    double side = static_cast<double>(amb.D) * static_cast<double>(amb.D);
    return DyadicCube(Vec(amb.dim(), 0.0), side);
}

namespace {

// Tile whose center is nearest the given point (frame-rounded).
std::vector<long> tile_index_at(const Cap& cap, const Vec& x) {
    auto frame = cap_frame(cap);
    std::vector<long> idx(frame.size());
    for (size_t i = 0; i < frame.size(); ++i)
        idx[i] = std::lround(dot(frame[i], x) / Tile::spacing(cap, static_cast<int>(i)));
    return idx;
}

}  // namespace

Field generate(const Ensemble& e) {
    Ambient amb = e.amb;
    amb.validate();
    auto caps = build_cap_partition(amb);
    Cube region = e.region ? *e.region : standard_block(amb);
    Vec center = region.center();

    std::vector<WavePacket> packets;
    auto add = [&](const Cap& cap, std::vector<long> idx, Complex coeff) {
        WavePacket p;
        p.tile.cap = cap;
        p.tile.index = std::move(idx);
        p.coefficient = coeff;
        packets.push_back(std::move(p));
    };

    switch (e.kind) {
        case EnsembleKind::SinglePacket:
            add(caps.front(), tile_index_at(caps.front(), center), 1.0);
            break;
        case EnsembleKind::Constant:
            for (const Cap& c : caps) add(c, tile_index_at(c, center), 1.0);
            break;
        case EnsembleKind::Focusing:
            for (const Cap& c : caps) add(c, std::vector<long>(amb.dim(), 0), 1.0);
            break;
        case EnsembleKind::RandomPhase:
        case EnsembleKind::Flat: {
            std::vector<Cap> pool = caps;
            if (e.kind == EnsembleKind::Flat) {
                require(e.V.has_value(), "generate: flat ensemble needs a subspace");
                pool = caps_near_subspace(caps, *e.V, amb.D);
                require(!pool.empty(), "generate: flat ensemble has no caps near V");
            }
            for (size_t ci = 0; ci < pool.size(); ++ci) {
                Rng rng(mix_seed(e.seed, ci, 0xEA5E));
                auto lattice = tile_lattice(pool[ci], region, amb.D0);
                std::set<size_t> used;
                int want = std::min<int>(e.density, static_cast<int>(lattice.size()));
                while (static_cast<int>(used.size()) < want)
                    used.insert(rng.integer(lattice.size()));
                for (size_t t : used) add(pool[ci], lattice[t].index, rng.unit_phase());
            }
            break;
        }
    }
    return synthesize(amb, std::move(packets), e.bump);
}

// ---- sweeps ------------------------------------------------------------------

PRangeCheck check_p_range(int n, int k, double p) {
    PRangeCheck r;
    r.theorem_high = 2.0 * k / (k - 1.0);
    double den = n - (k - 1.0) / 2.0;
    r.theorem_low = den > 0.0 ? 2.0 * (n + 1.0 - (k - 1.0) / 2.0) / den : 0.0;
    r.conjecture_low = 2.0 * (n + 1.0) / n;
    r.theorem_mode = den > 0.0 && p >= r.theorem_low - 1e-12 && p <= r.theorem_high + 1e-12;
    r.conjecture_mode = p > r.conjecture_low;
    return r;
}

namespace {

Subspace sweep_subspace(const std::string& strategy, int n, int k,
                        const std::vector<Cap>& caps, uint64_t seed) {
    const int dim = n + 1;
    if (strategy == "coordinate") {
        // first k-1 horizontal axes plus the vertical axis
        std::vector<Vec> rows;
        for (int i = 0; i < k - 1; ++i) {
            Vec v(dim, 0.0);
            v[i] = 1.0;
            rows.push_back(std::move(v));
        }
        Vec vert(dim, 0.0);
        vert[dim - 1] = 1.0;
        rows.push_back(std::move(vert));
        return Subspace(dim, rows);
    }
    if (strategy == "random") {
        Rng rng(mix_seed(seed, 0x5EED));
        std::vector<Vec> rows(k, Vec(dim));
        for (auto& r : rows)
            for (double& v : r) v = rng.gaussian();
        return Subspace(dim, rows);
    }
    if (strategy == "normal-span") {
        require(static_cast<int>(caps.size()) >= k, "sweep: not enough caps for normal-span V");
        Rng rng(mix_seed(seed, 0x57A9));
        std::set<size_t> pick;
        while (static_cast<int>(pick.size()) < k) pick.insert(rng.integer(caps.size()));
        std::vector<Vec> rows;
        for (size_t i : pick) rows.push_back(caps[i].normal);
        return Subspace(dim, rows);
    }
    throw Error("sweep: unknown V strategy " + strategy);
}

}  // namespace

SweepReport theorem_sweep(const SweepSpec& spec, int workers) {
    auto pr = check_p_range(spec.n, spec.k, spec.p);
    if (!pr.theorem_mode && !pr.conjecture_mode) {
        throw Error("sweep: p=" + std::to_string(spec.p) + " is outside both ranges: " +
                    "admissible [" + std::to_string(pr.theorem_low) + ", " +
                    std::to_string(pr.theorem_high) + "] and conjectured (p > " +
                    std::to_string(pr.conjecture_low) + ")");
    }
    require(!spec.D_list.empty() && !spec.seeds.empty(), "sweep: need D values and seeds");

    SweepReport rep;
    rep.target_exponent = spec.n - 2.0 * (spec.n + 1.0) / spec.p;
    if (!pr.theorem_mode) rep.flags = "outside-theorem-range";

    for (long D : spec.D_list) {
        for (uint64_t seed : spec.seeds) {
            Ambient amb;
            amb.n = spec.n;
            amb.D = D;
            amb.eps = spec.eps;
            amb.L = spec.L;
            amb.validate();
            auto caps = build_cap_partition(amb);
            Subspace V = sweep_subspace(spec.v_strategy, spec.n, spec.k, caps, seed);

            Ensemble ens;
            ens.kind = spec.kind;
            ens.amb = amb;
            ens.density = spec.density;
            ens.seed = seed;
            if (spec.kind == EnsembleKind::Flat) ens.V = V;
            Field f = generate(ens);

            DyadicCube B = standard_block(amb);
            NormParams np = spec.base;
            np.p = spec.p;
            np.k = spec.k;
            np.A = spec.A;
            np.D = D;
            np.D0 = amb.D0;

            SweepRow row;
            row.D = D;
            row.seed = seed;
            auto lhs = restricted_broad_norm(f, V, B, np, workers);
            Field sub = restrict_to_subspace_caps(f, V);
            auto rhs = decoupling_norm(sub, D, dilate(B, static_cast<double>(amb.D0)), spec.p,
                                       np.grid, workers);
            row.lhs = lhs.value;
            row.rhs = rhs.value;
            if (row.rhs > 0.0) {
                row.ratio = row.lhs / row.rhs;
                double rel2 = 0.0;
                if (row.lhs > 0.0) rel2 += sqr(lhs.stderr_est / row.lhs);
                rel2 += sqr(rhs.stderr_est / row.rhs);
                row.ratio_stderr = row.ratio * std::sqrt(rel2);
            }
            if (row.lhs == 0.0) {
                row.flags = "zero-lhs";
                ++rep.zero_lhs_rows;
            }
            if (!pr.theorem_mode) {
                row.flags += row.flags.empty() ? "" : ";";
                row.flags += "outside-theorem-range";
            }
            rep.rows.push_back(row);
        }
    }

    // OLS of log2 ratio against log2 D over nonzero rows.
    std::set<long> distinct;
    std::vector<std::pair<double, double>> xy;
    for (const SweepRow& r : rep.rows) {
        if (r.lhs > 0.0 && r.rhs > 0.0) {
            xy.emplace_back(std::log2(static_cast<double>(r.D)), std::log2(r.ratio));
            distinct.insert(r.D);
        }
    }
    if (distinct.size() >= 3) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto [x, y] : xy) { sx += x; sy += y; sxx += x * x; sxy += x * y; }
        double m = static_cast<double>(xy.size());
        double denom = m * sxx - sx * sx;
        rep.alpha = (m * sxy - sx * sy) / denom;
        double b = (sy - rep.alpha * sx) / m;
        double rss = 0.0;
        for (auto [x, y] : xy) rss += sqr(y - rep.alpha * x - b);
        rep.fit_residual = std::sqrt(rss / m);
        rep.fit_done = true;
    } else {
        rep.note = "fit skipped: fewer than 3 distinct D with nonzero lhs";
    }
    return rep;
}

// ---- decoupling application check ---------------------------------------------

Certificate decoupling_application_check(const CoefficientGrid& f, long K_j, long K_prev,
                                         int A_j, double p, int j, const DyadicCube& u,
                                         const Constants& c, const GridSpec& grid,
                                         int workers) {
    const int n = f.n;
    auto pr = check_p_range(n, j, p);
    if (!pr.theorem_mode && !pr.conjecture_mode) {
        throw Error("decoupling_application_check: p=" + std::to_string(p) +
                    " is outside both ranges: admissible [" + std::to_string(pr.theorem_low) +
                    ", " + std::to_string(pr.theorem_high) + "] and conjectured (p > " +
                    std::to_string(pr.conjecture_low) + ")");
    }
    require(K_prev >= 2 && K_prev <= K_j, "decoupling_application_check: need 2 <= K_prev <= K_j");

    Ambient amb;
    amb.n = n;
    amb.D = K_j;
    amb.D0 = K_prev;
    amb.validate();
    auto caps = build_cap_partition(amb);
    const size_t ncaps = caps.size();

    // coarse grouping of the scale-K_j caps into Theta_{K_prev} cells
    std::map<std::vector<long>, int> coarse_slot;
    std::vector<int> cap_to_coarse(ncaps);
    std::vector<Cap> coarse;
    for (size_t i = 0; i < ncaps; ++i) {
        std::vector<long> idx(static_cast<size_t>(n));
        for (int a = 0; a < n; ++a)
            idx[a] = static_cast<long>(std::floor(caps[i].center[a] * static_cast<double>(K_prev)));
        auto [it, fresh] = coarse_slot.emplace(idx, static_cast<int>(coarse.size()));
        if (fresh) {
            Cap cc;
            cc.index = idx;
            cc.scale = K_prev;
            cc.center.resize(idx.size());
            for (size_t a = 0; a < idx.size(); ++a)
                cc.center[a] = (static_cast<double>(idx[a]) + 0.5) / static_cast<double>(K_prev);
            cc.normal = paraboloid_normal(cc.center);
            coarse.push_back(std::move(cc));
        }
        cap_to_coarse[i] = it->second;
    }

    // candidates for the sup over V (dim j) and the inner min (dim j-1)
    CandidateOptions copt;
    copt.strategy = CandidateStrategy::Mixed;
    copt.budget = 32;
    copt.random_samples = 4;
    auto cand_sup = candidate_subspaces(caps, j, copt);
    auto cand_min = candidate_subspaces(coarse, j - 1, copt);
    auto masks = capture_masks(coarse, cand_min, K_prev);

    // Theta_{K,V} subsets, deduped
    const double thr = 1.0 / static_cast<double>(K_j);
    std::vector<std::vector<int>> subsets;
    std::map<std::vector<int>, int> seen;
    std::vector<int> subset_of(cand_sup.size());
    for (size_t vi = 0; vi < cand_sup.size(); ++vi) {
        std::vector<int> mem;
        for (size_t ci = 0; ci < ncaps; ++ci)
            if (dist_to_subspace(caps[ci].normal, cand_sup[vi]) <= thr)
                mem.push_back(static_cast<int>(ci));
        auto [it, fresh] = seen.emplace(mem, static_cast<int>(subsets.size()));
        if (fresh) subsets.push_back(mem);
        subset_of[vi] = it->second;
    }

    double block_side = static_cast<double>(K_j) * K_j;
    double q_side = static_cast<double>(K_prev) * K_prev;
    auto blocks = dyadic_cubes(u, block_side);

    std::vector<double> block_sup(blocks.size(), 0.0);
    std::vector<double> percap_total(ncaps, 0.0);

    for (size_t bi = 0; bi < blocks.size(); ++bi) {
        auto qcubes = dyadic_cubes(blocks[bi], q_side);
        QuadraturePlan plan(std::vector<Cube>(qcubes.begin(), qcubes.end()), grid);
        const auto& chunks = plan.chunks();
        const size_t nsub = subsets.size();
        const size_t ncoarse = coarse.size();
        std::vector<std::vector<double>> chunk_sub(chunks.size());
        std::vector<std::vector<double>> chunk_cap(chunks.size());
        parallel_for_chunks(chunks.size(), workers, [&](size_t ci) {
            std::vector<Vec> pts;
            double w = plan.chunk_points(chunks[ci], pts);
            std::vector<Complex> vals(ncaps);
            std::vector<Complex> csum(ncoarse);
            std::vector<double> acc_sub(nsub * ncoarse, 0.0);
            std::vector<double> acc_cap(ncaps, 0.0);
            for (const Vec& x : pts) {
                for (size_t t = 0; t < ncaps; ++t) {
                    vals[t] = extension_operator_cap(f, caps[t], x);
                    acc_cap[t] += std::pow(std::abs(vals[t]), p) * w;
                }
                for (size_t s = 0; s < nsub; ++s) {
                    std::fill(csum.begin(), csum.end(), Complex{});
                    for (int t : subsets[s]) csum[cap_to_coarse[t]] += vals[t];
                    for (size_t g = 0; g < ncoarse; ++g) {
                        double a = std::abs(csum[g]);
                        if (a > 0.0) acc_sub[s * ncoarse + g] += std::pow(a, p) * w;
                    }
                }
            }
            chunk_sub[ci] = std::move(acc_sub);
            chunk_cap[ci] = std::move(acc_cap);
        });
        for (size_t ci = 0; ci < chunks.size(); ++ci)
            for (size_t t = 0; t < ncaps; ++t) percap_total[t] += chunk_cap[ci][t];

        std::vector<double> subset_val(subsets.size(), 0.0);
        for (size_t s = 0; s < subsets.size(); ++s) {
            std::vector<double> qv(qcubes.size(), 0.0);
            for (size_t qi = 0; qi < qcubes.size(); ++qi) {
                std::vector<double> wts(ncoarse, 0.0);
                for (size_t ci = 0; ci < chunks.size(); ++ci)
                    if (chunks[ci].cell == qi)
                        for (size_t g = 0; g < ncoarse; ++g)
                            wts[g] += chunk_sub[ci][s * ncoarse + g];
                qv[qi] = broad_search(wts, masks, std::max(1, A_j / 2), SearchMode::Exact,
                                      1'000'000).value;
            }
            subset_val[s] = tree_sum(qv);
        }
        for (size_t vi = 0; vi < cand_sup.size(); ++vi)
            block_sup[bi] = std::max(block_sup[bi], subset_val[subset_of[vi]]);
    }

    double xi_val = std::pow(std::max(tree_sum(block_sup), 0.0), 1.0 / p);
    double rhs_sum = std::pow(std::max(tree_sum(percap_total), 0.0), 1.0 / p);
    double expo = n - 2.0 * (n + 1.0) / p + sqr(c.eps_slack);

    nlohmann::json params;
    params["K_j"] = K_j;
    params["K_prev"] = K_prev;
    params["A_j"] = A_j;
    params["p"] = p;
    params["j"] = j;
    if (!pr.theorem_mode) params["flags"] = "outside-theorem-range";
    return make_certificate(
        "decoupling-application(j=" + std::to_string(j) + ")", xi_val,
        {{"C K^{n-2(n+1)/p+eps^2} * (sum_theta ||Rf_theta||_p^p)^{1/p}",
          c.C_75 * std::pow(static_cast<double>(K_j), expo), rhs_sum, "candidate-sup/min"}},
        params.dump());
}

std::string suite_to_csv(const std::vector<InvariantRow>& rows, bool timestamp) {
    std::string out;
    if (timestamp) {
        auto now = std::chrono::system_clock::now();
        out += "# generated " +
               std::to_string(std::chrono::duration_cast<std::chrono::seconds>(
                                  now.time_since_epoch()).count()) + "\n";
    }
    out += "invariant,params,pass,measured\n";
    for (const InvariantRow& r : rows) {
        std::string params = r.params;
        for (char& ch : params)
            if (ch == ',') ch = ';';
        out += r.id + "," + params + "," + (r.pass ? "1" : "0") + "," + fmt_g17(r.measured) + "\n";
    }
    return out;
}

}  // namespace declab
