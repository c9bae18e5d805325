#include "declab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "declab/parallel.hpp"
#include "json.hpp"

namespace declab {

void NormParams::validate() const {
    require(p >= 2.0, "NormParams: p must be >= 2");
    require(k >= 2, "NormParams: k must be >= 2");
    require(A >= 1, "NormParams: A must be >= 1");
    if (D > 0 && D0 > 0) require(D0 <= D, "NormParams: D0 must be <= D");
}

namespace {

// Fine caps (evaluator slots) grouped by the scale-S cell containing their
// center.  Coarse slots are ordered lexicographically by index.
struct CoarseGrouping {
    long scale = 0;
    std::vector<Cap> coarse;
    std::vector<int> fine_to_coarse;  // per evaluator slot
};

CoarseGrouping group_caps(const FieldEvaluator& ev, long scale) {
    CoarseGrouping g;
    g.scale = scale;
    std::map<std::vector<long>, int> slot;
    std::vector<std::vector<long>> fine_keys(ev.cap_count());
    for (int i = 0; i < ev.cap_count(); ++i) {
        const Cap& c = ev.cap(i);
        std::vector<long> idx(c.center.size());
        for (size_t a = 0; a < c.center.size(); ++a)
            idx[a] = static_cast<long>(std::floor(c.center[a] * static_cast<double>(scale)));
        fine_keys[i] = idx;
        slot.emplace(idx, 0);
    }
    int next = 0;
    for (auto& [idx, s] : slot) {  // std::map: lexicographic order
        s = next++;
        Cap c;
        c.index = idx;
        c.scale = scale;
        c.center.resize(idx.size());
        for (size_t a = 0; a < idx.size(); ++a)
            c.center[a] = (static_cast<double>(idx[a]) + 0.5) / static_cast<double>(scale);
        c.normal = paraboloid_normal(c.center);
        g.coarse.push_back(std::move(c));
    }
    g.fine_to_coarse.resize(ev.cap_count());
    for (int i = 0; i < ev.cap_count(); ++i) g.fine_to_coarse[i] = slot.at(fine_keys[i]);
    return g;
}

std::vector<Cube> as_cubes(const std::vector<DyadicCube>& cs) {
    return std::vector<Cube>(cs.begin(), cs.end());
}

// Cubes of Q_{side} tiling u; u must be aligned to that grid.
std::vector<DyadicCube> tiling_cubes(const Cube& u, double side) {
    DyadicCube region(u.corner, u.side);
    return dyadic_cubes(region, side);
}

struct WeightTable {
    std::vector<std::vector<double>> weights;   // [cell][coarse]
    std::vector<std::vector<double>> variance;  // sampled mode only, same shape
};

// weights[cell][coarse] = int_cell |F_{theta'}|^p, optionally restricted to
// the level set lambda/2 < |F_{theta'}| <= lambda.
WeightTable coarse_weights(const FieldEvaluator& ev, const CoarseGrouping& grp,
                           const QuadraturePlan& plan, double p, double lambda,
                           int workers) {
    const size_t ncoarse = grp.coarse.size();
    const auto& chunks = plan.chunks();
    const bool sampled = plan.sampled();
    std::vector<std::vector<double>> chunk_acc(chunks.size());
    std::vector<std::vector<double>> chunk_sq(sampled ? chunks.size() : 0);
    parallel_for_chunks(chunks.size(), workers, [&](size_t ci) {
        std::vector<Vec> pts;
        double w = plan.chunk_points(chunks[ci], pts);
        std::vector<Complex> fine(ev.cap_count());
        std::vector<Complex> coarse(ncoarse);
        std::vector<double> acc(ncoarse, 0.0);
        std::vector<double> sq(sampled ? ncoarse : 0, 0.0);
        for (const Vec& x : pts) {
            ev.eval_caps(x, fine.data());
            std::fill(coarse.begin(), coarse.end(), Complex{});
            for (int i = 0; i < ev.cap_count(); ++i) coarse[grp.fine_to_coarse[i]] += fine[i];
            for (size_t j = 0; j < ncoarse; ++j) {
                double a = std::abs(coarse[j]);
                if (lambda > 0.0 && !(a > lambda / 2.0 && a <= lambda)) continue;
                double v = std::pow(a, p);
                acc[j] += v * w;
                if (sampled) sq[j] += v * v;
            }
        }
        chunk_acc[ci] = std::move(acc);
        if (sampled) chunk_sq[ci] = std::move(sq);
    });
    WeightTable out;
    out.weights.assign(plan.cell_count(), std::vector<double>(ncoarse, 0.0));
    for (size_t ci = 0; ci < chunks.size(); ++ci)
        for (size_t j = 0; j < ncoarse; ++j)
            out.weights[chunks[ci].cell][j] += chunk_acc[ci][j];
    if (sampled) {
        const int dim = static_cast<int>(plan.cell(0).corner.size());
        std::vector<std::vector<double>> sq(plan.cell_count(), std::vector<double>(ncoarse, 0.0));
        std::vector<long> npts(plan.cell_count(), 0);
        for (size_t ci = 0; ci < chunks.size(); ++ci) {
            npts[chunks[ci].cell] += chunks[ci].npoints;
            for (size_t j = 0; j < ncoarse; ++j)
                sq[chunks[ci].cell][j] += chunk_sq[ci][j];
        }
        out.variance.assign(plan.cell_count(), std::vector<double>(ncoarse, 0.0));
        for (size_t c = 0; c < plan.cell_count(); ++c) {
            double vol = std::pow(plan.cell(c).side, dim);
            double n = static_cast<double>(npts[c]);
            for (size_t j = 0; j < ncoarse; ++j) {
                double mean = out.weights[c][j] / vol;
                double second = sq[c][j] / n;
                double v = second - mean * mean;
                if (v > 0.0 && n > 1.0) out.variance[c][j] = vol * vol * v / n;
            }
        }
    }
    return out;
}

}  // namespace

// ---- combinatorial search ---------------------------------------------------

std::vector<CandidateMask> capture_masks(const std::vector<Cap>& caps,
                                         const std::vector<Subspace>& candidates,
                                         long scale) {
    const double thr = 1.0 / static_cast<double>(scale);
    std::vector<CandidateMask> masks(candidates.size());
    const size_t words = (caps.size() + 63) / 64;
    for (size_t v = 0; v < candidates.size(); ++v) {
        masks[v].bits.assign(words, 0);
        for (size_t c = 0; c < caps.size(); ++c)
            if (dist_to_subspace(caps[c].normal, candidates[v]) <= thr)
                masks[v].set(static_cast<int>(c));
    }
    return masks;
}

namespace {

double surviving_max(const std::vector<double>& w, const std::vector<uint64_t>& covered,
                     int* attaining) {
    double best = 0.0;
    int arg = -1;
    for (size_t c = 0; c < w.size(); ++c) {
        if ((covered[c / 64] >> (c % 64)) & 1) continue;
        if (arg < 0 || w[c] > best) { best = w[c]; arg = static_cast<int>(c); }
    }
    if (attaining) *attaining = arg;
    return arg < 0 ? 0.0 : best;
}

double tuple_count(size_t n, int a) {  // C(n, a), saturating
    double r = 1.0;
    for (int i = 0; i < a; ++i) {
        r *= static_cast<double>(n - i) / static_cast<double>(i + 1);
        if (r > 1e18) return 1e18;
    }
    return r;
}

void or_mask(std::vector<uint64_t>& covered, const CandidateMask& m) {
    for (size_t w = 0; w < covered.size(); ++w) covered[w] |= m.bits[w];
}

}  // namespace

BroadSearchOutcome broad_search(const std::vector<double>& weights,
                                const std::vector<CandidateMask>& masks, int A,
                                SearchMode mode, long budget) {
    const size_t ncand = masks.size();
    const size_t words = (weights.size() + 63) / 64;
    BroadSearchOutcome out;

    if (A == 0 || ncand == 0) {
        std::vector<uint64_t> covered(words, 0);
        out.value = surviving_max(weights, covered, &out.attaining);
        return out;
    }
    if (static_cast<size_t>(A) >= ncand) {
        std::vector<uint64_t> covered(words, 0);
        out.tuple.resize(ncand);
        for (size_t v = 0; v < ncand; ++v) {
            out.tuple[v] = static_cast<int>(v);
            or_mask(covered, masks[v]);
        }
        out.value = surviving_max(weights, covered, &out.attaining);
        return out;
    }

    if (mode == SearchMode::Exact) {
        double cnt = tuple_count(ncand, A);
        if (cnt > static_cast<double>(budget)) {
            throw Error("broad_search: exact enumeration needs " +
                        std::to_string(static_cast<long long>(cnt)) +
                        " tuples, over the budget of " + std::to_string(budget));
        }
        std::vector<int> pick(A);
        for (int i = 0; i < A; ++i) pick[i] = i;
        bool first = true;
        for (;;) {
            std::vector<uint64_t> covered(words, 0);
            for (int i = 0; i < A; ++i) or_mask(covered, masks[pick[i]]);
            int att = -1;
            double v = surviving_max(weights, covered, &att);
            if (first || v < out.value) {
                first = false;
                out.value = v;
                out.attaining = att;
                out.tuple = pick;
            }
            int k = A - 1;
            while (k >= 0 && pick[k] == static_cast<int>(ncand) - A + k) --k;
            if (k < 0) break;
            ++pick[k];
            for (int j = k + 1; j < A; ++j) pick[j] = pick[j - 1] + 1;
        }
        return out;
    }

    // Greedy: repeatedly take the candidate covering the largest surviving
    // weight, then first-improvement swaps.
    std::vector<int> chosen;
    std::vector<char> used(ncand, 0);
    std::vector<uint64_t> covered(words, 0);
    for (int step = 0; step < A; ++step) {
        int best = -1;
        double best_cover = -1.0;
        for (size_t v = 0; v < ncand; ++v) {
            if (used[v]) continue;
            double cover = 0.0;
            for (size_t c = 0; c < weights.size(); ++c) {
                bool cov = (covered[c / 64] >> (c % 64)) & 1;
                if (!cov && masks[v].test(static_cast<int>(c))) cover += weights[c];
            }
            if (best < 0 || cover > best_cover) { best = static_cast<int>(v); best_cover = cover; }
        }
        if (best < 0) break;
        used[best] = 1;
        chosen.push_back(best);
        or_mask(covered, masks[best]);
    }
    auto value_of = [&](const std::vector<int>& tuple, int* att) {
        std::vector<uint64_t> cov(words, 0);
        for (int v : tuple) or_mask(cov, masks[v]);
        return surviving_max(weights, cov, att);
    };
    int att = -1;
    double val = value_of(chosen, &att);
    bool improved = true;
    int guard = 0;
    while (improved && guard++ < 64) {
        improved = false;
        for (size_t i = 0; i < chosen.size() && !improved; ++i) {
            for (size_t v = 0; v < ncand && !improved; ++v) {
                if (used[v]) continue;
                std::vector<int> alt = chosen;
                alt[i] = static_cast<int>(v);
                int aa = -1;
                double nv = value_of(alt, &aa);
                if (nv < val) {
                    used[chosen[i]] = 0;
                    used[v] = 1;
                    chosen = alt;
                    val = nv;
                    att = aa;
                    improved = true;
                }
            }
        }
    }
    std::sort(chosen.begin(), chosen.end());
    out.tuple = std::move(chosen);
    out.value = val;
    out.attaining = att;
    return out;
}

WeakTriangleReport weak_triangle_check(const std::vector<double>& f1,
                                       const std::vector<double>& f2,
                                       const std::vector<CandidateMask>& masks, int A,
                                       int A_prime) {
    require(A_prime >= 1 && A_prime <= A, "weak_triangle_check: need 1 <= A' <= A");
    require(f1.size() == f2.size(), "weak_triangle_check: weight size mismatch");
    std::vector<double> sum(f1.size());
    for (size_t i = 0; i < f1.size(); ++i) {
        require(f1[i] >= 0.0 && f2[i] >= 0.0, "weak_triangle_check: weights must be nonnegative");
        sum[i] = f1[i] + f2[i];
    }
    const long budget = 100'000'000;
    WeakTriangleReport r;
    r.lhs = broad_search(sum, masks, A, SearchMode::Exact, budget).value;
    double t1 = broad_search(f1, masks, A_prime, SearchMode::Exact, budget).value;
    double t2 = broad_search(f2, masks, A - A_prime, SearchMode::Exact, budget).value;
    r.rhs = t1 + t2;
    r.slack = r.rhs - r.lhs;
    r.holds = r.slack >= 0.0;
    return r;
}

// ---- norm operations --------------------------------------------------------

NormValue lp_norm(const Field& f, const Cube& u, double p, const GridSpec& grid,
                  int workers) {
    require(p >= 1.0, "lp_norm: p must be >= 1");
    require(u.side > 0.0, "lp_norm: degenerate region");
    FieldEvaluator ev(f);
    QuadraturePlan plan(region_strata(u, grid), grid);
    auto acc = integrate(plan, [&](const Vec& x) {
        return std::pow(std::abs(ev.eval(x)), p);
    }, workers);
    NormValue out;
    out.value = std::pow(std::max(acc.sum, 0.0), 1.0 / p);
    if (acc.variance > 0.0 && acc.sum > 0.0)
        out.stderr_est = out.value / p * acc.stderr_est() / acc.sum;
    return out;
}

namespace {

NormValue percap_norm(const Field& f, long scale, const Cube& u, double p,
                      const GridSpec& grid, int workers, bool pointwise_max) {
    FieldEvaluator ev(f);
    if (ev.cap_count() == 0) return {};
    CoarseGrouping grp = group_caps(ev, scale);
    QuadraturePlan plan(region_strata(u, grid), grid);
    struct Buffers {
        std::vector<Complex> fine, coarse;
    };
    auto acc = integrate(plan, [&](const Vec& x) {
        thread_local Buffers b;
        b.fine.assign(ev.cap_count(), Complex{});
        b.coarse.assign(grp.coarse.size(), Complex{});
        ev.eval_caps(x, b.fine.data());
        for (int i = 0; i < ev.cap_count(); ++i) b.coarse[grp.fine_to_coarse[i]] += b.fine[i];
        double s = 0.0;
        if (pointwise_max) {
            double m = 0.0;
            for (const Complex& v : b.coarse) m = std::max(m, std::abs(v));
            s = std::pow(m, p);
        } else {
            for (const Complex& v : b.coarse) s += std::pow(std::abs(v), p);
        }
        return s;
    }, workers);
    NormValue out;
    out.value = std::pow(std::max(acc.sum, 0.0), 1.0 / p);
    if (acc.variance > 0.0 && acc.sum > 0.0)
        out.stderr_est = out.value / p * acc.stderr_est() / acc.sum;
    return out;
}

}  // namespace

NormValue decoupling_norm(const Field& f, long scale, const Cube& u, double p,
                          const GridSpec& grid, int workers) {
    return percap_norm(f, scale, u, p, grid, workers, false);
}

NormValue max_cap_norm(const Field& f, long scale, const Cube& u, double p,
                       const GridSpec& grid, int workers) {
    return percap_norm(f, scale, u, p, grid, workers, true);
}

namespace {

BroadNormResult broad_norm_impl(const Field& f, const Cube& u, const NormParams& params,
                                long scale, double lambda, int workers) {
    params.validate();
    BroadNormResult res;
    res.mode = params.search_mode;

    auto cubes = tiling_cubes(u, static_cast<double>(scale) * static_cast<double>(scale));
    FieldEvaluator ev(f);
    if (ev.cap_count() == 0) {
        for (const auto& q : cubes) res.per_cube.push_back({q, {}, -1, 0.0});
        return res;
    }
    CoarseGrouping grp = group_caps(ev, scale);
    res.norm_caps = grp.coarse;
    res.candidates = candidate_subspaces(grp.coarse, params.k - 1, params.candidates);
    auto masks = capture_masks(grp.coarse, res.candidates, scale);

    QuadraturePlan plan(as_cubes(cubes), params.grid);
    auto table = coarse_weights(ev, grp, plan, params.p, lambda, workers);

    std::vector<double> chosen(cubes.size(), 0.0);
    double var = 0.0;
    for (size_t qi = 0; qi < cubes.size(); ++qi) {
        auto best = broad_search(table.weights[qi], masks, params.A, params.search_mode,
                                 params.exact_budget);
        PerCubeChoice pc;
        pc.cube = cubes[qi];
        pc.tuple = best.tuple;
        pc.attaining_cap = best.attaining;
        pc.weight = best.value;
        chosen[qi] = best.value;
        if (!table.variance.empty() && best.attaining >= 0)
            var += table.variance[qi][best.attaining];
        res.per_cube.push_back(std::move(pc));
    }
    double sum = std::max(tree_sum(chosen), 0.0);
    res.value = std::pow(sum, 1.0 / params.p);
    if (var > 0.0 && sum > 0.0)
        res.stderr_est = res.value / params.p * std::sqrt(var) / sum;
    return res;
}

}  // namespace

BroadNormResult broad_norm(const Field& f, const Cube& u, const NormParams& params,
                           long scale, int workers) {
    return broad_norm_impl(f, u, params, scale, 0.0, workers);
}

BroadNormResult restricted_broad_norm(const Field& f, const Subspace& v,
                                      const DyadicCube& b, const NormParams& params,
                                      int workers) {
    require(v.dim == params.k, "restricted_broad_norm: V must have dimension k");
    long D = params.D > 0 ? params.D : f.amb.D;
    long D0 = params.D0 > 0 ? params.D0 : f.amb.D0;
    require(std::abs(b.side - static_cast<double>(D) * static_cast<double>(D)) < 1e-9,
            "restricted_broad_norm: B must have side D^2");
    Field sub = restrict_to_subspace_caps(f, v);
    return broad_norm_impl(sub, b, params, D0, 0.0, workers);
}

BroadNormResult local_level_broad_norm(const Field& f, const Cube& u,
                                       const NormParams& params, double lambda,
                                       int workers) {
    require(is_dyadic(lambda), "local_level_broad_norm: lambda must be dyadic");
    long D0 = params.D0 > 0 ? params.D0 : f.amb.D0;
    return broad_norm_impl(f, u, params, D0, lambda, workers);
}

std::vector<std::vector<double>> cap_weight_table(const Field& f,
                                                  const std::vector<DyadicCube>& cubes,
                                                  long scale, double p, const GridSpec& grid,
                                                  double lambda, int workers) {
    FieldEvaluator ev(f);
    if (ev.cap_count() == 0)
        return std::vector<std::vector<double>>(cubes.size());
    CoarseGrouping grp = group_caps(ev, scale);
    QuadraturePlan plan(as_cubes(cubes), grid);
    return coarse_weights(ev, grp, plan, p, lambda, workers).weights;
}

XiResult xi_functional(const Field& f, int k, double p, int M, long D, const Cube& u,
                       const std::vector<Subspace>& candidates_k, const NormParams& params,
                       int workers) {
    require(M >= 1, "xi_functional: M must be >= 1");
    XiResult res;
    res.candidates_k = candidates_k;

    FieldEvaluator ev(f);
    long D0 = params.D0 > 0 ? params.D0 : f.amb.D0;
    auto blocks = tiling_cubes(u, static_cast<double>(D) * static_cast<double>(D));
    if (ev.cap_count() == 0 || candidates_k.empty()) {
        res.per_block.assign(blocks.size(), {-1, 0.0});
        return res;
    }

    // Candidate subspaces induce fine-cap subsets Theta_{D,V}; dedupe.
    const double thr = 1.0 / static_cast<double>(D);
    std::vector<int> subset_of(candidates_k.size());
    std::vector<std::vector<int>> subsets;  // fine slots per distinct subset
    std::map<std::vector<int>, int> seen;
    for (size_t vi = 0; vi < candidates_k.size(); ++vi) {
        std::vector<int> members;
        for (int c = 0; c < ev.cap_count(); ++c)
            if (dist_to_subspace(ev.cap(c).normal, candidates_k[vi]) <= thr)
                members.push_back(c);
        auto [it, fresh] = seen.emplace(members, static_cast<int>(subsets.size()));
        if (fresh) subsets.push_back(members);
        subset_of[vi] = it->second;
    }

    CoarseGrouping grp = group_caps(ev, D0);
    auto inner_candidates = candidate_subspaces(grp.coarse, k - 1, params.candidates);
    auto masks = capture_masks(grp.coarse, inner_candidates, D0);
    const size_t ncoarse = grp.coarse.size();
    const size_t nsub = subsets.size();

    std::vector<double> block_sup(blocks.size(), 0.0);
    std::vector<int> block_arg(blocks.size(), -1);

    double q_side = static_cast<double>(D0) * static_cast<double>(D0);
    for (size_t bi = 0; bi < blocks.size(); ++bi) {
        auto qcubes = dyadic_cubes(blocks[bi], q_side);
        QuadraturePlan plan(as_cubes(qcubes), params.grid);
        const auto& chunks = plan.chunks();
        // weights per (chunk, subset, coarse)
        std::vector<std::vector<double>> chunk_acc(chunks.size());
        parallel_for_chunks(chunks.size(), workers, [&](size_t ci) {
            std::vector<Vec> pts;
            double w = plan.chunk_points(chunks[ci], pts);
            std::vector<Complex> fine(ev.cap_count());
            std::vector<Complex> coarse(ncoarse);
            std::vector<double> acc(nsub * ncoarse, 0.0);
            for (const Vec& x : pts) {
                ev.eval_caps(x, fine.data());
                for (size_t s = 0; s < nsub; ++s) {
                    std::fill(coarse.begin(), coarse.end(), Complex{});
                    for (int c : subsets[s]) coarse[grp.fine_to_coarse[c]] += fine[c];
                    for (size_t j = 0; j < ncoarse; ++j) {
                        double a = std::abs(coarse[j]);
                        if (a > 0.0) acc[s * ncoarse + j] += std::pow(a, p) * w;
                    }
                }
            }
            chunk_acc[ci] = std::move(acc);
        });
        // per subset: BL_{k,M,D0}(B)^p from its per-cube weights
        std::vector<double> subset_val(nsub, 0.0);
        for (size_t s = 0; s < nsub; ++s) {
            std::vector<double> qvals(qcubes.size(), 0.0);
            for (size_t qi = 0; qi < qcubes.size(); ++qi) {
                std::vector<double> wts(ncoarse, 0.0);
                for (size_t ci = 0; ci < chunks.size(); ++ci)
                    if (chunks[ci].cell == qi)
                        for (size_t j = 0; j < ncoarse; ++j)
                            wts[j] += chunk_acc[ci][s * ncoarse + j];
                qvals[qi] = broad_search(wts, masks, M, params.search_mode,
                                         params.exact_budget).value;
            }
            subset_val[s] = tree_sum(qvals);  // = BL^p
        }
        for (size_t vi = 0; vi < candidates_k.size(); ++vi) {
            double v = subset_val[subset_of[vi]];
            if (v > block_sup[bi]) { block_sup[bi] = v; block_arg[bi] = static_cast<int>(vi); }
        }
        res.per_block.emplace_back(block_arg[bi], block_sup[bi]);
    }
    res.value = std::pow(std::max(tree_sum(block_sup), 0.0), 1.0 / p);
    return res;
}

std::string BroadNormResult::to_json() const {
    nlohmann::json j;
    j["value"] = value;
    j["search_mode"] = mode == SearchMode::Exact ? "exact" : "greedy";
    j["approximation"] = approximation;
    auto& cubes = j["per_cube"] = nlohmann::json::array();
    for (const PerCubeChoice& pc : per_cube) {
        nlohmann::json e;
        e["cube"] = {{"corner", pc.cube.corner}, {"side", pc.cube.side}};
        e["weight"] = pc.weight;
        auto& tv = e["tuple"] = nlohmann::json::array();
        for (int t : pc.tuple) {
            nlohmann::json sub;
            sub["candidate"] = t;
            sub["basis"] = nlohmann::json::array();
            for (const Vec& b : candidates[t].basis) sub["basis"].push_back(b);
            tv.push_back(sub);
        }
        if (pc.attaining_cap >= 0) {
            e["attaining_cap"] = norm_caps[pc.attaining_cap].index;
        } else {
            e["attaining_cap"] = nullptr;
        }
        cubes.push_back(e);
    }
    return j.dump();
}

}  // namespace declab
