#pragma once

#include <optional>
#include <string>

#include "declab/field.hpp"
#include "declab/quadrature.hpp"

namespace declab {

enum class SearchMode { Exact, Greedy };

struct NormParams {
    double p = 4.0;
    int k = 2;
    int A = 1;
    long D = 0;    // fine cap scale; 0 = field's ambient D
    long D0 = 0;   // coarse scale; 0 = field's ambient D0
    SearchMode search_mode = SearchMode::Exact;
    long exact_budget = 1'000'000;  // max tuple enumerations
    CandidateOptions candidates;
    GridSpec grid;

    double p_k() const { return 2.0 * k / (k - 1.0); }
    void validate() const;
};

struct NormValue {
    double value = 0.0;
    double stderr_est = 0.0;  // zero in full-grid mode
};

// (int_U |F|^p)^{1/p}
NormValue lp_norm(const Field& f, const Cube& u, double p, const GridSpec& grid, int workers);

// (sum_theta ||F_theta||_{L^p(U)}^p)^{1/p} with caps at the given scale
// (packets grouped by which scale-cell contains their cap center).
NormValue decoupling_norm(const Field& f, long scale, const Cube& u, double p,
                          const GridSpec& grid, int workers);

// ||max_theta |F_theta|||_{L^p(U)}; pointwise max over caps.
NormValue max_cap_norm(const Field& f, long scale, const Cube& u, double p,
                       const GridSpec& grid, int workers);

struct PerCubeChoice {
    DyadicCube cube;
    std::vector<int> tuple;          // candidate indices, lexicographic
    int attaining_cap = -1;          // coarse slot, -1 when no cap survives
    double weight = 0.0;             // int_q |F_theta*|^p
};

struct BroadNormResult {
    double value = 0.0;
    double stderr_est = 0.0;  // sampled mode; ignores argmin jitter
    std::vector<PerCubeChoice> per_cube;
    std::vector<Subspace> candidates;       // shared candidate set
    std::vector<Cap> norm_caps;             // caps at the norm scale
    SearchMode mode = SearchMode::Exact;
    std::string approximation = "candidate-set-min";

    std::string to_json() const;
};

// BL^p_{k,A,scale}(U): per q in Q_{scale^2} inside U, the min over A-tuples
// of (k-1)-dim candidates of the max surviving cap weight.  Max over an
// empty surviving set is 0.
BroadNormResult broad_norm(const Field& f, const Cube& u, const NormParams& params,
                           long scale, int workers);

// Restricted k-broad part: broad norm of F_{D,V} at the coarse scale D0 on B.
BroadNormResult restricted_broad_norm(const Field& f, const Subspace& v,
                                      const DyadicCube& b, const NormParams& params,
                                      int workers);

// nu-based local level norm: integrands restricted pointwise to
// lambda/2 < |F_{theta'}| <= lambda.
BroadNormResult local_level_broad_norm(const Field& f, const Cube& u,
                                       const NormParams& params, double lambda,
                                       int workers);

// Per-cube cap weights int_q |F_{theta'}|^p with packets grouped to the given
// scale; lambda > 0 restricts pointwise to the level set.
std::vector<std::vector<double>> cap_weight_table(const Field& f,
                                                  const std::vector<DyadicCube>& cubes,
                                                  long scale, double p, const GridSpec& grid,
                                                  double lambda, int workers);

struct XiResult {
    double value = 0.0;
    // per B: best candidate subspace index and its restricted broad value
    std::vector<std::pair<int, double>> per_block;
    std::vector<Subspace> candidates_k;
    std::string approximation = "candidate-set-sup";
};

// Xi_{k,p}(M, D, U) = (sum_{B in Q_{D^2}, B in U} sup_V ||F_{D,V}||_{BL^p_{k,M,D0}(B)}^p)^{1/p}
XiResult xi_functional(const Field& f, int k, double p, int M, long D, const Cube& u,
                       const std::vector<Subspace>& candidates_k, const NormParams& params,
                       int workers);

// ---- pure combinatorial search (shared with tests/oracles) -----------------

struct CandidateMask {
    std::vector<uint64_t> bits;  // caps captured: dist(e(theta), V) <= 1/scale

    bool test(int i) const { return (bits[i / 64] >> (i % 64)) & 1; }
    void set(int i) { bits[i / 64] |= (1ULL << (i % 64)); }
};

std::vector<CandidateMask> capture_masks(const std::vector<Cap>& caps,
                                         const std::vector<Subspace>& candidates,
                                         long scale);

struct BroadSearchOutcome {
    double value = 0.0;      // max surviving weight (0 when none survive)
    int attaining = -1;
    std::vector<int> tuple;
};

// Exact mode enumerates all A-subsets (refuses past 'budget' naming the
// count); greedy picks the candidate covering the largest surviving weight,
// then locally perturbs.  Ties break lexicographically by candidate index,
// then cap index.
BroadSearchOutcome broad_search(const std::vector<double>& weights,
                                const std::vector<CandidateMask>& masks, int A,
                                SearchMode mode, long budget);

struct WeakTriangleReport {
    bool holds = false;
    double slack = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
};

// min-over-A-tuples max (F1+F2) <= min-over-A' max F1 + min-over-(A-A') max F2,
// exhaustively over the shared candidate set.
WeakTriangleReport weak_triangle_check(const std::vector<double>& f1,
                                       const std::vector<double>& f2,
                                       const std::vector<CandidateMask>& masks,
                                       int A, int A_prime);

}  // namespace declab
