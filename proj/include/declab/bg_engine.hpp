#pragma once

#include <optional>
#include <string>

#include "declab/norms.hpp"

namespace declab {

// Scale ladder K_1 << ... << K_n, A_1 > ... > A_{n+1} of tiny powers of R.
struct ScaleLadder {
    long R = 0;
    double eps = 0.1;
    double L = 4.0;
    std::vector<long> K;  // size n
    std::vector<long> A;  // size n+1
    bool overridden = false;
};

struct LadderOverride {
    std::vector<long> K;
    std::vector<long> A;
};

ScaleLadder make_ladder(long R, double eps, double L, int n,
                        const std::optional<LadderOverride>& ov = std::nullopt);

// Named constants absorbing every unquantified factor in the inequality
// checks.  Certificate failures at a default prompt constant tuning, not
// code changes.
struct Constants {
    double C_semi = 3.0;       // N^C in the weak triangle inequality (N = 2)
    double C_broadstep = 10.0; // exponent of (A/M) in the broad step
    double C_base = 10.0;      // coefficient of A * max-cap term in the base step
    double C_re0 = 16.0;       // redecomposition mass bound
    double C_75 = 32.0;        // local broad vs decoupling bounds (per cube / per class)
    double C_guth = 32.0;      // broad-vs-L2 restriction bound
    double C_42 = 32.0;        // local broad-vs-L2 bound on D-cubes
    double C_equi = 16.0;      // slab equidistribution bound
    double C_gamma = 16.0;     // gamma-cube count bound coefficient
    double eps_slack = 0.1;    // the epsilon in D^eps / K^{eps^2} slack factors
};

struct RhsTerm {
    std::string label;
    double coefficient = 1.0;
    double value = 0.0;
    std::string approx;  // "", "candidate-min", "candidate-sup"
};

// Machine-checked record of one inequality: lhs <= sum coeff * value.
// A failed certificate (negative slack) is still a valid record.
struct Certificate {
    std::string name;
    double lhs = 0.0;
    std::vector<RhsTerm> rhs_terms;
    double slack = 0.0;
    bool holds = false;
    std::string params;  // JSON snapshot

    std::string to_json() const;
};

Certificate make_certificate(std::string name, double lhs, std::vector<RhsTerm> terms,
                             std::string params_json);

// CSV summary: name, lhs, rhs, slack, pass (plus a timestamp header line).
std::string certificates_to_csv(const std::vector<Certificate>& certs, bool timestamp = true);
std::string certificates_to_json(const std::vector<Certificate>& certs);

// ---- decomposition steps ----------------------------------------------------

// BL^p_{k,A,D0}(U) <= D^n BL^p_{k+1,A/M,D}(U) + (A/M)^C Xi_{k,p}(M/2,D,U).
Certificate broad_step(const Field& f, const Cube& u, int k, int A, int M, long D, long D0,
                       double p, const Constants& c, const NormParams& base, int workers);

// ||F||_{L^p(U)} <= D^n ||F||_{BL^p_{2,A,D}(U)} + C A || max_theta |F_theta| ||_{L^p(U)}.
Certificate base_step(const Field& f, const Cube& u, int A, long D, double p,
                      const Constants& c, const NormParams& base, int workers);

// Chains the base step at K_1 and broad steps j = 2..m; emits one
// certificate per step plus the composite three-term bound.
std::vector<Certificate> recursion(const Field& f, const Cube& u, int m,
                                   const ScaleLadder& ladder, double p, const Constants& c,
                                   const NormParams& base, int workers);

// ---- multiscale checks (coarser-scale re-decomposition) ----------------------

struct MultiscaleSetup {
    Subspace V;
    DyadicCube B;        // side K^2
    long D = 0;          // re-decomposition scale, D <= sqrt(K)
    double mu = 0.0;     // 0 = use the heaviest bucket
    double lambda = 0.0; // 0 = use half the max coarse-cap level
    double gamma = 0.0;  // 0 = use the largest occupied class
    double p = 4.0;
    int k = 2;
    int A = 2;
};

std::vector<Certificate> multiscale_checks(const Field& f, const MultiscaleSetup& ms,
                                           const Constants& c, const NormParams& base,
                                           int workers);

// ---- level-set regime classifier ---------------------------------------------

enum class Regime { SmallLambda, LargeLambda, Gap };

struct RegimeResult {
    Regime regime = Regime::Gap;
    bool small_holds = false;
    bool large_holds = false;
    double small_threshold = 0.0;  // lambda <= t1
    double large_threshold = 0.0;  // lambda >= t2
    std::string note;
};

RegimeResult regime_classify(int n, int k, double p, long D, double mu, double lambda,
                             double gamma);

// ---- restriction-type empirical checks ---------------------------------------

// ||F_{D,V}||_{BL^p_{k,A,D0}(B)} <= C D^{e^2 - 1 - (n-k+1)(1/2 - 1/p)} ||F_{D,V}||_{L2(B)}
Certificate broad_l2_check(const Field& f, const Subspace& v, const DyadicCube& b,
                           const Constants& c, const NormParams& base, int workers);

// Same shape on a side-D cube with exponent e^2 - 1/2 - (n-k+1)(1/2 - 1/p).
Certificate restricted_l2_check(const Field& f, const Subspace& v, const DyadicCube& q,
                                const Constants& c, const NormParams& base, int workers);

// max_j ||F_{sqrtD, V_j}||^2_{L2(Q)} <= C D^eps (sqrtD/D)^{n-k+1} ||F_{D,V}||^2_{L2(Q)}
// via re-decomposition at scale sqrt(D) and slab partition along V-perp.
Certificate equidistribution_check(const Field& f, const Subspace& v, const DyadicCube& q,
                                   const Constants& c, const NormParams& base, int workers);

// ||F1+F2||_{BL(A)} <= 2^C (||F1||_{BL(A/2)} + ||F2||_{BL(A/2)})
Certificate semi_triangle_check(const Field& f1, const Field& f2, const Cube& u,
                                const Constants& c, const NormParams& base, int workers);

}  // namespace declab
