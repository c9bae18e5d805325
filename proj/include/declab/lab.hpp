#pragma once

#include <optional>

#include "declab/bg_engine.hpp"

namespace declab {

enum class EnsembleKind { RandomPhase, Constant, SinglePacket, Flat, Focusing };

EnsembleKind ensemble_kind_from_string(const std::string& s);
std::string to_string(EnsembleKind k);

struct Ensemble {
    EnsembleKind kind = EnsembleKind::RandomPhase;
    Ambient amb;
    int density = 1;   // packets per cap (random-phase / flat)
    uint64_t seed = 0;
    std::optional<Cube> region;    // tile support region; default [0, D^2)^{n+1}
    std::optional<Subspace> V;     // flat(V) only
    BumpSpec bump;
};

Field generate(const Ensemble& e);

// Default laboratory region: the dyadic cube [0, D^2)^{n+1}.
DyadicCube standard_block(const Ambient& amb);

// ---- exponent sweeps ---------------------------------------------------------

struct SweepSpec {
    EnsembleKind kind = EnsembleKind::RandomPhase;
    int n = 2;
    int k = 2;
    double p = 4.0;
    std::vector<long> D_list;
    std::string v_strategy = "coordinate";  // coordinate | random | normal-span
    int A = 2;
    std::vector<uint64_t> seeds;
    double eps = 0.1;
    double L = 4.0;
    int density = 1;
    NormParams base;
};

struct SweepRow {
    long D = 0;
    uint64_t seed = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    double ratio_stderr = 0.0;
    std::string flags;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    bool fit_done = false;
    double alpha = 0.0;        // OLS slope of log2 ratio vs log2 D
    double fit_residual = 0.0; // RMS residual
    double target_exponent = 0.0;  // n - 2(n+1)/p
    int zero_lhs_rows = 0;
    std::string flags;         // e.g. outside-theorem-range
    std::string note;
};

// lhs = ||F_{D,V}||_{BL^p_{k,A,D0}(B)}, rhs = ||F_{D,V}||_{p,D,B*}; fitted
// exponent of the ratio against D.  p must lie in the admissible range
// (theorem mode) or beyond the conjectured threshold (flagged).
SweepReport theorem_sweep(const SweepSpec& spec, int workers);

// Admissible p ranges; throws naming both when p fits neither.
struct PRangeCheck {
    bool theorem_mode = false;
    bool conjecture_mode = false;
    double theorem_low = 0.0, theorem_high = 0.0, conjecture_low = 0.0;
};
PRangeCheck check_p_range(int n, int k, double p);

// ---- decoupling application check ------------------------------------------

// Xi_{j,p}(f)(A_j/2, K_j, U) computed from extension-operator fields against
// C K_j^{n-2(n+1)/p+eps^2} (sum_theta ||Rf_theta||^p_{L^p(U)})^{1/p}.
Certificate decoupling_application_check(const CoefficientGrid& f, long K_j, long K_prev,
                                         int A_j, double p, int j, const DyadicCube& u,
                                         const Constants& c, const GridSpec& grid,
                                         int workers);

// ---- invariant suite ---------------------------------------------------------

struct InvariantRow {
    std::string id;
    std::string params;
    bool pass = false;
    double measured = 0.0;
};

struct SuiteOptions {
    std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
    int max_n = 2;
    long max_D = 16;
    GridSpec grid;
    Constants constants;
    double bump_corruption = 1.0;  // fault-injection hook for the partition row
    int workers = 1;
    bool quick = false;            // trims the heaviest rows (used by unit tests)
};

std::vector<InvariantRow> invariant_suite(const SuiteOptions& opts);

std::string suite_to_csv(const std::vector<InvariantRow>& rows, bool timestamp = true);

}  // namespace declab
