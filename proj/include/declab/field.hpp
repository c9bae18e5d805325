#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "declab/wave_packets.hpp"

namespace declab {

struct BumpSpec {
    int order = 12;
    double support_fraction = 0.5;   // of the dual cell width 2 pi
    double truncation_tol = 1e-10;   // neglected pointwise mass per packet
};

// A function on R^{n+1} with Fourier support in an O(1/D^2)-neighborhood of
// the truncated paraboloid, represented as a finite wave-packet
// superposition.  Immutable after synthesis.
struct Field {
    Ambient amb;
    std::vector<Cap> caps;           // build_cap_partition(amb)
    std::vector<WavePacket> packets; // sorted by (cap index, tile index)
    BumpSpec bump_spec;
    double support_constant = 0.0;   // c0: Fourier support within N_{c0/D^2} of the paraboloid

    const BumpGenerator& generator() const;

private:
    mutable std::shared_ptr<BumpGenerator> gen_;
};

// c0 for a given generator in ambient dimension n: transverse spill w/D per
// axis lifts quadratically, so c0 = w * (1 + n * w) with w the frequency
// halfwidth of the 1D factor.
double support_constant(const BumpGenerator& g, int n);

// Builds a Field; every packet must reference a cap of amb's partition and
// carries a freshly computed l2 mass.  Throws on unknown caps.
Field synthesize(const Ambient& amb, std::vector<WavePacket> packets,
                 const BumpSpec& bump = {});

// Pointwise values; packets farther than the truncation radius (tile metric)
// from the point contribute 0.
std::vector<Complex> evaluate(const Field& f, std::span<const Vec> pts);
Complex evaluate_at(const Field& f, const Vec& x);

// Packets labeled theta (label-based; the bump's c0-enlarged frequency cell
// makes this the operative cap restriction, see support_constant).
Field restrict_to_cap(const Field& f, const Cap& theta);

// F_{D,V}: packets whose cap normal is within 1/D of V.
Field restrict_to_subspace_caps(const Field& f, const Subspace& v);

Field subfield(const Field& f, std::vector<WavePacket> packets);

// ---- fast evaluation machinery ---------------------------------------------

// Caps grouped with per-cap packet data for streaming evaluation.
class FieldEvaluator {
public:
    explicit FieldEvaluator(const Field& f);

    int cap_count() const { return static_cast<int>(groups_.size()); }
    const Cap& cap(int i) const;
    // Per-cap values F_theta(x) for every cap with packets; out has cap_count().
    void eval_caps(const Vec& x, Complex* out) const;
    Complex eval(const Vec& x) const;
    // Map from evaluator cap slots to positions in f.caps.
    const std::vector<int>& cap_positions() const { return cap_pos_; }

private:
    struct PacketData {
        double j[kMaxDim];   // lattice index
        double re, im;
    };
    struct Group {
        Cap cap;
        double frame[kMaxDim][kMaxDim];
        double inv_spacing[kMaxDim];
        double lifted[kMaxDim];
        std::vector<PacketData> packets;
    };
    std::vector<Group> groups_;
    std::vector<int> cap_pos_;
    BumpGenerator gen_;
    double radius_ = 0.0;
    int dim_ = 0;
};

// ---- serialization (field-v1) ----------------------------------------------

std::string field_to_json(const Field& f);
Field field_from_json(const std::string& text);

// ---- extension operator and parabolic rescaling ----------------------------

// Samples of a coefficient function on a uniform xi-grid over B^n; values
// outside the unit ball are treated as zero.
struct CoefficientGrid {
    int n = 1;
    double spacing = 0.0;             // <= 1/(2D) for downstream use
    Vec origin;                       // xi of sample index 0
    std::vector<long> shape;          // samples per axis
    std::vector<Complex> values;      // row-major

    Complex at(std::span<const long> idx) const;
    Vec xi(std::span<const long> idx) const;
    static CoefficientGrid uniform(int n, long per_axis);  // covers [-1,1]^n
};

// Rf(x,t) = int_{B^n} e^{i x.xi} e^{i t |xi|^2} f(xi) dxi by trapezoid over
// the grid.  Quadrature error is O(h^2 ||f|| (1+|x|+|t|)^2) per point.
Complex extension_operator(const CoefficientGrid& f, const Vec& x_and_t);
std::vector<Complex> extension_operator(const CoefficientGrid& f, std::span<const Vec> pts);

// Same integral restricted to the transverse cell of a scale-K cap.
Complex extension_operator_cap(const CoefficientGrid& f, const Cap& cap, const Vec& x_and_t);

struct ParabolicRescaling {
    CoefficientGrid g;        // g(eta) = f(xi_theta + eta/K) on B^n
    double jacobian_factor;   // K^{-n}
    Vec cap_center;           // xi_theta
    long K;

    // A(x,t) = ((x + 2 t xi_theta)/K, t/K^2)
    Vec map(const Vec& x_and_t) const;
    // phase phi(x,t) = x . xi_theta + t |xi_theta|^2
    double phase(const Vec& x_and_t) const;
    // e^{i phi} K^{-n} Rg(A(x,t)); equals Rf_theta(x,t)
    Complex rescaled_value(const Vec& x_and_t) const;
};

// Requires f supported in theta's cell (checked up to tol on the samples).
ParabolicRescaling parabolic_rescale(const CoefficientGrid& f, const Cap& theta);

}  // namespace declab
