#pragma once

#include <functional>
#include <span>
#include <vector>

#include "declab/geometry.hpp"

namespace declab {

// Quadrature contract for every int |.|^p in the lab: full tensor grid with
// spacing <= 1/8 when affordable, else stratified random sampling with a
// budget and reported standard error.
struct GridSpec {
    enum class Mode { Auto, FullGrid, Sample };
    Mode mode = Mode::Auto;
    double spacing = 0.125;
    long sample_budget = 10'000'000;
    long max_full_points = 100'000'000;
    long min_points_per_stratum = 16;
    uint64_t seed = 0;
    // When > 0, whole-region norms stratify into dyadic cells of this side,
    // so that norms over nested regions share strata (and, in sample mode,
    // the exact same points).
    double strata_side = 0.0;

    void validate() const;
};

// The region split into strata: Q_{strata_side} cells when set and
// divisible, else the whole region.
std::vector<Cube> region_strata(const Cube& u, const GridSpec& spec);

// One stratum of a quadrature plan: a cell plus deterministic point blocks.
struct QuadChunk {
    size_t cell = 0;     // index into the plan's cells
    size_t block = 0;    // block within the cell
    long npoints = 0;
};

class QuadraturePlan {
public:
    // Strata are the given cells (disjoint, typically the dyadic cubes of a
    // region).  Point layout depends only on (cells, spec) - never on the
    // worker count - so chunked reductions merged in index order are
    // bit-reproducible.
    QuadraturePlan(std::vector<Cube> cells, const GridSpec& spec);

    bool sampled() const { return sampled_; }
    size_t cell_count() const { return cells_.size(); }
    const Cube& cell(size_t i) const { return cells_[i]; }
    const std::vector<QuadChunk>& chunks() const { return chunks_; }
    long total_points() const { return total_points_; }

    // Materializes the points of one chunk; returns the common point weight.
    double chunk_points(const QuadChunk& c, std::vector<Vec>& out) const;

private:
    std::vector<Cube> cells_;
    GridSpec spec_;
    bool sampled_ = false;
    long total_points_ = 0;
    std::vector<long> points_per_cell_;
    std::vector<long> grid_per_axis_;   // full-grid: points per axis per cell
    std::vector<QuadChunk> chunks_;
};

// Accumulator for a scalar integral with stratified standard error.
struct IntegralAccumulator {
    double sum = 0.0;
    double variance = 0.0;  // of the total, stratified estimate

    double stderr_est() const { return variance > 0.0 ? std::sqrt(variance) : 0.0; }
};

// Integrate fn over the cells; fn(x) must be pure.  Deterministic for any
// worker count.
IntegralAccumulator integrate(const QuadraturePlan& plan,
                              const std::function<double(const Vec&)>& fn,
                              int workers);

}  // namespace declab
