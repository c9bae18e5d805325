#include "declab/quadrature.hpp"

#include <cmath>

#include "declab/parallel.hpp"
#include "declab/rng.hpp"

namespace declab {

namespace {
constexpr long kBlockPoints = 32768;
}

void GridSpec::validate() const {
    require(spacing > 0.0, "GridSpec: spacing must be positive");
    if (mode == Mode::FullGrid || mode == Mode::Auto)
        require(spacing <= 0.125 + 1e-12, "GridSpec: full-grid spacing must be <= 1/8");
    if (mode == Mode::Sample || mode == Mode::Auto)
        require(sample_budget >= 1000, "GridSpec: sample budget must be >= 1e3");
    require(min_points_per_stratum >= 1, "GridSpec: min points per stratum");
}

std::vector<Cube> region_strata(const Cube& u, const GridSpec& spec) {
    if (spec.strata_side > 0.0 && spec.strata_side < u.side && is_dyadic(spec.strata_side)) {
        double ratio = u.side / spec.strata_side;
        bool aligned = std::abs(ratio - std::round(ratio)) < 1e-9 && is_dyadic(u.side);
        for (double c : u.corner) {
            double q = c / spec.strata_side;
            if (std::abs(q - std::round(q)) > 1e-9) aligned = false;
        }
        if (aligned) {
            DyadicCube region(u.corner, u.side);
            auto cells = dyadic_cubes(region, spec.strata_side);
            return std::vector<Cube>(cells.begin(), cells.end());
        }
    }
    return {u};
}

QuadraturePlan::QuadraturePlan(std::vector<Cube> cells, const GridSpec& spec)
    : cells_(std::move(cells)), spec_(spec) {
    spec_.validate();
    require(!cells_.empty(), "QuadraturePlan: no cells");
    const int dim = static_cast<int>(cells_[0].corner.size());
    for (const Cube& c : cells_) require(c.side > 0.0, "QuadraturePlan: degenerate cell");

    // Candidate full-grid sizes.
    double full_total = 0.0;
    grid_per_axis_.resize(cells_.size());
    for (size_t i = 0; i < cells_.size(); ++i) {
        double per_axis = cells_[i].side / spec_.spacing;
        long m = std::lround(per_axis);
        require(std::abs(per_axis - static_cast<double>(m)) < 1e-9 && m >= 1,
                "QuadraturePlan: spacing must divide every cell side");
        grid_per_axis_[i] = m;
        full_total += std::pow(static_cast<double>(m), dim);
    }

    switch (spec_.mode) {
        case GridSpec::Mode::FullGrid: sampled_ = false; break;
        case GridSpec::Mode::Sample: sampled_ = true; break;
        case GridSpec::Mode::Auto:
            sampled_ = full_total > static_cast<double>(spec_.max_full_points);
            break;
    }

    points_per_cell_.resize(cells_.size());
    if (!sampled_) {
        for (size_t i = 0; i < cells_.size(); ++i) {
            double pts = std::pow(static_cast<double>(grid_per_axis_[i]), dim);
            require(pts <= 9e18, "QuadraturePlan: grid too large");
            points_per_cell_[i] = static_cast<long>(pts);
        }
    } else {
        double vol_total = 0.0;
        for (const Cube& c : cells_) vol_total += std::pow(c.side, dim);
        for (size_t i = 0; i < cells_.size(); ++i) {
            double share = std::pow(cells_[i].side, dim) / vol_total;
            long n = std::lround(share * static_cast<double>(spec_.sample_budget));
            points_per_cell_[i] = std::max(n, spec_.min_points_per_stratum);
        }
    }

    for (size_t i = 0; i < cells_.size(); ++i) {
        long npts = points_per_cell_[i];
        total_points_ += npts;
        long nblocks = (npts + kBlockPoints - 1) / kBlockPoints;
        for (long b = 0; b < nblocks; ++b) {
            QuadChunk c;
            c.cell = i;
            c.block = static_cast<size_t>(b);
            c.npoints = std::min(kBlockPoints, npts - b * kBlockPoints);
            chunks_.push_back(c);
        }
    }
}

double QuadraturePlan::chunk_points(const QuadChunk& c, std::vector<Vec>& out) const {
    const Cube& cell = cells_[c.cell];
    const int dim = static_cast<int>(cell.corner.size());
    out.clear();
    out.reserve(c.npoints);
    if (!sampled_) {
        const double h = spec_.spacing;
        const long m = grid_per_axis_[c.cell];
        long start = static_cast<long>(c.block) * kBlockPoints;
        for (long t = start; t < start + c.npoints; ++t) {
            Vec x(dim);
            long rem = t;
            for (int i = dim - 1; i >= 0; --i) {
                long k = rem % m;
                rem /= m;
                x[i] = cell.corner[i] + (static_cast<double>(k) + 0.5) * h;
            }
            out.push_back(std::move(x));
        }
        return std::pow(h, dim);
    }
    Rng rng(mix_seed(spec_.seed, static_cast<uint64_t>(c.cell), static_cast<uint64_t>(c.block)));
    for (long t = 0; t < c.npoints; ++t) {
        Vec x(dim);
        for (int i = 0; i < dim; ++i)
            x[i] = cell.corner[i] + cell.side * rng.uniform();
        out.push_back(std::move(x));
    }
    return std::pow(cell.side, dim) / static_cast<double>(points_per_cell_[c.cell]);
}

IntegralAccumulator integrate(const QuadraturePlan& plan,
                              const std::function<double(const Vec&)>& fn, int workers) {
    const auto& chunks = plan.chunks();
    std::vector<double> partial(chunks.size(), 0.0);
    std::vector<double> partial_sq(chunks.size(), 0.0);
    parallel_for_chunks(chunks.size(), workers, [&](size_t ci) {
        std::vector<Vec> pts;
        double w = plan.chunk_points(chunks[ci], pts);
        double s = 0.0, s2 = 0.0;
        for (const Vec& x : pts) {
            double v = fn(x);
            s += v;
            s2 += v * v;
        }
        partial[ci] = s * w;
        partial_sq[ci] = s2;
    });

    IntegralAccumulator acc;
    acc.sum = tree_sum(partial);
    if (plan.sampled()) {
        // stratified variance: per cell, v_i^2 * Var(f)/n_i
        std::vector<double> cell_sum(plan.cell_count(), 0.0);
        std::vector<double> cell_sq(plan.cell_count(), 0.0);
        std::vector<long> cell_n(plan.cell_count(), 0);
        for (size_t ci = 0; ci < chunks.size(); ++ci) {
            cell_sum[chunks[ci].cell] += partial[ci];
            cell_sq[chunks[ci].cell] += partial_sq[ci];
            cell_n[chunks[ci].cell] += chunks[ci].npoints;
        }
        const int dim = static_cast<int>(plan.cell(0).corner.size());
        double var = 0.0;
        for (size_t i = 0; i < plan.cell_count(); ++i) {
            double vol = std::pow(plan.cell(i).side, dim);
            double n = static_cast<double>(cell_n[i]);
            double mean = cell_sum[i] / vol;  // average of f over the cell
            double second = cell_sq[i] / n;
            double v = second - mean * mean;
            if (v > 0.0 && n > 1.0) var += vol * vol * v / n;
        }
        acc.variance = var;
    }
    return acc;
}

}  // namespace declab
