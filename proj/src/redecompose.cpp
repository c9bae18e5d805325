#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "declab/fft.hpp"
#include "declab/field.hpp"
#include "declab/wave_packets.hpp"

namespace declab {

void fft_nd(std::vector<Complex>& data, const std::vector<int>& shape, bool inverse) {
    static std::mutex plan_mutex;
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        plan = fftw_plan_dft(static_cast<int>(shape.size()), shape.data(),
                             reinterpret_cast<fftw_complex*>(data.data()),
                             reinterpret_cast<fftw_complex*>(data.data()),
                             inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        fftw_destroy_plan(plan);
    }
}

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

// Row-major iteration over an axis-aligned grid of points.
template <typename F>
void for_grid(const Vec& origin, double h, long per_axis, int dim, F&& fn) {
    std::vector<long> idx(dim, 0);
    Vec x(dim);
    size_t flat = 0;
    for (;;) {
        for (int i = 0; i < dim; ++i) x[i] = origin[i] + h * static_cast<double>(idx[i]);
        fn(static_cast<const Vec&>(x), flat++);
        int k = dim - 1;
        while (k >= 0 && idx[k] == per_axis - 1) { idx[k] = 0; --k; }
        if (k < 0) break;
        ++idx[k];
    }
}

// ||F - model||_{L2(Q)} / ||F||_{L2(Q)} on an h-grid.
double residual_on(const DyadicCube& q, double h, const FieldEvaluator& ev,
                   const FieldEvaluator* model, int dim) {
    double err = 0.0, fq = 0.0;
    long mq = std::max<long>(1, std::lround(q.side / h));
    for_grid(q.corner, h, mq, dim, [&](const Vec& x, size_t) {
        Complex fx = ev.eval(x);
        Complex mx = model ? model->eval(x) : Complex{};
        err += std::norm(fx - mx);
        fq += std::norm(fx);
    });
    return fq > 0.0 ? std::sqrt(err / fq) : 0.0;
}

}  // namespace

RedecomposeResult redecompose(const Field& f, const DyadicCube& q, long D, long D0,
                              const RedecomposeOptions& opts) {
    require(is_power_of_two(D) && D >= 2, "redecompose: D must be a power of two >= 2");
    require(D <= f.amb.D, "redecompose: D must not exceed the field scale");
    const int dim = f.amb.dim();
    const int n = f.amb.n;
    const double dD = static_cast<double>(D);
    const double h = opts.spacing;
    double c_win = opts.freq_window > 0.0 ? opts.freq_window : f.support_constant;

    RedecomposeResult res;
    if (f.packets.empty()) return res;
    FieldEvaluator ev(f);

    // Same scale: the cap restriction is label-based, so the decomposition is
    // the localized packet list itself.
    if (D == f.amb.D) {
        auto selected = localize(f.packets, q, D0);
        res.grid_points = static_cast<long>(std::pow(q.side / h, dim));
        if (!selected.empty()) {
            Field model = subfield(f, std::move(selected));
            FieldEvaluator mev(model);
            res.residual = residual_on(q, h, ev, &mev, dim);
            res.packets = model.packets;
        } else {
            res.residual = residual_on(q, h, ev, nullptr, dim);
        }
        return res;
    }

    // Coarser scale: periodized sampling, per-cap discrete Fourier cutoff,
    // bump multiplication.  At D <= sqrt(K) the fine spectra sit well inside
    // the scale-D cells, so the sharp per-cap slices are clean.
    double need = std::max({opts.dilation * q.side, 8.0 * M_PI * dD,
                            8.0 * M_PI * dD * dD / c_win});
    double L = 1.0;
    while (L < need) L *= 2.0;
    const long N = std::lround(L / h);
    require(is_power_of_two(N), "redecompose: spacing must give a power-of-two grid");
    double total_pts = std::pow(static_cast<double>(N), dim);
    if (total_pts > static_cast<double>(opts.max_grid_points)) {
        throw Error("redecompose: periodized grid needs " +
                    std::to_string(static_cast<long long>(total_pts)) +
                    " points, over the budget of " + std::to_string(opts.max_grid_points) +
                    " (box side " + std::to_string(L) + ")");
    }
    res.grid_points = static_cast<long>(total_pts);

    Vec qc = q.center();
    Vec x0(dim);
    for (int i = 0; i < dim; ++i) x0[i] = qc[i] - L / 2.0;

    std::vector<Complex> samples(static_cast<size_t>(total_pts));
    for_grid(x0, h, N, dim, [&](const Vec& x, size_t flat) { samples[flat] = ev.eval(x); });
    std::vector<Complex> spectrum = samples;
    std::vector<int> shape(dim, static_cast<int>(N));
    fft_nd(spectrum, shape, false);

    Ambient coarse_amb = f.amb;
    coarse_amb.D = D;
    coarse_amb.D0 = std::min<long>(D0, D);
    coarse_amb.validate();
    auto coarse_caps = build_cap_partition(coarse_amb);
    std::map<std::vector<long>, int> cap_slot;
    for (size_t i = 0; i < coarse_caps.size(); ++i)
        cap_slot[coarse_caps[i].index] = static_cast<int>(i);

    // bins per cap: transverse cell plus the near-paraboloid window
    std::map<int, std::vector<size_t>> bins_per_cap;
    {
        std::vector<long> idx(dim, 0);
        for (size_t b = 0; b < spectrum.size(); ++b) {
            if (std::norm(spectrum[b]) > 0.0) {
                Vec xi(dim);
                for (int i = 0; i < dim; ++i) {
                    long k = idx[i] < N / 2 ? idx[i] : idx[i] - N;
                    xi[i] = kTwoPi * static_cast<double>(k) / L;
                }
                double para = 0.0;
                for (int i = 0; i < n; ++i) para += xi[i] * xi[i];
                if (std::abs(xi[n] - para) <= c_win / (dD * dD)) {
                    std::vector<long> ci(n);
                    for (int i = 0; i < n; ++i)
                        ci[i] = static_cast<long>(std::floor(xi[i] * dD));
                    auto it = cap_slot.find(ci);
                    if (it != cap_slot.end()) bins_per_cap[it->second].push_back(b);
                }
            }
            int k = dim - 1;
            while (k >= 0 && idx[k] == N - 1) { idx[k] = 0; --k; }
            if (k < 0) break;
            ++idx[k];
        }
    }

    BumpGenerator gen(f.bump_spec.order, f.bump_spec.support_fraction);
    double unit_mass = packet_l2_norm(gen, n, D);
    double inv_total = 1.0 / total_pts;

    std::vector<WavePacket> out_packets;
    std::vector<Complex> capfield(samples.size());
    for (auto& [slot, bins] : bins_per_cap) {
        const Cap& cap = coarse_caps[slot];
        std::fill(capfield.begin(), capfield.end(), Complex{});
        for (size_t b : bins) capfield[b] = spectrum[b];
        fft_nd(capfield, shape, true);
        for (Complex& v : capfield) v *= inv_total;

        auto tiles = tile_lattice(cap, q, D0);
        if (tiles.empty()) continue;
        auto frame = cap_frame(cap);
        Vec lifted = cap.lifted_center();

        // a_{theta,T}: phi_T^2-weighted average of the demodulated slice
        // (F_theta is essentially constant on T, so this is the local value)
        const size_t nt = tiles.size();
        std::vector<Complex> num(nt, Complex{});
        std::vector<double> den(nt, 0.0);
        for_grid(x0, h, N, dim, [&](const Vec& x, size_t flat) {
            double ph = dot(lifted, x);
            Complex g = capfield[flat] * Complex(std::cos(ph), -std::sin(ph));
            for (size_t t = 0; t < nt; ++t) {
                double phi = bump_value(gen, tiles[t], frame, x);
                if (phi == 0.0) continue;
                num[t] += phi * phi * g;
                den[t] += phi * phi;
            }
        });
        for (size_t t = 0; t < nt; ++t) {
            if (den[t] <= 0.0) continue;
            Complex a = num[t] / den[t];
            if (std::abs(a) <= 1e-12) continue;
            WavePacket p;
            p.tile = tiles[t];
            p.coefficient = a;
            p.l2_mass = std::abs(a) * unit_mass;
            out_packets.push_back(std::move(p));
        }
    }

    // drop noise-level packets relative to the largest
    double max_abs = 0.0;
    for (const WavePacket& p : out_packets) max_abs = std::max(max_abs, std::abs(p.coefficient));
    std::vector<WavePacket> kept;
    for (WavePacket& p : out_packets)
        if (std::abs(p.coefficient) > 1e-9 * max_abs) kept.push_back(std::move(p));

    if (!kept.empty()) {
        Field model = synthesize(coarse_amb, std::move(kept), f.bump_spec);
        FieldEvaluator mev(model);
        res.residual = residual_on(q, h, ev, &mev, dim);
        res.packets = model.packets;
    } else {
        res.residual = residual_on(q, h, ev, nullptr, dim);
    }
    return res;
}

}  // namespace declab
