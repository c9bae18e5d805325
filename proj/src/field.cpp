#include "declab/field.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"

namespace declab {

namespace {

// Lexicographic packet order by (cap index, tile index).
bool packet_less(const WavePacket& a, const WavePacket& b) {
    if (a.tile.cap.index != b.tile.cap.index) return a.tile.cap.index < b.tile.cap.index;
    return a.tile.index < b.tile.index;
}

}  // namespace

const BumpGenerator& Field::generator() const {
    if (!gen_) gen_ = std::make_shared<BumpGenerator>(bump_spec.order, bump_spec.support_fraction);
    return *gen_;
}

double support_constant(const BumpGenerator& g, int n) {
    double w = g.freq_halfwidth();
    return w * (1.0 + n * w);
}

Field synthesize(const Ambient& amb_in, std::vector<WavePacket> packets,
                 const BumpSpec& bump) {
    Field f;
    f.amb = amb_in;
    f.amb.validate();
    f.bump_spec = bump;
    f.caps = build_cap_partition(f.amb);

    std::map<std::vector<long>, size_t> by_index;
    for (size_t i = 0; i < f.caps.size(); ++i) by_index[f.caps[i].index] = i;

    BumpGenerator gen(bump.order, bump.support_fraction);
    double unit_mass = packet_l2_norm(gen, f.amb.n, f.amb.D);
    for (WavePacket& p : packets) {
        auto it = by_index.find(p.tile.cap.index);
        require(it != by_index.end(), "synthesize: packet references unknown cap");
        p.tile = Tile::make(f.caps[it->second], p.tile.index);
        p.l2_mass = std::abs(p.coefficient) * unit_mass;
    }
    std::sort(packets.begin(), packets.end(), packet_less);
    f.packets = std::move(packets);
    f.support_constant = support_constant(gen, f.amb.n);
    return f;
}

Field subfield(const Field& f, std::vector<WavePacket> packets) {
    Field out = f;
    std::sort(packets.begin(), packets.end(), packet_less);
    out.packets = std::move(packets);
    return out;
}

Field restrict_to_cap(const Field& f, const Cap& theta) {
    bool known = false;
    for (const Cap& c : f.caps)
        if (c.index == theta.index) { known = true; break; }
    require(known, "restrict_to_cap: unknown cap");
    std::vector<WavePacket> sub;
    for (const WavePacket& p : f.packets)
        if (p.tile.cap.index == theta.index) sub.push_back(p);
    return subfield(f, std::move(sub));
}

Field restrict_to_subspace_caps(const Field& f, const Subspace& v) {
    const double thr = 1.0 / static_cast<double>(f.amb.D);
    std::vector<WavePacket> sub;
    for (const WavePacket& p : f.packets)
        if (dist_to_subspace(p.tile.cap.normal, v) <= thr) sub.push_back(p);
    return subfield(f, std::move(sub));
}

// ---- evaluator -------------------------------------------------------------

FieldEvaluator::FieldEvaluator(const Field& f)
    : gen_(f.bump_spec.order, f.bump_spec.support_fraction) {
    dim_ = f.amb.dim();
    radius_ = static_cast<double>(gen_.truncation_radius(f.bump_spec.truncation_tol));

    std::map<std::vector<long>, size_t> slot;
    std::map<std::vector<long>, int> cap_at;
    for (size_t i = 0; i < f.caps.size(); ++i) cap_at[f.caps[i].index] = static_cast<int>(i);

    for (const WavePacket& p : f.packets) {
        auto it = slot.find(p.tile.cap.index);
        size_t g;
        if (it == slot.end()) {
            g = groups_.size();
            slot[p.tile.cap.index] = g;
            Group grp;
            grp.cap = p.tile.cap;
            auto frame = cap_frame(grp.cap);
            Vec lifted = grp.cap.lifted_center();
            for (int i = 0; i < dim_; ++i) {
                grp.inv_spacing[i] = 1.0 / Tile::spacing(grp.cap, i);
                grp.lifted[i] = lifted[i];
                for (int k = 0; k < dim_; ++k) grp.frame[i][k] = frame[i][k];
            }
            groups_.push_back(std::move(grp));
            cap_pos_.push_back(cap_at.at(p.tile.cap.index));
        } else {
            g = it->second;
        }
        PacketData pd;
        for (int i = 0; i < dim_; ++i) pd.j[i] = static_cast<double>(p.tile.index[i]);
        pd.re = p.coefficient.real();
        pd.im = p.coefficient.imag();
        groups_[g].packets.push_back(pd);
    }
}

const Cap& FieldEvaluator::cap(int i) const { return groups_[i].cap; }

void FieldEvaluator::eval_caps(const Vec& x, Complex* out) const {
    double xv[kMaxDim] = {0, 0, 0, 0};
    for (int i = 0; i < dim_; ++i) xv[i] = x[i];
    for (size_t gi = 0; gi < groups_.size(); ++gi) {
        const Group& g = groups_[gi];
        double u[kMaxDim];
        double phase = 0.0;
        for (int i = 0; i < dim_; ++i) {
            double y = 0.0;
            for (int k = 0; k < dim_; ++k) y += g.frame[i][k] * xv[k];
            u[i] = y * g.inv_spacing[i];
            phase += g.lifted[i] * xv[i];
        }
        double acc_re = 0.0, acc_im = 0.0;
        for (const PacketData& p : g.packets) {
            double prod = 1.0;
            int i = 0;
            for (; i < dim_; ++i) {
                double t = u[i] - p.j[i];
                if (t > radius_ || t < -radius_) break;
                prod *= gen_(t);
            }
            if (i < dim_) continue;
            acc_re += p.re * prod;
            acc_im += p.im * prod;
        }
        double c = std::cos(phase), s = std::sin(phase);
        out[gi] = Complex(acc_re * c - acc_im * s, acc_re * s + acc_im * c);
    }
}

Complex FieldEvaluator::eval(const Vec& x) const {
    thread_local std::vector<Complex> buf;
    buf.assign(groups_.size(), Complex{});
    eval_caps(x, buf.data());
    Complex sum{};
    for (const Complex& v : buf) sum += v;
    return sum;
}

std::vector<Complex> evaluate(const Field& f, std::span<const Vec> pts) {
    FieldEvaluator ev(f);
    std::vector<Complex> out;
    out.reserve(pts.size());
    for (const Vec& x : pts) out.push_back(ev.eval(x));
    return out;
}

Complex evaluate_at(const Field& f, const Vec& x) {
    FieldEvaluator ev(f);
    return ev.eval(x);
}

// ---- serialization ---------------------------------------------------------

std::string field_to_json(const Field& f) {
    nlohmann::json j;
    j["version"] = "field-v1";
    j["ambient"] = {{"n", f.amb.n}, {"D", f.amb.D}, {"eps", f.amb.eps},
                    {"L", f.amb.L}, {"D0", f.amb.D0}};
    j["bump"] = {{"order", f.bump_spec.order},
                 {"support_fraction", f.bump_spec.support_fraction},
                 {"truncation_tol", f.bump_spec.truncation_tol}};
    j["support_constant"] = f.support_constant;
    auto& pk = j["packets"] = nlohmann::json::array();
    for (const WavePacket& p : f.packets) {
        pk.push_back({{"cap_index", p.tile.cap.index},
                      {"tile_index", p.tile.index},
                      {"re", p.coefficient.real()},
                      {"im", p.coefficient.imag()}});
    }
    return j.dump();
}

Field field_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    require(j.value("version", "") == std::string("field-v1"),
            "field_from_json: unsupported version (expected field-v1)");
    Ambient amb;
    amb.n = j.at("ambient").at("n").get<int>();
    amb.D = j.at("ambient").at("D").get<long>();
    amb.eps = j.at("ambient").at("eps").get<double>();
    amb.L = j.at("ambient").at("L").get<double>();
    amb.D0 = j.at("ambient").value("D0", 0L);
    BumpSpec bump;
    if (j.contains("bump")) {
        bump.order = j["bump"].value("order", 12);
        bump.support_fraction = j["bump"].value("support_fraction", 0.5);
        bump.truncation_tol = j["bump"].value("truncation_tol", 1e-10);
    }
    std::vector<WavePacket> packets;
    for (const auto& e : j.at("packets")) {
        WavePacket p;
        p.tile.cap.index = e.at("cap_index").get<std::vector<long>>();
        p.tile.index = e.at("tile_index").get<std::vector<long>>();
        p.coefficient = Complex(e.at("re").get<double>(), e.at("im").get<double>());
        packets.push_back(std::move(p));
    }
    return synthesize(amb, std::move(packets), bump);
}

// ---- extension operator ----------------------------------------------------

Complex CoefficientGrid::at(std::span<const long> idx) const {
    long flat = 0;
    for (int i = 0; i < n; ++i) flat = flat * shape[i] + idx[i];
    return values[flat];
}

Vec CoefficientGrid::xi(std::span<const long> idx) const {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = origin[i] + spacing * static_cast<double>(idx[i]);
    return v;
}

CoefficientGrid CoefficientGrid::uniform(int n, long per_axis) {
    require(per_axis >= 2, "CoefficientGrid: need at least 2 samples per axis");
    CoefficientGrid g;
    g.n = n;
    g.spacing = 2.0 / static_cast<double>(per_axis - 1);
    g.origin.assign(n, -1.0);
    g.shape.assign(n, per_axis);
    long total = 1;
    for (int i = 0; i < n; ++i) total *= per_axis;
    g.values.assign(total, Complex{});
    return g;
}

namespace {

template <typename Filter>
Complex extension_sum(const CoefficientGrid& f, const Vec& xt, bool trapezoid_edges,
                      Filter&& keep) {
    require(!f.values.empty(), "extension_operator: empty grid");
    const int n = f.n;
    std::vector<long> idx(n, 0);
    Complex acc{};
    double cell = std::pow(f.spacing, n);
    for (size_t flat = 0; flat < f.values.size(); ++flat) {
        Vec xi = f.xi(idx);
        double r2 = dot(xi, xi);
        if (r2 <= 1.0 + 1e-12 && keep(xi)) {
            double w = cell;
            if (trapezoid_edges) {
                for (int i = 0; i < n; ++i)
                    if (idx[i] == 0 || idx[i] == f.shape[i] - 1) w *= 0.5;
            }
            double phase = 0.0;
            for (int i = 0; i < n; ++i) phase += xt[i] * xi[i];
            phase += xt[n] * r2;
            acc += f.values[flat] * w * Complex(std::cos(phase), std::sin(phase));
        }
        int k = n - 1;
        while (k >= 0 && idx[k] == f.shape[k] - 1) { idx[k] = 0; --k; }
        if (k < 0) break;
        ++idx[k];
    }
    return acc;
}

}  // namespace

Complex extension_operator(const CoefficientGrid& f, const Vec& xt) {
    return extension_sum(f, xt, true, [](const Vec&) { return true; });
}

std::vector<Complex> extension_operator(const CoefficientGrid& f, std::span<const Vec> pts) {
    std::vector<Complex> out;
    out.reserve(pts.size());
    for (const Vec& xt : pts) out.push_back(extension_operator(f, xt));
    return out;
}

Complex extension_operator_cap(const CoefficientGrid& f, const Cap& cap, const Vec& xt) {
    double h = 1.0 / static_cast<double>(cap.scale);
    return extension_sum(f, xt, false, [&](const Vec& xi) {
        for (size_t i = 0; i < xi.size(); ++i) {
            double lo = static_cast<double>(cap.index[i]) * h;
            if (xi[i] < lo || xi[i] >= lo + h) return false;
        }
        return true;
    });
}

Vec ParabolicRescaling::map(const Vec& xt) const {
    const int n = g.n;
    Vec out(n + 1);
    for (int i = 0; i < n; ++i)
        out[i] = (xt[i] + 2.0 * xt[n] * cap_center[i]) / static_cast<double>(K);
    out[n] = xt[n] / static_cast<double>(K * K);
    return out;
}

double ParabolicRescaling::phase(const Vec& xt) const {
    double ph = 0.0;
    for (int i = 0; i < g.n; ++i) ph += xt[i] * cap_center[i];
    ph += xt[g.n] * dot(cap_center, cap_center);
    return ph;
}

Complex ParabolicRescaling::rescaled_value(const Vec& xt) const {
    Complex rg = extension_sum(g, map(xt), false, [](const Vec&) { return true; });
    double ph = phase(xt);
    return Complex(std::cos(ph), std::sin(ph)) * jacobian_factor * rg;
}

ParabolicRescaling parabolic_rescale(const CoefficientGrid& f, const Cap& theta) {
    const int n = f.n;
    require(n == static_cast<int>(theta.center.size()), "parabolic_rescale: dimension mismatch");
    const long K = theta.scale;
    const double h = 1.0 / static_cast<double>(K);

    // support check + collect in-cell samples
    double max_abs = 0.0;
    for (const Complex& v : f.values) max_abs = std::max(max_abs, std::abs(v));
    std::vector<long> idx(n, 0);
    std::vector<long> lo(n, 0), hi(n, -1);
    bool first = true;
    for (size_t flat = 0; flat < f.values.size(); ++flat) {
        Vec xi = f.xi(idx);
        bool inside = true;
        for (int i = 0; i < n; ++i) {
            double c0 = static_cast<double>(theta.index[i]) * h;
            if (xi[i] < c0 - 1e-12 || xi[i] >= c0 + h - 1e-12) { inside = false; break; }
        }
        if (!inside) {
            require(std::abs(f.values[flat]) <= 1e-10 * std::max(max_abs, 1.0),
                    "parabolic_rescale: coefficient not supported in the cap cell");
        } else if (first) {
            lo = idx; hi = idx; first = false;
        } else {
            for (int i = 0; i < n; ++i) {
                lo[i] = std::min(lo[i], idx[i]);
                hi[i] = std::max(hi[i], idx[i]);
            }
        }
        int k = n - 1;
        while (k >= 0 && idx[k] == f.shape[k] - 1) { idx[k] = 0; --k; }
        if (k < 0) break;
        ++idx[k];
    }
    require(!first, "parabolic_rescale: no samples in the cap cell");

    ParabolicRescaling out;
    out.K = K;
    out.cap_center = theta.center;
    out.jacobian_factor = std::pow(static_cast<double>(K), -n);
    out.g.n = n;
    out.g.spacing = f.spacing * static_cast<double>(K);
    out.g.shape.resize(n);
    out.g.origin.resize(n);
    long total = 1;
    for (int i = 0; i < n; ++i) {
        out.g.shape[i] = hi[i] - lo[i] + 1;
        Vec base = f.xi(lo);
        out.g.origin[i] = (base[i] - theta.center[i]) * static_cast<double>(K);
        total *= out.g.shape[i];
    }
    out.g.values.assign(total, Complex{});
    // copy cell samples: g(eta) = f(xi_theta + eta/K)
    std::vector<long> gidx(n, 0);
    for (long flat = 0; flat < total; ++flat) {
        std::vector<long> fidx(n);
        for (int i = 0; i < n; ++i) fidx[i] = lo[i] + gidx[i];
        out.g.values[flat] = f.at(fidx);
        int k = n - 1;
        while (k >= 0 && gidx[k] == out.g.shape[k] - 1) { gidx[k] = 0; --k; }
        if (k < 0) break;
        ++gidx[k];
    }
    return out;
}

}  // namespace declab
