#include "declab/config.hpp"

#include <fstream>

#include "declab/parallel.hpp"
#include <sstream>

namespace declab {

namespace {

const char* kDefaultConfig = R"json({
  "ambient": {"n": 1, "D": 8, "eps": 0.1, "L": 4.0, "D0": 0},
  "bump": {"order": 12, "support_fraction": 0.5, "truncation_tol": 1e-10},
  "norms": {
    "p": 4.0, "k": 2, "A": 2,
    "search_mode": "exact", "exact_budget": 1000000,
    "candidate_strategy": "mixed", "candidate_budget": 64, "random_candidates": 8
  },
  "quadrature": {
    "mode": "auto", "spacing": 0.125,
    "sample_budget": 10000000, "max_full_points": 100000000,
    "min_points_per_stratum": 16, "strata_side": 0.0
  },
  "ensemble": {"kind": "random-phase", "density": 1},
  "constants": {
    "C_semi": 3.0, "C_broadstep": 10.0, "C_base": 10.0, "C_re0": 16.0, "C_75": 32.0,
    "C_guth": 32.0, "C_42": 32.0, "C_equi": 16.0, "C_gamma": 16.0, "eps_slack": 0.1
  },
  "ladder": {"R": 256},
  "sweep": {
    "n": 2, "k": 2, "p": 4.0, "D_list": [4, 8, 16], "seeds": [1, 2, 3],
    "v_strategy": "coordinate", "A": 2, "density": 1
  },
  "decompose": {"mode": "recursion", "m": 2, "block_factor": 2},
  "verify": {
    "multiscale": {"K": 16, "D": 4, "k": 2, "p": 4.0, "A": 2},
    "regime": {"n": 2, "k": 2, "p_list": [3.3333333333333335, 3.5, 4.0],
               "D_list": [8, 16, 32], "octaves": 20},
    "restriction_checks": false
  },
  "suite": {"seeds": [1, 2, 3, 4, 5], "max_n": 2, "max_D": 16, "quick": false},
  "norm": {"kind": "decoupling", "field": "", "region": "block"},
  "gen": {"field_out": ""},
  "output": {"dir": "out", "prefix": "run"},
  "workers": 0,
  "seed": 1234
})json";

}  // namespace

RunConfig RunConfig::defaults() {
    RunConfig c;
    c.doc_ = nlohmann::json::parse(kDefaultConfig);
    return c;
}

RunConfig RunConfig::from_json_text(const std::string& text) {
    RunConfig c = defaults();
    nlohmann::json user = nlohmann::json::parse(text);
    c.doc_.merge_patch(user);
    return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("config file not found: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return from_json_text(ss.str());
    } catch (const nlohmann::json::exception& e) {
        throw Error("config file " + path + " does not parse: " + e.what());
    }
}

void RunConfig::override_path(const std::string& dotpath, const std::string& value) {
    nlohmann::json v;
    try {
        v = nlohmann::json::parse(value);
    } catch (const nlohmann::json::exception&) {
        v = value;  // raw string
    }
    nlohmann::json* node = &doc_;
    size_t start = 0;
    for (;;) {
        size_t dot = dotpath.find('.', start);
        std::string key = dotpath.substr(start, dot == std::string::npos ? dot : dot - start);
        require(!key.empty(), "override: empty key in " + dotpath);
        if (dot == std::string::npos) {
            (*node)[key] = v;
            return;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

Ambient RunConfig::ambient() const {
    const auto& a = doc_.at("ambient");
    Ambient amb;
    amb.n = a.value("n", 1);
    amb.D = a.value("D", 8L);
    amb.eps = a.value("eps", 0.1);
    amb.L = a.value("L", 4.0);
    amb.D0 = a.value("D0", 0L);
    amb.validate();
    return amb;
}

BumpSpec RunConfig::bump() const {
    const auto& b = doc_.at("bump");
    BumpSpec s;
    s.order = b.value("order", 12);
    s.support_fraction = b.value("support_fraction", 0.5);
    s.truncation_tol = b.value("truncation_tol", 1e-10);
    return s;
}

GridSpec RunConfig::grid() const {
    const auto& q = doc_.at("quadrature");
    GridSpec g;
    std::string mode = q.value("mode", "auto");
    if (mode == "auto") g.mode = GridSpec::Mode::Auto;
    else if (mode == "full") g.mode = GridSpec::Mode::FullGrid;
    else if (mode == "sample") g.mode = GridSpec::Mode::Sample;
    else throw Error("quadrature.mode must be auto|full|sample");
    g.spacing = q.value("spacing", 0.125);
    g.sample_budget = q.value("sample_budget", 10'000'000L);
    g.max_full_points = q.value("max_full_points", 100'000'000L);
    g.min_points_per_stratum = q.value("min_points_per_stratum", 16L);
    g.strata_side = q.value("strata_side", 0.0);
    g.seed = doc_.value("seed", 1234UL);
    g.validate();
    return g;
}

NormParams RunConfig::norm_params() const {
    const auto& n = doc_.at("norms");
    NormParams np;
    np.p = n.value("p", 4.0);
    np.k = n.value("k", 2);
    np.A = n.value("A", 2);
    std::string sm = n.value("search_mode", "exact");
    if (sm == "exact") np.search_mode = SearchMode::Exact;
    else if (sm == "greedy") np.search_mode = SearchMode::Greedy;
    else throw Error("norms.search_mode must be exact|greedy");
    np.exact_budget = n.value("exact_budget", 1'000'000L);
    std::string cs = n.value("candidate_strategy", "mixed");
    if (cs == "mixed") np.candidates.strategy = CandidateStrategy::Mixed;
    else if (cs == "normals") np.candidates.strategy = CandidateStrategy::NormalsOnly;
    else throw Error("norms.candidate_strategy must be mixed|normals");
    np.candidates.budget = n.value("candidate_budget", 64);
    np.candidates.random_samples = n.value("random_candidates", 8);
    np.candidates.seed = doc_.value("seed", 1234UL);
    np.grid = grid();
    np.validate();
    return np;
}

Constants RunConfig::constants() const {
    const auto& c = doc_.at("constants");
    Constants k;
    k.C_semi = c.value("C_semi", 3.0);
    k.C_broadstep = c.value("C_broadstep", 10.0);
    k.C_base = c.value("C_base", 10.0);
    k.C_re0 = c.value("C_re0", 16.0);
    k.C_75 = c.value("C_75", 32.0);
    k.C_guth = c.value("C_guth", 32.0);
    k.C_42 = c.value("C_42", 32.0);
    k.C_equi = c.value("C_equi", 16.0);
    k.C_gamma = c.value("C_gamma", 16.0);
    k.eps_slack = c.value("eps_slack", 0.1);
    return k;
}

Ensemble RunConfig::ensemble() const {
    const auto& e = doc_.at("ensemble");
    Ensemble ens;
    ens.kind = ensemble_kind_from_string(e.value("kind", "random-phase"));
    ens.amb = ambient();
    ens.density = e.value("density", 1);
    ens.seed = e.value("seed", doc_.value("seed", 1234UL));
    ens.bump = bump();
    if (ens.kind == EnsembleKind::Flat) {
        int vdim = e.value("v_dim", 2);
        std::vector<Vec> rows;
        for (int i = 0; i < vdim - 1; ++i) {
            Vec v(ens.amb.dim(), 0.0);
            v[i] = 1.0;
            rows.push_back(std::move(v));
        }
        Vec vert(ens.amb.dim(), 0.0);
        vert[ens.amb.dim() - 1] = 1.0;
        rows.push_back(std::move(vert));
        ens.V = Subspace(ens.amb.dim(), rows);
    }
    return ens;
}

SweepSpec RunConfig::sweep_spec() const {
    const auto& s = doc_.at("sweep");
    SweepSpec spec;
    spec.kind = ensemble_kind_from_string(s.value("kind", "random-phase"));
    spec.n = s.value("n", 2);
    spec.k = s.value("k", 2);
    spec.p = s.value("p", 4.0);
    spec.D_list = s.value("D_list", std::vector<long>{4, 8, 16});
    spec.v_strategy = s.value("v_strategy", "coordinate");
    spec.A = s.value("A", 2);
    for (auto v : s.value("seeds", std::vector<long>{1, 2, 3}))
        spec.seeds.push_back(static_cast<uint64_t>(v));
    spec.eps = doc_.at("ambient").value("eps", 0.1);
    spec.L = doc_.at("ambient").value("L", 4.0);
    spec.density = s.value("density", 1);
    spec.base = norm_params();
    return spec;
}

SuiteOptions RunConfig::suite_options() const {
    const auto& s = doc_.at("suite");
    SuiteOptions o;
    o.seeds.clear();
    for (auto v : s.value("seeds", std::vector<long>{1, 2, 3, 4, 5}))
        o.seeds.push_back(static_cast<uint64_t>(v));
    o.max_n = s.value("max_n", 2);
    o.max_D = s.value("max_D", 16L);
    o.grid = grid();
    o.constants = constants();
    o.quick = s.value("quick", false);
    o.workers = workers();
    return o;
}

int RunConfig::workers() const { return resolve_workers(doc_.value("workers", 0)); }

uint64_t RunConfig::seed() const { return doc_.value("seed", 1234UL); }

std::string RunConfig::out_dir() const { return doc_.at("output").value("dir", "out"); }

std::string RunConfig::prefix() const { return doc_.at("output").value("prefix", "run"); }

void RunConfig::validate() const {
    ambient();
    bump();
    grid();
    norm_params();
    constants();
    ensemble();
    BumpGenerator probe(bump().order, bump().support_fraction);
    (void)probe;
}

}  // namespace declab
