// declab command-line front end.  Links only the shared C API.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "declab.h"

namespace {

struct CtxGuard {
    declab_context* ctx = nullptr;
    ~CtxGuard() {
        if (ctx) declab_context_destroy(ctx);
    }
};

// Splits argv into CLI11-visible arguments and bare --section.key=value
// overrides (any flag name containing a dot).
void split_overrides(int argc, char** argv, std::vector<std::string>& args,
                     std::vector<std::pair<std::string, std::string>>& overrides) {
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a.rfind("--", 0) == 0) {
            size_t eq = a.find('=');
            size_t dot = a.find('.');
            if (eq != std::string::npos && dot != std::string::npos && dot < eq) {
                overrides.emplace_back(a.substr(2, eq - 2), a.substr(eq + 1));
                continue;
            }
        }
        args.push_back(a);
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args;
    std::vector<std::pair<std::string, std::string>> overrides;
    split_overrides(argc, argv, args, overrides);

    CLI::App app{"declab: decoupling / k-broad norm laboratory"};
    app.set_version_flag("--version", declab_version());

    std::string config_path;
    std::string out_dir;
    int workers = -1;
    long seed = -1;
    app.add_option("--config", config_path, "JSON config file (defaults built in)");
    app.add_option("--out", out_dir, "output directory for artifacts");
    app.add_option("--workers", workers, "worker threads (0 = auto)");
    app.add_option("--seed", seed, "master seed");

    std::string set_help = "dot-path override, e.g. --set norms.p=4 (bare --norms.p=4 works too)";
    std::vector<std::string> sets;
    app.add_option("--set", sets, set_help);

    const char* subcommands[] = {"gen", "norm", "decompose", "verify", "sweep", "suite"};
    const char* sub_help[] = {
        "write an ensemble as a field-v1 JSON file",
        "compute one norm of a field",
        "run the decomposition steps and write inequality certificates",
        "run multiscale re-decomposition and regime checks",
        "run the exponent sweep and fit",
        "run the cross-module invariant suite",
    };
    for (size_t i = 0; i < 6; ++i)
        app.add_subcommand(subcommands[i], sub_help[i])->fallthrough();
    app.require_subcommand(0, 1);

    std::vector<const char*> cargs;
    cargs.push_back(argv[0]);
    for (const std::string& a : args) cargs.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    std::string sub;
    for (const char* name : subcommands)
        if (app.got_subcommand(name)) sub = name;
    if (sub.empty()) {
        std::fprintf(stderr, "%s\n", app.help().c_str());
        std::fprintf(stderr, "error: expected one subcommand (gen|norm|decompose|verify|sweep|suite)\n");
        return 1;
    }

    CtxGuard g;
    g.ctx = config_path.empty() ? declab_context_create(nullptr)
                                : declab_context_create_from_file(config_path.c_str());
    if (!g.ctx) {
        std::fprintf(stderr, "error: %s\n", declab_last_error());
        return 1;
    }

    auto apply = [&](const std::string& path, const std::string& value) {
        if (declab_context_override(g.ctx, path.c_str(), value.c_str()) != DECLAB_OK) {
            std::fprintf(stderr, "error: override %s=%s: %s\n", path.c_str(), value.c_str(),
                         declab_context_error(g.ctx));
            return false;
        }
        return true;
    };
    for (auto& [k, v] : overrides)
        if (!apply(k, v)) return 1;
    for (const std::string& s : sets) {
        size_t eq = s.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "error: --set expects key=value, got %s\n", s.c_str());
            return 1;
        }
        if (!apply(s.substr(0, eq), s.substr(eq + 1))) return 1;
    }
    if (!out_dir.empty() && !apply("output.dir", out_dir)) return 1;
    if (workers >= 0 && !apply("workers", std::to_string(workers))) return 1;
    if (seed >= 0 && !apply("seed", std::to_string(seed))) return 1;

    int exit_status = 1;
    char* summary = nullptr;
    int rc = declab_run(g.ctx, sub.c_str(), &exit_status, &summary);
    if (summary) {
        std::printf("%s\n", summary);
        declab_free(summary);
    }
    if (rc != DECLAB_OK && rc != DECLAB_E_CHECKS) {
        std::fprintf(stderr, "error: %s\n", declab_context_error(g.ctx));
        return 1;
    }
    return exit_status;
}
