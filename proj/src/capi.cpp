#include "declab.h"

#include <cstring>
#include <string>

#include "declab/config.hpp"

using namespace declab;

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) return nullptr;
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

struct declab_context {
    RunConfig cfg;
    std::string error;
};

struct declab_field {
    Field field;
};

extern "C" {

const char* declab_version(void) { return "0.1.0"; }

const char* declab_last_error(void) { return g_last_error.c_str(); }

declab_context* declab_context_create(const char* config_json) {
    try {
        auto* ctx = new declab_context;
        ctx->cfg = (config_json == nullptr || config_json[0] == '\0')
                       ? RunConfig::defaults()
                       : RunConfig::from_json_text(config_json);
        ctx->cfg.validate();
        return ctx;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return nullptr;
    }
}

declab_context* declab_context_create_from_file(const char* path) {
    try {
        require(path != nullptr, "config path is null");
        auto* ctx = new declab_context;
        ctx->cfg = RunConfig::from_file(path);
        ctx->cfg.validate();
        return ctx;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return nullptr;
    }
}

void declab_context_destroy(declab_context* ctx) { delete ctx; }

const char* declab_context_error(const declab_context* ctx) {
    return ctx ? ctx->error.c_str() : "null context";
}

int declab_context_override(declab_context* ctx, const char* dotpath, const char* value) {
    if (!ctx || !dotpath || !value) {
        g_last_error = "null argument";
        return DECLAB_E_INVALID;
    }
    try {
        ctx->cfg.override_path(dotpath, value);
        ctx->cfg.validate();
        return DECLAB_OK;
    } catch (const std::exception& e) {
        ctx->error = e.what();
        return DECLAB_E_INVALID;
    }
}

char* declab_context_config(const declab_context* ctx) {
    if (!ctx) return nullptr;
    return dup_string(ctx->cfg.doc().dump(2));
}

int declab_field_generate(declab_context* ctx, declab_field** out) {
    if (!ctx || !out) return DECLAB_E_INVALID;
    try {
        auto* f = new declab_field;
        f->field = generate(ctx->cfg.ensemble());
        *out = f;
        return DECLAB_OK;
    } catch (const std::exception& e) {
        ctx->error = e.what();
        return DECLAB_E_INVALID;
    }
}

int declab_field_parse(declab_context* ctx, const char* json, declab_field** out) {
    if (!ctx || !json || !out) return DECLAB_E_INVALID;
    try {
        auto* f = new declab_field;
        f->field = field_from_json(json);
        *out = f;
        return DECLAB_OK;
    } catch (const std::exception& e) {
        ctx->error = e.what();
        return DECLAB_E_INVALID;
    }
}

char* declab_field_serialize(const declab_field* f) {
    if (!f) return nullptr;
    return dup_string(field_to_json(f->field));
}

int declab_field_packet_count(const declab_field* f) {
    return f ? static_cast<int>(f->field.packets.size()) : -1;
}

void declab_field_destroy(declab_field* f) { delete f; }

int declab_field_evaluate(declab_context* ctx, const declab_field* f, const double* xs,
                          size_t npts, size_t dim, double* out) {
    if (!ctx || !f || !xs || !out) return DECLAB_E_INVALID;
    try {
        require(dim == static_cast<size_t>(f->field.amb.dim()),
                "evaluate: point dimension must be n+1");
        FieldEvaluator ev(f->field);
        Vec x(dim);
        for (size_t i = 0; i < npts; ++i) {
            for (size_t d = 0; d < dim; ++d) x[d] = xs[i * dim + d];
            Complex v = ev.eval(x);
            out[2 * i] = v.real();
            out[2 * i + 1] = v.imag();
        }
        return DECLAB_OK;
    } catch (const std::exception& e) {
        ctx->error = e.what();
        return DECLAB_E_INVALID;
    }
}

int declab_norm(declab_context* ctx, const declab_field* f, const char* kind, double p,
                double* out_value) {
    if (!ctx || !f || !kind || !out_value) return DECLAB_E_INVALID;
    try {
        const Field& field = f->field;
        NormParams np = ctx->cfg.norm_params();
        np.p = p;
        np.D = field.amb.D;
        np.D0 = field.amb.D0;
        DyadicCube B = standard_block(field.amb);
        int w = ctx->cfg.workers();
        std::string k(kind);
        if (k == "lp") *out_value = lp_norm(field, B, p, np.grid, w).value;
        else if (k == "decoupling")
            *out_value = decoupling_norm(field, field.amb.D, B, p, np.grid, w).value;
        else if (k == "max-cap")
            *out_value = max_cap_norm(field, field.amb.D, B, p, np.grid, w).value;
        else if (k == "broad")
            *out_value = broad_norm(field, B, np, field.amb.D, w).value;
        else
            throw Error("unknown norm kind: " + k);
        return DECLAB_OK;
    } catch (const std::exception& e) {
        ctx->error = e.what();
        if (std::string(e.what()).find("budget") != std::string::npos) return DECLAB_E_BUDGET;
        return DECLAB_E_INVALID;
    }
}

int declab_run(declab_context* ctx, const char* subcommand, int* exit_status,
               char** out_summary) {
    if (!ctx || !subcommand) return DECLAB_E_INVALID;
    try {
        RunOutcome out = run_subcommand(subcommand, ctx->cfg);
        if (exit_status) *exit_status = out.exit_code;
        if (out_summary) {
            nlohmann::json j;
            j["exit_code"] = out.exit_code;
            j["failures"] = out.failures;
            j["message"] = out.message;
            j["artifacts"] = out.artifacts;
            *out_summary = dup_string(j.dump(2));
        }
        return out.exit_code == 2 ? DECLAB_E_CHECKS : DECLAB_OK;
    } catch (const std::exception& e) {
        ctx->error = e.what();
        if (exit_status) *exit_status = 1;
        std::string what = e.what();
        if (what.find("budget") != std::string::npos) return DECLAB_E_BUDGET;
        if (what.find("not found") != std::string::npos ||
            what.find("cannot write") != std::string::npos)
            return DECLAB_E_IO;
        return DECLAB_E_INVALID;
    }
}

void declab_free(char* s) { std::free(s); }

}  // extern "C"
