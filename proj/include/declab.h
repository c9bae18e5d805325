/* declab: numerical laboratory for decoupling and k-broad norms near the
 * paraboloid.  Shared-library C API: opaque handles, integer status codes,
 * JSON strings at the boundary.
 *
 * Every function returning int yields DECLAB_OK (0) on success; on failure
 * the per-context error string (declab_context_error) or the global one
 * (declab_last_error) explains what happened.  Strings returned as char*
 * must be released with declab_free.
 */
#ifndef DECLAB_H
#define DECLAB_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct declab_context declab_context;
typedef struct declab_field declab_field;

enum {
    DECLAB_OK = 0,
    DECLAB_E_INVALID = 1,   /* bad arguments, config, or precondition */
    DECLAB_E_BUDGET = 2,    /* an explicit budget refusal (grid/enumeration) */
    DECLAB_E_IO = 3,        /* file read/write failure */
    DECLAB_E_CHECKS = 4,    /* run finished but certificates/invariants failed */
    DECLAB_E_INTERNAL = 5
};

const char* declab_version(void);

/* Last error from a context-less call (create). */
const char* declab_last_error(void);

/* config_json may be NULL or "" for built-in defaults; otherwise a JSON
 * document merged over the defaults. */
declab_context* declab_context_create(const char* config_json);
declab_context* declab_context_create_from_file(const char* path);
void declab_context_destroy(declab_context* ctx);

const char* declab_context_error(const declab_context* ctx);

/* Dot-path override, e.g. declab_context_override(ctx, "norms.p", "4"). */
int declab_context_override(declab_context* ctx, const char* dotpath, const char* value);

/* Serialized view of the effective configuration. */
char* declab_context_config(const declab_context* ctx);

/* Field construction / serialization (field-v1 JSON). */
int declab_field_generate(declab_context* ctx, declab_field** out);
int declab_field_parse(declab_context* ctx, const char* json, declab_field** out);
char* declab_field_serialize(const declab_field* f);
int declab_field_packet_count(const declab_field* f);
void declab_field_destroy(declab_field* f);

/* Pointwise evaluation at npts points of dimension dim (row-major xs);
 * writes interleaved re/im into out[2*npts]. */
int declab_field_evaluate(declab_context* ctx, const declab_field* f, const double* xs,
                          size_t npts, size_t dim, double* out);

/* Norm of a generated/loaded field per the context's "norm" section;
 * kind: lp | decoupling | max-cap | broad | restricted-broad. */
int declab_norm(declab_context* ctx, const declab_field* f, const char* kind, double p,
                double* out_value);

/* Runs one subcommand (gen | norm | decompose | verify | sweep | suite).
 * Exit status convention: 0 all checks pass, 1 usage/config error,
 * 2 at least one certificate or invariant failed (artifacts still written).
 * On DECLAB_OK / DECLAB_E_CHECKS, *out_summary (optional) receives a JSON
 * summary string (free with declab_free). */
int declab_run(declab_context* ctx, const char* subcommand, int* exit_status,
               char** out_summary);

void declab_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* DECLAB_H */
