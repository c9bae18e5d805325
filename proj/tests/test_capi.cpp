// Exercises the shared-library C API the way an external client would.
#include <cassert>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>

#include "declab.h"

#define REQUIRE(cond)                                                      \
    do {                                                                   \
        if (!(cond)) {                                                     \
            std::fprintf(stderr, "[FAIL] %s:%d: %s\n", __FILE__, __LINE__, #cond); \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main() {
    REQUIRE(std::strlen(declab_version()) > 0);

    // bad config: create fails and the error is retrievable
    declab_context* bad = declab_context_create("{\"ambient\": {\"D\": 5}}");
    REQUIRE(bad == nullptr);
    REQUIRE(std::strlen(declab_last_error()) > 0);

    // missing file
    REQUIRE(declab_context_create_from_file("/no/such/config.json") == nullptr);
    REQUIRE(std::string(declab_last_error()).find("/no/such/config.json") != std::string::npos);

    declab_context* ctx = declab_context_create(nullptr);
    REQUIRE(ctx != nullptr);

    // overrides validate eagerly
    REQUIRE(declab_context_override(ctx, "ambient.D", "4") == DECLAB_OK);
    REQUIRE(declab_context_override(ctx, "ambient.D", "3") != DECLAB_OK);
    REQUIRE(std::strlen(declab_context_error(ctx)) > 0);
    REQUIRE(declab_context_override(ctx, "ambient.D", "4") == DECLAB_OK);
    REQUIRE(declab_context_override(ctx, "ambient.n", "1") == DECLAB_OK);

    char* cfg = declab_context_config(ctx);
    REQUIRE(cfg != nullptr);
    REQUIRE(std::string(cfg).find("\"ambient\"") != std::string::npos);
    declab_free(cfg);

    // generate, serialize, parse round trip
    declab_field* f = nullptr;
    REQUIRE(declab_field_generate(ctx, &f) == DECLAB_OK);
    REQUIRE(f != nullptr);
    int count = declab_field_packet_count(f);
    REQUIRE(count == 8);  // one packet per cap at n=1, D=4

    char* json = declab_field_serialize(f);
    REQUIRE(json != nullptr);
    REQUIRE(std::string(json).find("field-v1") != std::string::npos);
    declab_field* f2 = nullptr;
    REQUIRE(declab_field_parse(ctx, json, &f2) == DECLAB_OK);
    REQUIRE(declab_field_packet_count(f2) == count);
    declab_free(json);

    // evaluation: parsed copy agrees with the original
    double xs[4] = {1.5, 2.5, 8.0, 3.0};
    double v1[4] = {0, 0, 0, 0}, v2[4] = {0, 0, 0, 0};
    REQUIRE(declab_field_evaluate(ctx, f, xs, 2, 2, v1) == DECLAB_OK);
    REQUIRE(declab_field_evaluate(ctx, f2, xs, 2, 2, v2) == DECLAB_OK);
    for (int i = 0; i < 4; ++i) REQUIRE(v1[i] == v2[i]);
    REQUIRE(declab_field_evaluate(ctx, f, xs, 1, 3, v1) != DECLAB_OK);  // bad dim

    // norms through the API
    double lp = 0.0, dec = 0.0;
    REQUIRE(declab_norm(ctx, f, "lp", 4.0, &lp) == DECLAB_OK);
    REQUIRE(declab_norm(ctx, f, "decoupling", 4.0, &dec) == DECLAB_OK);
    REQUIRE(lp > 0.0);
    REQUIRE(dec > 0.0);
    REQUIRE(declab_norm(ctx, f, "nonsense", 4.0, &lp) == DECLAB_E_INVALID);

    // run a subcommand end to end
    REQUIRE(declab_context_override(ctx, "output.dir", "\"/tmp/declab_capi\"") == DECLAB_OK);
    int status = -1;
    char* summary = nullptr;
    int rc = declab_run(ctx, "gen", &status, &summary);
    REQUIRE(rc == DECLAB_OK);
    REQUIRE(status == 0);
    REQUIRE(summary != nullptr);
    REQUIRE(std::string(summary).find("field.json") != std::string::npos);
    declab_free(summary);

    REQUIRE(declab_run(ctx, "bogus", &status, nullptr) == DECLAB_E_INVALID);
    REQUIRE(status == 1);
    REQUIRE(std::string(declab_context_error(ctx)).find("unknown subcommand") !=
            std::string::npos);

    declab_field_destroy(f);
    declab_field_destroy(f2);
    declab_context_destroy(ctx);
    std::printf("test_capi: all checks passed\n");
    return 0;
}
