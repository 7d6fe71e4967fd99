#include <stdio.h>
#include <string.h>

#include "fiberwalk.h"

static const char *TRIANGLE =
    "{\"d\": 2, \"offsets\": [[\"0\", \"0\"]],"
    " \"halfspaces\": [{\"a\": [-1, 0], \"b\": \"0\"}, {\"a\": [0, -1], \"b\": \"0\"},"
    " {\"a\": [1, 1], \"b\": \"1\"}], \"witness\": [\"1/4\", \"1/4\"]}";

#define CHECK(call)                                                              \
    do {                                                                         \
        FwStatus st_ = (call);                                                   \
        if (st_ != FW_STATUS_OK) {                                               \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)st_, fw_last_error_message()); \
            return 1;                                                            \
        }                                                                        \
    } while (0)

int main(void) {
    FwInstance *inst = NULL;
    FwSampler *s = NULL;
    FwSamplerInfo info;
    uint64_t steps = 0;
    double pts[20];
    char *frac = NULL;

    CHECK(fw_instance_from_json(TRIANGLE, &inst));
    CHECK(fw_sampler_build(inst, FW_STRATEGY_COMPLETE, NULL, 0, 4, 7, 0.0, &s));
    CHECK(fw_sampler_info(s, &info));
    CHECK(fw_sampler_auto_steps(s, &steps));
    CHECK(fw_sampler_sample(s, 10, steps, 1, 10000, false, pts, 20));
    for (int i = 0; i < 10; i++) {
        double x = pts[2 * i], y = pts[2 * i + 1];
        if (x < 0 || y < 0 || x + y > 4) {
            fprintf(stderr, "point (%g, %g) outside 4P\n", x, y);
            return 1;
        }
    }
    CHECK(fw_sampler_irrelevant_fraction(s, &frac));
    printf("n=%zu k=%zu steps=%llu fraction=%s\n", info.num_vertices, info.degree,
           (unsigned long long)steps, frac);
    fw_string_free(frac);

    if (fw_sampler_sample(s, 10, steps, 1, 10000, false, pts, 3) != FW_STATUS_BUFFER_TOO_SMALL) {
        return 1;
    }
    if (fw_last_error_message() == NULL) {
        return 1;
    }
    fw_sampler_free(s);
    fw_instance_free(inst);
    return 0;
}
