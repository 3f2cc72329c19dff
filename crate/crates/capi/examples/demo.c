/* Minimal C consumer: normal forms, chains, class-T detection and the
 * lens-space mapping classes through the C ABI.
 *
 * Build (from the workspace root, after `cargo build -p tsurf-capi`):
 *   gcc crates/capi/examples/demo.c -Icrates/capi/include \
 *       target/debug/libtsurf_capi.a -lpthread -ldl -lm -o demo
 */
#include <stdio.h>
#include "tsurf.h"

int main(void) {
    printf("tsurf %s\n", tsurf_version());

    char *json = NULL;
    if (tsurf_sing_hj(7, 5, &json) != TsurfStatus_Ok) {
        fprintf(stderr, "hj failed: %s\n", tsurf_last_error());
        return 1;
    }
    printf("chain of 1/7(1,5): %s\n", json);
    tsurf_string_free(json);

    bool found = false;
    if (tsurf_sing_class_t(4, 1, 1, &json, &found) != TsurfStatus_Ok) {
        fprintf(stderr, "class-t failed: %s\n", tsurf_last_error());
        return 1;
    }
    printf("1/4(1,1) class T: %s\n%s\n", found ? "yes" : "no", json);
    tsurf_string_free(json);

    if (tsurf_lens_mcg(8, 3, &json) != TsurfStatus_Ok) {
        fprintf(stderr, "mcg failed: %s\n", tsurf_last_error());
        return 1;
    }
    printf("L(8,3): %s\n", json);
    tsurf_string_free(json);

    /* error path: a non-isolated quotient is rejected */
    if (tsurf_sing_normalize(4, 2, 1, &json) == TsurfStatus_Ok) {
        fprintf(stderr, "expected a rejection\n");
        return 1;
    }
    printf("rejected as expected: %s\n", tsurf_last_error());
    return 0;
}
