/* Minimal C consumer of the liecat C ABI.
 *
 * Build from the repository root after `cargo build -p liecat-ffi`:
 *
 *   cc crates/liecat-ffi/examples/demo.c \
 *      -Icrates/liecat-ffi/include \
 *      target/debug/libliecat_ffi.a -lm -o demo
 */

#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "liecat.h"

static void check(LiecatStatus status, const char *what) {
    if (status != LiecatStatus_Ok) {
        fprintf(stderr, "%s failed (%d): %s\n", what, (int)status,
                liecat_last_error_message());
        exit(1);
    }
}

int main(void) {
    LiecatRealization *order = NULL;
    check(liecat_realization_parse("family = order_category", &order), "parse");

    size_t dim_morphisms = 0, dim_objects = 0, delta = 0;
    check(liecat_realization_dims(order, &dim_morphisms, &dim_objects, &delta),
          "dims");
    printf("order category: %zu morphism coords, %zu object coords, delta %zu\n",
           dim_morphisms, dim_objects, delta);

    const double g[2] = {3.0, 2.0};
    const double h[2] = {2.0, 1.0};
    double gh[2] = {0.0, 0.0};
    check(liecat_compose(order, g, 2, h, 2, gh, 2), "compose");
    printf("compose: (%g, %g) o (%g, %g) = (%g, %g)\n", g[0], g[1], h[0], h[1],
           gh[0], gh[1]);

    size_t left = 0, right = 0;
    bool regular = false;
    check(liecat_rank_report(order, gh, 2, &left, &right, &regular), "rank");
    printf("ranks: left %zu, right %zu, regular %s\n", left, right,
           regular ? "yes" : "no");

    /* A mismatched pair must report NotComposable, not crash. */
    const double k[2] = {9.0, 8.0};
    double bad[2];
    if (liecat_compose(order, g, 2, k, 2, bad, 2) != LiecatStatus_NotComposable) {
        fprintf(stderr, "expected a NotComposable status\n");
        return 1;
    }
    printf("mismatched pair rejected: %s\n", liecat_last_error_message());

    liecat_realization_free(order);

    const double energies[2] = {0.0, 0.6931471805599453};
    double probs[2], z, lambda;
    check(liecat_gibbs(energies, 2, 1.0, 1.0, probs, 2, &z, &lambda), "gibbs");
    printf("gibbs: p = (%.6f, %.6f), Z = %.6f, lambda = %.6f\n", probs[0],
           probs[1], z, lambda);

    return 0;
}
