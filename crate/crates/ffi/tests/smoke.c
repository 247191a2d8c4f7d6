#include <stdio.h>
#include <string.h>

#include "teich_lab.h"

#define CHECK(cond)                                                   \
    do {                                                              \
        if (!(cond)) {                                                \
            fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(void) {
    TlPermutation *p = NULL;
    bool w = false;
    CHECK(tl_permutation_reversal(5, &p) == TL_STATUS_OK);
    CHECK(tl_permutation_is_type_w(p, &w) == TL_STATUS_OK && w);
    tl_permutation_free(p);

    const char *lengths[] = {"2/7", "5/7"};
    size_t images[] = {2, 1};
    TlIet *t = NULL;
    CHECK(tl_iet_new(lengths, images, 2, &t) == TL_STATUS_OK);
    char buf[64];
    size_t needed = 0;
    CHECK(tl_iet_epsilon_n(t, 3, buf, sizeof buf, &needed) == TL_STATUS_OK);
    CHECK(strcmp(buf, "1/7") == 0);
    CHECK(tl_iet_epsilon_n(t, 3, buf, 2, &needed) == TL_STATUS_BUFFER_TOO_SMALL && needed == 4);
    tl_iet_free(t);

    TlSurface *s = NULL;
    double systole = 0.0;
    CHECK(tl_surface_builtin("regular_octagon", &s) == TL_STATUS_OK);
    CHECK(tl_surface_systole(s, &systole) == TL_STATUS_OK && systole > 0.0);
    CHECK(tl_surface_act(s, 2.0, 0.0, 0.0, 2.0, NULL) == TL_STATUS_INVALID_ARGUMENT);
    CHECK(tl_last_error_message(buf, sizeof buf, &needed) == TL_STATUS_OK || needed > sizeof buf);
    tl_surface_free(s);

    puts("ok");
    return 0;
}
