#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "volentropy.h"

#define CHECK(cond)                                                     \
    do {                                                                \
        if (!(cond)) {                                                  \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__,     \
                    #cond, ve_last_error_message());                    \
            return 1;                                                   \
        }                                                               \
    } while (0)

int main(void) {
    double v[] = {-0.02, -0.01, 0.01, 0.02};
    double h = 0.0;
    CHECK(ve_entropy(v, 4, 2, VE_LOG_BASE_E, &h) == VE_STATUS_OK);
    CHECK(fabs(h - log(2.0)) < 1e-15);

    double pct = 0.0;
    CHECK(ve_pct_difference(0.017, 0.033, &pct) == VE_STATUS_OK);
    CHECK(fabs(pct - 64.0) < 1e-9);
    CHECK(ve_pct_difference(-1.0, 1.0, &pct) == VE_STATUS_INVALID_ARGUMENT);
    CHECK(strlen(ve_last_error_message()) > 0);

    VePrices *prices = NULL;
    char *change = NULL;
    CHECK(ve_prices_synth_regime_switch(252, 252, 0.0, 0.01, 0.02, 1, &prices, &change) == VE_STATUS_OK);

    VeEventSplit *split = NULL;
    CHECK(ve_split_at_event(prices, change, "1y", &split) == VE_STATUS_OK);
    VeMeasureSet before, after;
    CHECK(ve_split_measures(split, VE_SIDE_BEFORE, 20, VE_LOG_BASE_E, &before) == VE_STATUS_OK);
    CHECK(ve_split_measures(split, VE_SIDE_AFTER, 20, VE_LOG_BASE_E, &after) == VE_STATUS_OK);
    CHECK(before.n == 251 && after.n == 252);
    CHECK(after.entropy <= after.entropy_max);

    size_t len = 0;
    CHECK(ve_split_returns(split, VE_SIDE_AFTER, NULL, 0, &len) == VE_STATUS_BUFFER_TOO_SMALL);
    CHECK(len == 252);
    double *r = malloc(len * sizeof *r);
    CHECK(ve_split_returns(split, VE_SIDE_AFTER, r, len, &len) == VE_STATUS_OK);
    free(r);

    VeStore *store = ve_store_new();
    CHECK(ve_store_add(store, prices) == VE_STATUS_OK);
    char *json = NULL;
    CHECK(ve_compare_universe_json("index = SYNTH\n", store, change, NULL, 20, VE_LOG_BASE_TWO, 1, &json) ==
          VE_STATUS_OK);
    CHECK(strstr(json, "\"shannons\"") != NULL);

    ve_string_free(json);
    ve_store_free(store);
    ve_split_free(split);
    ve_string_free(change);
    ve_prices_free(prices);
    printf("volentropy %s: C smoke test ok\n", ve_version());
    return 0;
}
