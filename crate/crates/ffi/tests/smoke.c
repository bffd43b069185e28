#include <math.h>
#include <stdio.h>
#include <string.h>

#include "splitgauge.h"

int main(void) {
    double a_rows[] = {-1.0, 1.0};
    double b_rows[] = {1.0, 5.0};
    SgFeatures *a = NULL, *b = NULL;
    SgSummary *ga = NULL, *gb = NULL;
    double d = -1.0;
    if (sg_features_from_rows(a_rows, 2, 1, &a) != SG_STATUS_OK) return 1;
    if (sg_features_from_rows(b_rows, 2, 1, &b) != SG_STATUS_OK) return 2;
    if (sg_summarize(a, &ga) != SG_STATUS_OK || sg_summarize(b, &gb) != SG_STATUS_OK) return 3;
    if (sg_frechet(ga, gb, &d) != SG_STATUS_OK) return 4;
    /* means 0 and 3, variances 2 and 8: 9 + (sqrt 2 - sqrt 8)^2 = 11 */
    if (fabs(d - 11.0) > 1e-12) return 5;

    SgFeatures *bad = NULL;
    if (sg_features_from_rows(NULL, 1, 1, &bad) != SG_STATUS_NULL_POINTER) return 6;
    char msg[128];
    if (sg_last_error(msg, sizeof msg) == 0 || strstr(msg, "null") == NULL) return 7;

    printf("%s %.6f\n", sg_version(), d);
    sg_summary_free(ga);
    sg_summary_free(gb);
    sg_features_free(a);
    sg_features_free(b);
    return 0;
}
