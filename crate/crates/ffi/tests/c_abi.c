#include <stdio.h>
#include <string.h>
#include "sdatlas.h"

static const char MODEL[] =
    "<xmile version=\"1.0\" xmlns=\"http://docs.oasis-open.org/xmile/ns/XMILE/v1.0\">"
    "<header><name>tiny</name></header><model><variables>"
    "<stock name=\"level\"><eqn>10</eqn><outflow>drain</outflow></stock>"
    "<flow name=\"drain\"><eqn>level * 0.1</eqn></flow>"
    "</variables></model></xmile>";

int main(void) {
    SdModel *model = NULL;
    char *json = NULL;
    if (sdatlas_model_parse_xmile((const uint8_t *)MODEL, strlen(MODEL), &model) != SD_STATUS_OK) {
        fprintf(stderr, "parse: %s\n", sdatlas_last_error());
        return 1;
    }
    if (sdatlas_model_variable_count(model) != 2) return 2;
    if (sdatlas_model_loops_json(model, -1, &json) != SD_STATUS_OK) return 3;
    if (strstr(json, "\"balancing\"") == NULL) return 4;
    sdatlas_string_free(json);
    sdatlas_model_free(model);

    if (sdatlas_model_parse_xmile((const uint8_t *)"<x", 2, &model) != SD_STATUS_PARSE_ERROR) return 5;
    if (sdatlas_last_error() == NULL) return 6;
    if (sdatlas_catalog_load(NULL, NULL) != SD_STATUS_NULL_ARGUMENT) return 7;
    printf("ok %s\n", sdatlas_version());
    return 0;
}
