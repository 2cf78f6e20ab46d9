/* Exercises the C API from C: configuration, a tiny end-to-end run, the
   checkpoint accessors and the error paths. argv[1] is a scratch directory. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include <typeclust/typeclust.h>

static int failures = 0;

#define EXPECT(cond)                                                                                 \
    do {                                                                                             \
        if (!(cond)) {                                                                               \
            fprintf(stderr, "%s:%d: expected %s (last error: %s)\n", __FILE__, __LINE__, #cond,     \
                    tc_last_error());                                                                \
            ++failures;                                                                              \
        }                                                                                            \
    } while (0)

static void count_lines(const char* line, void* user)
{
    (void)line;
    ++*(int*)user;
}

int main(int argc, char** argv)
{
    if (argc != 2) {
        fprintf(stderr, "usage: capi_test SCRATCH_DIR\n");
        return 2;
    }
    const char* dir = argv[1];
    char path[4096];

    EXPECT(strlen(tc_version()) > 0);
    EXPECT(strcmp(tc_status_name(TC_ERR_IO), "i/o error") == 0);

    tc_config* bad = NULL;
    EXPECT(tc_config_parse("{\"bogus\": 1}", &bad) == TC_ERR_ARGUMENT);
    EXPECT(bad == NULL);
    EXPECT(strstr(tc_last_error(), "bogus") != NULL);
    EXPECT(tc_config_load("/nonexistent/typeclust.json", &bad) == TC_ERR_IO);

    tc_config* cfg = NULL;
    EXPECT(tc_config_parse("{\"classes\": [\"E\"],"
                           " \"model\": {\"K\": 2, \"canvas\": 16, \"z_dim\": 3, \"editor_channels\": 2,"
                           "             \"editor_hidden\": 6, \"encoder_channels1\": 2, \"encoder_channels2\": 3},"
                           " \"train\": {\"epochs\": 2, \"batch_size\": 8},"
                           " \"perturb\": {\"examples_per_cast\": 6},"
                           " \"eval\": {\"nll_samples\": 2, \"align_steps\": 3, \"grid_examples\": 2}}",
                           &cfg) == TC_OK);
    if (!cfg)
        return 1;
    EXPECT(tc_config_set_seed(cfg, 4) == TC_OK);
    EXPECT(tc_config_set_variant(cfg, "no_residual") == TC_OK);
    EXPECT(tc_config_set_variant(cfg, "nonsense") == TC_ERR_ARGUMENT);
    EXPECT(tc_config_set_k(cfg, 0) == TC_ERR_ARGUMENT);
    EXPECT(tc_config_set_k(cfg, 2) == TC_OK);
    EXPECT(tc_config_set_out(cfg, dir) == TC_OK);
    snprintf(path, sizeof path, "%s/manifest.jsonl", dir);
    EXPECT(tc_config_set_data(cfg, path) == TC_OK);

    int lines = 0;
    EXPECT(tc_run_synth(cfg, count_lines, &lines) == TC_OK);
    EXPECT(lines > 0);
    lines = 0;
    EXPECT(tc_run_train(cfg, count_lines, &lines) == TC_OK);
    EXPECT(lines >= 2);
    EXPECT(tc_run_eval(cfg, NULL, NULL) == TC_OK);
    EXPECT(tc_run_assign(cfg, NULL, NULL) == TC_OK);
    EXPECT(tc_run_align(cfg, NULL, NULL) == TC_OK);
    EXPECT(tc_run_export_templates(cfg, NULL, NULL) == TC_OK);

    tc_checkpoint* ck = NULL;
    snprintf(path, sizeof path, "%s/model.json", dir);
    EXPECT(tc_checkpoint_load(path, &ck) == TC_OK);
    if (ck) {
        EXPECT(tc_checkpoint_k(ck) == 2);
        EXPECT(tc_checkpoint_canvas(ck) == 16);
        EXPECT(strcmp(tc_checkpoint_variant(ck), "no_residual") == 0);
        EXPECT(tc_checkpoint_class_count(ck) == 1);
        EXPECT(strcmp(tc_checkpoint_class_name(ck, 0), "E") == 0);
        EXPECT(tc_checkpoint_class_name(ck, 1) == NULL);
        double tmpl[256];
        EXPECT(tc_checkpoint_template(ck, 0, 1, tmpl, 256) == TC_OK);
        for (int i = 0; i < 256; ++i)
            EXPECT(tmpl[i] > 0.0 && tmpl[i] < 1.0);
        EXPECT(tc_checkpoint_template(ck, 0, 2, tmpl, 256) == TC_ERR_ARGUMENT);
        EXPECT(tc_checkpoint_template(ck, 0, 0, tmpl, 10) == TC_ERR_ARGUMENT);
        double w[2];
        EXPECT(tc_checkpoint_weights(ck, 0, w, 2) == TC_OK);
        EXPECT(fabs(w[0] + w[1] - 1.0) < 1e-9);
        tc_checkpoint_free(ck);
    }

    EXPECT(tc_checkpoint_load("/nonexistent/model.json", &ck) == TC_ERR_IO);
    snprintf(path, sizeof path, "%s/manifest.jsonl", dir);
    EXPECT(tc_checkpoint_load(path, &ck) == TC_ERR_FORMAT);

    EXPECT(tc_config_set_checkpoint(cfg, "/nonexistent/model.json") == TC_OK);
    EXPECT(tc_run_eval(cfg, NULL, NULL) == TC_ERR_IO);
    tc_config_free(cfg);

    if (failures)
        fprintf(stderr, "%d failure(s)\n", failures);
    else
        printf("capi: all checks passed\n");
    return failures ? 1 : 0;
}
