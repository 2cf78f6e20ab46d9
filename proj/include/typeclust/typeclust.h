#ifndef TYPECLUST_TYPECLUST_H
#define TYPECLUST_TYPECLUST_H

#include <stddef.h>
#include <stdint.h>

#if defined(TYPECLUST_BUILDING_LIBRARY)
#define TC_API __attribute__((visibility("default")))
#else
#define TC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tc_status {
    TC_OK = 0,
    TC_ERR_ARGUMENT = 1, /* invalid argument or configuration */
    TC_ERR_IO = 2,       /* missing or unwritable file */
    TC_ERR_FORMAT = 3,   /* malformed image, manifest or checkpoint */
    TC_ERR_TRAINING = 4, /* non-finite objective or parameters */
    TC_ERR_INTERNAL = 5
} tc_status;

/* Message for the most recent failed call on this thread; "" if none. */
TC_API const char* tc_last_error(void);
TC_API const char* tc_status_name(tc_status status);
TC_API const char* tc_version(void);

/* Line-oriented progress and output notices. */
typedef void (*tc_log_fn)(const char* line, void* user);

/* ---- run configuration ---- */

typedef struct tc_config tc_config;

TC_API tc_status tc_config_new(tc_config** out);
TC_API tc_status tc_config_load(const char* path, tc_config** out);
TC_API tc_status tc_config_parse(const char* json, tc_config** out);
TC_API void tc_config_free(tc_config* cfg);

TC_API tc_status tc_config_set_seed(tc_config* cfg, uint64_t seed);
TC_API tc_status tc_config_set_variant(tc_config* cfg, const char* variant);
TC_API tc_status tc_config_set_k(tc_config* cfg, int k);
TC_API tc_status tc_config_set_out(tc_config* cfg, const char* dir);
TC_API tc_status tc_config_set_checkpoint(tc_config* cfg, const char* path);
TC_API tc_status tc_config_set_data(tc_config* cfg, const char* manifest_path);

/* ---- workflows; outputs go under the configured out directory ---- */

TC_API tc_status tc_run_synth(const tc_config* cfg, tc_log_fn log, void* user);
TC_API tc_status tc_run_train(const tc_config* cfg, tc_log_fn log, void* user);
TC_API tc_status tc_run_eval(const tc_config* cfg, tc_log_fn log, void* user);
TC_API tc_status tc_run_assign(const tc_config* cfg, tc_log_fn log, void* user);
TC_API tc_status tc_run_align(const tc_config* cfg, tc_log_fn log, void* user);
TC_API tc_status tc_run_export_templates(const tc_config* cfg, tc_log_fn log, void* user);

/* ---- checkpoints ---- */

typedef struct tc_checkpoint tc_checkpoint;

TC_API tc_status tc_checkpoint_load(const char* path, tc_checkpoint** out);
TC_API void tc_checkpoint_free(tc_checkpoint* ck);
TC_API int tc_checkpoint_k(const tc_checkpoint* ck);
TC_API int tc_checkpoint_canvas(const tc_checkpoint* ck);
TC_API const char* tc_checkpoint_variant(const tc_checkpoint* ck);
TC_API size_t tc_checkpoint_class_count(const tc_checkpoint* ck);
TC_API const char* tc_checkpoint_class_name(const tc_checkpoint* ck, size_t index);
/* Copies canvas*canvas template probabilities (row-major, ink = 1) into buf. */
TC_API tc_status tc_checkpoint_template(const tc_checkpoint* ck, size_t class_index, int k, double* buf,
                                        size_t len);
/* Mixing weights of a class; buf holds K entries. */
TC_API tc_status tc_checkpoint_weights(const tc_checkpoint* ck, size_t class_index, double* buf, size_t len);

#ifdef __cplusplus
}
#endif

#endif
