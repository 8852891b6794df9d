#ifndef ANISOLAB_H
#define ANISOLAB_H

/* C interface to the anisolab core: expression handles, experiment runs and
 * field-container helpers. All functions are thread-safe; error messages are
 * per-thread and overwritten by the next failing call on that thread. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  ANISO_OK = 0,
  ANISO_ERR = 1,             /* operational failure, see aniso_last_error() */
  ANISO_HYPOTHESIS_FAIL = 2, /* run completed, a hypothesis verdict failed */
  ANISO_EPARSE = 3,
  ANISO_EDOMAIN = 4,
  ANISO_EINVAL = 5,
  ANISO_EIO = 6
} aniso_status;

/* opaque immutable expression over variables x1..xd */
typedef struct aniso_expr aniso_expr;

const char* aniso_version(void);
const char* aniso_last_error(void);

aniso_status aniso_expr_parse(const char* source, uint32_t dim, aniso_expr** out);
aniso_status aniso_expr_eval(const aniso_expr* e, const double* x, uint32_t n, double* out);
aniso_status aniso_expr_diff(const aniso_expr* e, uint32_t var, aniso_expr** out);
/* writes the printed form (NUL-terminated) into buf; fails with ANISO_EINVAL
 * when buflen is too small */
aniso_status aniso_expr_print(const aniso_expr* e, char* buf, size_t buflen);
void aniso_expr_free(aniso_expr* e);

/* Run one experiment from a key=value config file. Returns the process exit
 * code contract: 0 success, 1 operational error, 2 hypothesis violation.
 * out_dir overrides the config's `out` when non-NULL. */
int aniso_run(const char* config_path, const char* out_dir);

/* newline-separated catalog, one "name\tdescription" row per experiment */
const char* aniso_experiment_catalog(void);

/* convert an ANISO1 field container to CSV (csv_path NULL writes stdout) */
aniso_status aniso_field_export_csv(const char* field_path, const char* csv_path);

#ifdef __cplusplus
}
#endif

#endif /* ANISOLAB_H */
