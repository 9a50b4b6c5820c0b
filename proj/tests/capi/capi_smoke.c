#include <stdio.h>
#include <string.h>

#include "hwave/hwave.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

static int run_code(const char* cfg) {
  hwave_run* r = NULL;
  if (hwave_run_json(cfg, NULL, &r) != HWAVE_OK) return -1;
  int code = hwave_run_exit_code(r);
  hwave_run_free(r);
  return code;
}

int main(void) {
  EXPECT(strcmp(hwave_version(), "0.1.0") == 0);
  EXPECT(strstr(hwave_builder_names(), "box_kernel_phi") != NULL);
  EXPECT(strstr(hwave_check_names(), "thm-twisted-translates") != NULL);

  hwave_run* r = NULL;
  EXPECT(hwave_run_json(NULL, NULL, &r) == HWAVE_ERR_ARGUMENT);
  EXPECT(strlen(hwave_last_error()) > 0);

  const char* pass = "{\"signal\": {\"builder\": \"gaussian2d\"}, \"checks\": [\"classical\"]}";
  const char* fail =
      "{\"signal\": {\"builder\": \"gaussian2d\"}, \"checks\": [\"classical\"], \"classical\": {\"wavelet\": \"gaussian\"}}";
  EXPECT(run_code(pass) == HWAVE_EXIT_PASS);
  EXPECT(run_code(fail) == HWAVE_EXIT_FAIL);
  EXPECT(run_code("{\"checks\": [\"classical\"]") == HWAVE_EXIT_CONFIG);
  EXPECT(run_code("{\"signal\": {\"builder\": \"gaussian2d\"}, \"checks\": []}") == HWAVE_EXIT_CONFIG);

  hwave_run_options opts = {1, 0};
  hwave_run *a = NULL, *b = NULL;
  EXPECT(hwave_run_json(fail, &opts, &a) == HWAVE_OK);
  EXPECT(hwave_run_json(fail, &opts, &b) == HWAVE_OK);
  EXPECT(strcmp(hwave_run_report(a), hwave_run_report(b)) == 0);
  EXPECT(strstr(hwave_run_summary(a), "exit 1") != NULL);
  EXPECT(strlen(hwave_run_error(a)) == 0);
  EXPECT(strlen(hwave_run_timings(a)) > 2);
  hwave_run_free(a);
  hwave_run_free(b);

  hwave_run* missing = NULL;
  EXPECT(hwave_run_file("/nonexistent/config.json", NULL, &missing) == HWAVE_OK);
  EXPECT(hwave_run_exit_code(missing) == HWAVE_EXIT_CONFIG);
  hwave_run_free(missing);

  if (failures) fprintf(stderr, "%d failures\n", failures);
  return failures ? 1 : 0;
}
