#include <math.h>
#include <stdio.h>
#include "deformexp.h"

#define CHECK(cond)                                                  \
  do {                                                               \
    if (!(cond)) {                                                   \
      fprintf(stderr, "line %d: %s\n", __LINE__, #cond);             \
      return 1;                                                      \
    }                                                                \
  } while (0)

int main(void) {
  double x = 0.0;
  CHECK(dx_exp_phi(1.0, 1.0, &x) == DX_STATUS_OK);
  CHECK(fabs(x - 1.557146) < 1e-6);
  CHECK(dx_phi(0.0, 1.0, &x) == DX_STATUS_DOMAIN);
  CHECK(dx_last_error() != NULL);

  const double rho_re[4] = {0.5, 0.0, 0.0, 0.5};
  const double k_re[4] = {1.0, 0.0, 0.0, -1.0};
  DxMatrix *rho_m = NULL, *k = NULL;
  DxDensity *rho = NULL;
  DxModel *model = NULL;
  CHECK(dx_matrix_new(2, rho_re, NULL, &rho_m) == DX_STATUS_OK);
  CHECK(dx_matrix_new(2, k_re, NULL, &k) == DX_STATUS_OK);
  CHECK(dx_density_new(rho_m, &rho) == DX_STATUS_OK);
  CHECK(dx_model_new(rho, k, 1.0, &model) == DX_STATUS_OK);
  CHECK(dx_model_alpha(model, &x) == DX_STATUS_OK);
  CHECK(fabs(x - 0.1299) < 5e-4);

  char *json = NULL;
  CHECK(dx_counterexample_json(DX_LAB_FUNCTION_U_MINUS_EXP_PHI, 1.0, 0, &json) == DX_STATUS_OK);
  CHECK(json != NULL);
  dx_string_free(json);

  dx_model_free(model);
  dx_density_free(rho);
  dx_matrix_free(k);
  dx_matrix_free(rho_m);
  printf("ok\n");
  return 0;
}
