#include <cmath>
#include <cstdio>

#include "gemm.h"

int main() {
    data_t alpha = 1.5f;
    data_t beta = 1.2f;
    data_t A[NI][NK];
    data_t B[NK][NJ];
    data_t C[NI][NJ];
    data_t C_ref[NI][NJ];

    for (int i = 0; i < NI; i++)
        for (int k = 0; k < NK; k++)
            A[i][k] = (data_t)((i * k + 1) % NI) / NI;
    for (int k = 0; k < NK; k++)
        for (int j = 0; j < NJ; j++)
            B[k][j] = (data_t)((k * (j + 1) + 2) % NJ) / NJ;
    for (int i = 0; i < NI; i++)
        for (int j = 0; j < NJ; j++)
            C[i][j] = C_ref[i][j] = (data_t)((i * (j + 2) + 3) % NK) / NK;

    for (int i = 0; i < NI; i++) {
        for (int j = 0; j < NJ; j++) {
            double acc = (double)C_ref[i][j] * beta;
            for (int k = 0; k < NK; k++)
                acc += (double)alpha * A[i][k] * B[k][j];
            C_ref[i][j] = (data_t)acc;
        }
    }

    gemm(alpha, beta, C, A, B);

    int errors = 0;
    for (int i = 0; i < NI; i++) {
        for (int j = 0; j < NJ; j++) {
            if (std::fabs(C[i][j] - C_ref[i][j]) > 1e-3f) {
                printf("Mismatch at C[%d][%d]: expected %f, got %f\n", i, j, C_ref[i][j], C[i][j]);
                errors++;
            }
        }
    }

    if (errors == 0) {
        printf("All tests PASSED.\n");
        return 0;
    }
    printf("Some tests FAILED (%d mismatches).\n", errors);
    return 1;
}
