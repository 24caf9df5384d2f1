#define NI 16
#define NJ 16
#define NK 16

typedef float data_t;

void gemm(data_t alpha, data_t beta, data_t C[NI][NJ], data_t A[NI][NK], data_t B[NK][NJ]);
