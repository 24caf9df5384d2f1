#define N_TAPS 11
#define N_SAMPLES 64

typedef int coef_t;
typedef int data_t;
typedef int acc_t;

void fir(data_t *y, data_t x);
