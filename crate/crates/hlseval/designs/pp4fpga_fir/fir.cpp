#include "fir.h"

void fir(data_t *y, data_t x) {
    const coef_t c[N_TAPS] = {53, 0, -91, 0, 313, 500, 313, 0, -91, 0, 53};
    static data_t shift_reg[N_TAPS];
    acc_t acc = 0;

shift_accumulate:
    for (int i = N_TAPS - 1; i >= 0; i--) {
        if (i == 0) {
            shift_reg[0] = x;
        } else {
            shift_reg[i] = shift_reg[i - 1];
        }
        acc += shift_reg[i] * c[i];
    }
    *y = acc;
}
