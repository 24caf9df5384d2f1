#include <cstdio>
#include <fstream>

#include "fir.h"

int main() {
    std::ifstream in("fir_input.dat");
    if (!in) {
        printf("Cannot open fir_input.dat\n");
        return 1;
    }

    const int c[N_TAPS] = {53, 0, -91, 0, 313, 500, 313, 0, -91, 0, 53};
    int history[N_TAPS] = {0};
    int errors = 0;

    for (int n = 0; n < N_SAMPLES; n++) {
        int x = 0;
        if (!(in >> x)) {
            printf("Input file too short at sample %d\n", n);
            return 1;
        }
        for (int i = N_TAPS - 1; i > 0; i--)
            history[i] = history[i - 1];
        history[0] = x;
        int expected = 0;
        for (int i = 0; i < N_TAPS; i++)
            expected += history[i] * c[i];

        data_t y = 0;
        fir(&y, x);
        if (y != expected) {
            printf("Sample %d FAILED: expected %d, got %d\n", n, expected, y);
            errors++;
        }
    }

    if (errors == 0) {
        printf("All tests PASSED.\n");
        return 0;
    }
    printf("Some tests FAILED.\n");
    return 1;
}
