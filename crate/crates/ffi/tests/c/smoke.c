#include <math.h>
#include <stdio.h>
#include <string.h>

#include "qmultislice.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        QmsStatus s_ = (call);                                             \
        if (s_ != QMS_STATUS_OK) {                                         \
            fprintf(stderr, "%s -> %d: %s\n", #call, s_, qms_last_error()); \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    QmsBeam beam;
    CHECK(qms_beam_params(100e3, &beam));
    if (fabs(beam.wavelength - 0.03701) > 1e-5) return 2;

    if (qms_beam_params(-1.0, &beam) != QMS_STATUS_INVALID_ARGUMENT) return 3;
    if (strstr(qms_last_error(), "voltage") == NULL) return 4;

    QmsSetup *setup = NULL;
    CHECK(qms_setup_default(3, 1, &setup));
    size_t n = 0;
    CHECK(qms_setup_axis_len(setup, &n));
    double classical[64], quantum[64], eps = 1.0;
    QmsRunSummary summary;
    CHECK(qms_simulate(setup, QMS_ENGINE_CLASSICAL, 0.0, 0.0, classical, n * n, NULL));
    CHECK(qms_simulate(setup, QMS_ENGINE_QUANTUM_EXACT, 0.0, 0.0, quantum, n * n, &summary));
    CHECK(qms_relative_error(quantum, classical, n * n, &eps));
    qms_setup_free(setup);
    if (eps > 1e-9 || summary.slices != 16 || summary.census.total == 0) return 5;

    printf("ok %s eps=%.3e gates=%llu\n", qms_version(), eps, (unsigned long long)summary.census.total);
    return 0;
}
