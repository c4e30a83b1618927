#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kitecert {

// Serial reference loop. The OpenMP path below must produce bit-identical
// results; tests and bench/ compare the two.
template <class Body>
void serial_for(std::size_t n, Body&& body) {
    for (std::size_t i = 0; i < n; ++i) body(i);
}

// Index-parallel map. body(i) may only write to slot i of shared outputs,
// which makes the result independent of thread count and schedule.
// threads <= 1 runs the serial reference path, threads == 0 uses the OpenMP
// default team size.
template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
#ifdef _OPENMP
    if (threads == 1 || n <= 1) {
        serial_for(n, body);
        return;
    }
    const long long nn = static_cast<long long>(n);
    if (threads <= 0) {
#pragma omp parallel for schedule(dynamic)
        for (long long i = 0; i < nn; ++i) body(static_cast<std::size_t>(i));
    } else {
#pragma omp parallel for schedule(dynamic) num_threads(threads)
        for (long long i = 0; i < nn; ++i) body(static_cast<std::size_t>(i));
    }
#else
    (void)threads;
    serial_for(n, body);
#endif
}

inline int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace kitecert
