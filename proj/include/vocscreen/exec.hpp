#pragma once

#include <cstddef>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vocscreen::exec {

// Serial is the reference path; Parallel runs the same body under OpenMP.
// Kernels are written so both modes give bit-identical results (independent
// per-index RNG streams, per-slot writes, ordered reductions), which the test
// suite asserts and the bench tool times.
enum class Mode { Serial, Parallel };

Mode default_mode();
void set_default_mode(Mode m);
int thread_count();

template <typename Fn>
void for_each_index(std::size_t n, Mode mode, Fn&& fn) {
    if (mode == Mode::Parallel) {
#ifdef _OPENMP
        #pragma omp parallel for schedule(dynamic)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
            fn(static_cast<std::size_t>(i));
        }
        return;
#endif
    }
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace vocscreen::exec
