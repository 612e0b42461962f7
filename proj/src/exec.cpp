#include "vocscreen/exec.hpp"

#include <cstdlib>
#include <string>

namespace vocscreen::exec {

namespace {
Mode g_mode = [] {
    if (const char* env = std::getenv("VOCSCREEN_THREADS")) {
        const int n = std::atoi(env);
        if (n == 1) return Mode::Serial;
#ifdef _OPENMP
        if (n > 1) omp_set_num_threads(n);
#endif
    }
#ifdef _OPENMP
    return Mode::Parallel;
#else
    return Mode::Serial;
#endif
}();
}  // namespace

Mode default_mode() { return g_mode; }
void set_default_mode(Mode m) { g_mode = m; }

int thread_count() {
#ifdef _OPENMP
    if (const char* env = std::getenv("VOCSCREEN_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace vocscreen::exec
