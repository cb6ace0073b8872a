#include <cstdlib>

// Static OpenBLAS selects its kernel set in its own ELF constructor, and on
// some CPUs the runtime dispatch falls back to a generic kernel that is
// several times slower than the AVX-512 path. Setting OPENBLAS_CORETYPE
// before that constructor runs (priority 101 beats the default 65535) opts
// into the fast path; an explicit user setting always wins (overwrite = 0).
// OPENBLAS_NUM_THREADS=1 keeps every GEMM single-threaded so forward and
// backward passes are bit-reproducible.

namespace qldpc::nn {

namespace {

__attribute__((constructor(101))) void configure_openblas() {
#if defined(__x86_64__)
  // libgcc's own cpu-detection constructor may not have run yet at this
  // priority, so prime the model registers by hand.
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx512f")) {
    setenv("OPENBLAS_CORETYPE", "SKYLAKEX", 0);
  }
#endif
  setenv("OPENBLAS_NUM_THREADS", "1", 0);
}

}  // namespace

// Referenced from tape.cpp so this translation unit is always pulled out of
// the static archive (an object with only a constructor would be dropped).
void ensure_blas_configured() {}

}  // namespace qldpc::nn
