#pragma once

#include <cstddef>

namespace pcad {

/// Applies the PCAD_THREADS cap (if set) to the OpenMP runtime. Idempotent.
void configure_threads();

/// Number of worker threads the kernels will use.
int worker_count();

}  // namespace pcad
