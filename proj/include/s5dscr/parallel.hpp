#pragma once

#include <cstddef>

namespace s5dscr {

/// Caps internal parallelism. Reads DSCR_THREADS when `n` is 0.
void set_threads(int n = 0);
int threads();

}  // namespace s5dscr
