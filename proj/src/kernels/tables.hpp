#pragma once

#include "adgame/kernels.hpp"

namespace adgame::kernels {

extern const Table scalar_table;
#if defined(__x86_64__) || defined(__i386__)
extern const Table avx2_table;
#endif
#if defined(__aarch64__)
extern const Table neon_table;
#endif

}  // namespace adgame::kernels
