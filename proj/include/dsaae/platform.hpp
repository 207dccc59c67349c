#ifndef DSAAE_PLATFORM_HPP
#define DSAAE_PLATFORM_HPP

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace dsaae {

/// Training allocates and frees many same-sized multi-megabyte temporaries
/// per step. glibc serves those with mmap/munmap by default, which costs a
/// page-fault storm on every step; raise the thresholds so they are reused.
inline void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 128 << 20);
#endif
}

}  // namespace dsaae

#endif  // DSAAE_PLATFORM_HPP
