#ifndef SMIDGE_THREADING_H_
#define SMIDGE_THREADING_H_

#include <cstdint>

namespace smidge {

// Maps the user-facing thread setting (0 = all available cores) to a
// concrete worker count >= 1.
uint32_t resolve_threads(uint32_t requested);

}  // namespace smidge

#endif  // SMIDGE_THREADING_H_
