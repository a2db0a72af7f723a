#include "radeval/parallel.hpp"

#include <cstdlib>
#include <string>

namespace radeval {

std::size_t effective_threads(std::size_t requested) {
  std::size_t n = requested;
  if (n == 0) n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("RADEVAL_THREADS")) {
    try {
      const long v = std::stol(cap);
      if (v > 0) n = std::min(n, static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      // ignore malformed values
    }
  }
  return n;
}

}  // namespace radeval
