#include "atk/threads.hpp"

#include <cstdlib>
#include <string>

namespace atk {

unsigned resolve_thread_count(int requested) {
  if (requested >= 1) return static_cast<unsigned>(requested);
  if (const char* env = std::getenv("ATK_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
      // fall through to the default
    }
  }
  return 1;
}

}  // namespace atk
