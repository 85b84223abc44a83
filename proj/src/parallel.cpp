#include "speclaw/parallel.hpp"

#include <cstdlib>
#include <string>

namespace speclaw {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SPECLAW_THREADS")) {
    try {
      const int value = std::stoi(env);
      if (value > 0) return value;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

}  // namespace speclaw
