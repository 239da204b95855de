#include "ptycho/parallel.hpp"

#include <cstdlib>
#include <string>

namespace ptycho {

int thread_cap() {
  static const int cap = [] {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    long limit = long(hw);
    if (const char* env = std::getenv("PTYSOLVE_THREADS")) {
      char* end = nullptr;
      long v = std::strtol(env, &end, 10);
      if (end != env && v >= 1) limit = std::min(limit, v);
    }
    return int(limit);
  }();
  return cap;
}

}  // namespace ptycho
