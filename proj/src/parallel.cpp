#include "freebound/parallel.hpp"

#include <cstdlib>
#include <string>

namespace freebound {

int workers_from_env() {
  const char* v = std::getenv("FREEBOUND_WORKERS");
  if (v == nullptr || *v == '\0') return 1;
  try {
    return std::clamp(std::stoi(v), 1, 64);
  } catch (const std::exception&) {
    return 1;
  }
}

}  // namespace freebound
