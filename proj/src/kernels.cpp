#include <atomic>
#include <cstdlib>
#include <string>

#include "geoflow/error.hpp"
#include "geoflow/kernels.hpp"

namespace geoflow::kernels {
namespace {

const Table* initial_table() {
  const char* env = std::getenv("GEOFLOW_KERNELS");
  if (env != nullptr && *env != '\0') {
    if (parse_isa(env) == Isa::scalar) return &scalar_table();
    if (const Table* t = avx2_table()) return t;
    return &scalar_table();
  }
  if (const Table* t = avx2_table()) return t;
  return &scalar_table();
}

std::atomic<const Table*>& slot() {
  static std::atomic<const Table*> s{initial_table()};
  return s;
}

}  // namespace

Isa parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::scalar;
  if (name == "avx2") return Isa::avx2;
  throw ParameterError("unknown kernel set: " + std::string(name));
}

const Table& active() { return *slot().load(std::memory_order_acquire); }

void set_active(Isa isa) {
  if (isa == Isa::scalar) {
    slot().store(&scalar_table(), std::memory_order_release);
    return;
  }
  const Table* t = avx2_table();
  if (t == nullptr) throw ParameterError("AVX2 kernels are not available on this machine");
  slot().store(t, std::memory_order_release);
}

}  // namespace geoflow::kernels
