#include "pcad/rng.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

#include <omp.h>

#include "pcad/error.hpp"
#include "pcad/parallel.hpp"

namespace pcad {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
  return splitmix64(splitmix64(master) ^ fnv1a(tag));
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index) {
  return splitmix64(derive_seed(master, tag) + splitmix64(index));
}

void warn(const std::string& message) {
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "[pcad] warning: " << message << '\n';
}

void configure_threads() {
  static std::once_flag once;
  std::call_once(once, [] {
    const char* env = std::getenv("PCAD_THREADS");
    if (env == nullptr || *env == '\0') return;
    char* end = nullptr;
    long cap = std::strtol(env, &end, 10);
    if (end == env || cap < 1) {
      warn(std::string("ignoring invalid PCAD_THREADS=") + env);
      return;
    }
    if (cap < omp_get_max_threads()) omp_set_num_threads(static_cast<int>(cap));
  });
}

int worker_count() {
  configure_threads();
  return omp_get_max_threads();
}

}  // namespace pcad
