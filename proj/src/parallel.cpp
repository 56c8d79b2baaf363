#include "cnmc/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace cnmc {

namespace {
std::atomic<int> g_threads{-1};

int hardware() {
  const unsigned h = std::thread::hardware_concurrency();
  return h == 0 ? 1 : static_cast<int>(h);
}
}  // namespace

void set_num_threads(int n) { g_threads = n <= 0 ? hardware() : n; }

int num_threads() {
  int n = g_threads.load();
  if (n < 0) {
    n = hardware();
    if (const char* env = std::getenv("CNMC_THREADS")) {
      try {
        const int v = std::stoi(env);
        if (v > 0) n = v;
      } catch (...) {
      }
    }
    g_threads = n;
  }
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const auto workers = static_cast<std::size_t>(std::max(1, num_threads()));
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(workers, n); ++t) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace cnmc
