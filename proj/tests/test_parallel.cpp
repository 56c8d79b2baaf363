#include <doctest.h>

#include <atomic>
#include <stdexcept>
#include <vector>

#include "cnmc/parallel.hpp"

using namespace cnmc;

TEST_SUITE("parallel") {
  TEST_CASE("every index runs exactly once") {
    for (int t : {1, 3, 8}) {
      set_num_threads(t);
      std::vector<std::atomic<int>> hits(1000);
      parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
      for (auto& h : hits) CHECK(h.load() == 1);
    }
    set_num_threads(0);
    CHECK(num_threads() >= 1);
  }

  TEST_CASE("exceptions propagate") {
    set_num_threads(4);
    CHECK_THROWS_AS(parallel_for(100, [](std::size_t i) {
                      if (i == 37) throw std::runtime_error("boom");
                    }),
                    std::runtime_error);
    set_num_threads(0);
  }
}
