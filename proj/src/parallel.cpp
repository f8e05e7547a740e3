#include "stark/parallel.hpp"

#include <atomic>

namespace stark {

namespace {
std::atomic<int> g_workers{1};
}

void set_worker_count(int workers) { g_workers.store(std::max(1, workers)); }

int worker_count() { return g_workers.load(); }

}  // namespace stark
