#include "newsload/parallel.hpp"

namespace newsload {

namespace {
std::atomic<unsigned> g_workers{std::max(1u, std::thread::hardware_concurrency())};
}

void set_worker_count(unsigned workers) { g_workers = std::max(1u, workers); }

unsigned worker_count() { return g_workers; }

}  // namespace newsload
