#include "lift5/parallel.hpp"

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace lift5 {

namespace {
std::atomic<int> g_threads{1};
thread_local bool t_inside = false;
}  // namespace

void set_thread_count(int n) { g_threads = n < 1 ? 1 : n; }
int thread_count() { return g_threads; }

void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::min(thread_count(), n);
  if (workers <= 1 || t_inside) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  auto body = [&] {
    t_inside = true;
    for (int i; (i = next++) < n;) {
      if (failed) break;
      try {
        fn(i);
      } catch (...) {
        if (!failed.exchange(true)) err = std::current_exception();
      }
    }
    t_inside = false;
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace lift5
