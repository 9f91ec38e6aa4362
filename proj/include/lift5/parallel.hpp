#pragma once

#include <functional>

namespace lift5 {

void set_thread_count(int n);
int thread_count();

// Runs fn(0..n-1); iterations must be independent.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace lift5
