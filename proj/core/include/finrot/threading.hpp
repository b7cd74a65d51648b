#pragma once

#include <functional>

namespace finrot {

// Worker cap for parallel_for: FINROT_THREADS when set to a positive integer
// (clamped to 64), otherwise the hardware concurrency. Read once per call so
// tests can flip the variable.
int thread_cap();

// Runs fn(0..n-1), splitting contiguous ranges over at most thread_cap()
// workers. fn must be safe to call concurrently for distinct i; the first
// exception thrown by any worker is rethrown after all of them join.
void parallel_for(int n, const std::function<void(int)>& fn);

} // namespace finrot
