#pragma once

namespace zd {

/// Applies DISPATCH_THREADS (a positive integer) as the OpenMP thread cap.
/// Returns the thread count now in effect.
int apply_thread_limit_from_env();

int max_threads();

}  // namespace zd
