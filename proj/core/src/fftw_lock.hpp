#pragma once

#include <mutex>

namespace spca::detail {

// FFTW plan creation and destruction are not thread-safe; every call site shares this lock.
std::mutex& fftw_planner_mutex();

}  // namespace spca::detail
