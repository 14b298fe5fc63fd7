#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

#include "foliage/numerics.hpp"

namespace foliage::detail {

// parallel_for with the first worker exception carried back to the caller
template <class F>
void for_nodes(std::size_t count, F&& body) {
  std::mutex guard;
  std::exception_ptr first;
  std::atomic<bool> stop{false};
  parallel_for(count, [&](std::size_t lo, std::size_t hi) {
    try {
      for (std::size_t i = lo; i < hi; ++i) {
        if (stop.load(std::memory_order_relaxed)) return;
        body(i);
      }
    } catch (...) {
      stop.store(true, std::memory_order_relaxed);
      std::lock_guard<std::mutex> hold(guard);
      if (!first) first = std::current_exception();
    }
  });
  if (first) std::rethrow_exception(first);
}

inline std::vector<double> column_field(const Eigen::MatrixXd& m, int col) {
  std::vector<double> f(std::size_t(m.rows()));
  for (long i = 0; i < m.rows(); ++i) f[std::size_t(i)] = m(i, col);
  return f;
}

}  // namespace foliage::detail
