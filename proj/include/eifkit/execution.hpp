#pragma once

// Fan-out helper shared by the check suite and the Monte Carlo harness. Both
// modes run the same task bodies and store results by task index, so serial
// and parallel runs produce identical output.

#include <cstddef>
#include <exception>
#include <vector>

namespace eifkit {

enum class Execution { serial, parallel };

template <class Body>
void for_each_task(std::size_t n, Execution exec, Body&& body) {
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace eifkit
