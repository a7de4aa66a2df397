#pragma once

#include <cstddef>
#include <functional>
#include <string>

namespace ufl {

// Worker cap: UFL_THREADS if set (>= 1), else hardware concurrency.
int thread_count();

// Runs fn(begin, end) over [0, n) in contiguous chunks, one per worker.
// Callers must write disjoint output slots so the result does not depend
// on the chunking.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

// Writes through a temporary file in the same directory and renames it into
// place, so a failed write leaves no partial output.
void write_file_atomic(const std::string& path, const std::string& bytes);

std::string read_file(const std::string& path);

// 17-significant-digit decimal text (printf %.17g); round-trips a double exactly.
std::string format_g17(double v);

// Monotonic wall clock in milliseconds.
double now_ms();

}  // namespace ufl
