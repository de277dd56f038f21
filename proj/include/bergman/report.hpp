#pragma once

// Serialization helpers shared by the modules and the CLI, plus the small
// deterministic parallel loop used by sampling sweeps.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace bergman {

using Json = nlohmann::ordered_json;

/// %.17g, with inf/nan spelled the way JSON consumers tolerate in strings.
std::string format_double(double x);

/// A CSV table with a fixed header; rows are written in insertion order.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  void write(std::ostream& os) const;
};

/// JSON text with stable key order and 17-significant-digit floats.
std::string dump_json(const Json& j);

/// Worker count: BERGMANLAB_THREADS if set, else hardware concurrency.
unsigned thread_count();

/// Runs body(i) for i in [0, n) over contiguous chunks. Results must be
/// written to per-index slots so output is independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace bergman
