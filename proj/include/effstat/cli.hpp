#pragma once

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "effstat/estimators.hpp"

namespace effstat::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDomain = 3;

/// Bad flags, grids, distribution specs or input files.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// "log:a:b:N", "lin:a:b:N" or a comma-separated list.
std::vector<double> parse_grid(std::string_view spec);

/// CSV with header "weight,success" or "weight,success,x"; success is 0 or 1.
WeightedObservations read_events(std::istream& in);

/// Runs the tool. Results go to `out` unless --output names a file.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace effstat::cli
