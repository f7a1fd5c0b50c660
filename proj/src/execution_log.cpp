#include "laserplan/execution_log.hpp"

#include <algorithm>

namespace laserplan {

std::size_t ExecutionLog::observation_count() const {
  return static_cast<std::size_t>(
      std::count_if(rounds.begin(), rounds.end(), [](const RoundRecord& r) { return r.observed_hash.has_value(); }));
}

}  // namespace laserplan
