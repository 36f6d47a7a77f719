#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace socnav {

/// Per-episode navigation measurements.
struct EpisodeMetrics {
  bool completed = false;
  double elapsed = 0.0;         // s
  double final_distance = 0.0;  // m, robot center to goal
  std::optional<double> min_ped_distance;  // m, surface to surface
  std::int64_t ped_collisions = 0;
  std::int64_t static_collisions = 0;
  bool aborted = false;
  std::string abort_reason;

  std::int64_t total_collisions() const { return ped_collisions + static_collisions; }
  bool operator==(const EpisodeMetrics&) const = default;
};

}  // namespace socnav
