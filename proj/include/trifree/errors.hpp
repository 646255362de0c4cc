#pragma once

#include <stdexcept>
#include <string>

namespace trifree {

// Thrown when a request would exceed a configured resource cap (table sizes,
// truncation search limits).  Distinct from std::domain_error so callers can
// map the two failure kinds to different exit paths.
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace trifree
