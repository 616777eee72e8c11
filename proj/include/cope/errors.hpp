#pragma once

#include <stdexcept>
#include <string>

namespace cope {

/// Malformed external input (scale-table files, CSV read-back).
class format_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation not valid for the current state of a value (e.g. rebasing a
/// table that was not generated from a base).
class invalid_state : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace detail
}  // namespace cope
