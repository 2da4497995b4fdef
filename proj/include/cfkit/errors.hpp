#pragma once

#include <stdexcept>

namespace cfkit {

/// Raised for problems with the data itself (malformed files, empty inputs,
/// divergent training, unknown identifiers). Distinct from usage errors so
/// callers can map it to a dedicated exit code.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cfkit
