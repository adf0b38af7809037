#pragma once

#include <stdexcept>
#include <string>

namespace spanreg {

// Violated precondition on a public operation (bad n/r combination,
// malformed input graph, out-of-range parameter). Callers that feed
// user input should catch this; internal code treats it as a bug filter.
class domain_error : public std::runtime_error {
 public:
  explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// A constructive stage that could not complete on the given instance.
// Not an exception: stage failures are expected outputs at desk scale
// and must carry a machine-readable witness.
struct StageFailure {
  std::string stage;    // which pipeline stage / solver step
  std::string reason;   // human-readable diagnosis
  std::string witness;  // serialized evidence (vertex ids, counts, ...)
};

}  // namespace spanreg
