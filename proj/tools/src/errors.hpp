#pragma once

#include "gbpf/errors.hpp"

namespace gbpf::cli {

enum ExitCode : int {
  kOk = 0,
  kValidityFailure = 1,
  kUsage = 2,
  kRuntime = 3,
};

// Malformed config, missing input or columns, bad flag combination.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace gbpf::cli
