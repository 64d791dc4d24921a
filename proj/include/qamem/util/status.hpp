#pragma once

#include <stdexcept>
#include <string>

namespace qamem::util {

// Bad input, bad config, violated precondition. CLI exit code 1.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// NaN/Inf or other numeric failure discovered mid-computation. CLI exit code 2.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

inline void numeric_require(bool cond, const std::string& msg) {
  if (!cond) throw NumericError(msg);
}

}  // namespace qamem::util
