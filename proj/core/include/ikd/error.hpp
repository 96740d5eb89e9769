#pragma once

#include <stdexcept>
#include <string>

namespace ikd {

enum class ErrorKind {
  kDomain,           // argument outside the valid range of a function
  kConfig,           // invalid parameters supplied by the caller
  kData,             // malformed or inconsistent input data
  kDegenerate,       // input carries no usable signal (e.g. zero variance)
  kConvergence,      // an iterative solver ran out of budget
  kDisconnected,     // thresholded covariance graph has several components
  kMergeStarvation,  // blockwise merge cannot find a clique with enough overlap
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  bool is_numerical() const noexcept {
    return kind_ == ErrorKind::kDegenerate || kind_ == ErrorKind::kConvergence ||
           kind_ == ErrorKind::kDisconnected ||
           kind_ == ErrorKind::kMergeStarvation || kind_ == ErrorKind::kDomain;
  }

 private:
  ErrorKind kind_;
};

}  // namespace ikd
