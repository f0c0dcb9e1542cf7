#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace aoi {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Query or action outside the admissible state/action set.
class InadmissibleError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IterationLimitError : public Error {
 public:
  IterationLimitError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// The induced chain has no stationary regime containing (1,0), e.g. a policy
// that stops transmitting and lets the age drift to the truncation boundary.
class NoStationaryError : public Error {
 public:
  using Error::Error;
};

struct SearchStep {
  int step;
  double eta;
  double cost;
  double aoi;
  double gain;
};

class SearchFailure : public Error {
 public:
  SearchFailure(const std::string& what, std::vector<SearchStep> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<SearchStep>& trace() const { return trace_; }

 private:
  std::vector<SearchStep> trace_;
};

class BracketError : public Error {
 public:
  using Error::Error;
};

class ProtocolViolation : public Error {
 public:
  ProtocolViolation(const std::string& what, long long slot)
      : Error(what), slot_(slot) {}
  long long slot() const { return slot_; }

 private:
  long long slot_;
};

}  // namespace aoi
