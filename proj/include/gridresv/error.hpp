#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gridresv {

enum class ErrorCode {
  InvalidArgument,
  DuplicateTask,
  Infeasible,
  DuplicateNode,
  BatchInFlight,
  NoPendingBatch,
  BatchIdMismatch,
  UnknownTaskAccepted,
  TaskIdMismatch,
  DuplicateAgentReply,
  OfferForUnknownTask,
  NoAgentsConnected,
  MalformedFrame,
  UnknownType,
  MissingField,
  XmlMalformed,
  MissingTag,
  InvalidValue,
  DuplicateTaskId,
  DuplicateNodeId,
  EmptyBatch,
  Transport,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. `detail()` names the offending
/// field, tag or id where the code alone is not enough.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace gridresv
