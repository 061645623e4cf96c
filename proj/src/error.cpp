#include "gridresv/error.hpp"

namespace gridresv {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DuplicateTask: return "DuplicateTask";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::DuplicateNode: return "DuplicateNode";
    case ErrorCode::BatchInFlight: return "BatchInFlight";
    case ErrorCode::NoPendingBatch: return "NoPendingBatch";
    case ErrorCode::BatchIdMismatch: return "BatchIdMismatch";
    case ErrorCode::UnknownTaskAccepted: return "UnknownTaskAccepted";
    case ErrorCode::TaskIdMismatch: return "TaskIdMismatch";
    case ErrorCode::DuplicateAgentReply: return "DuplicateAgentReply";
    case ErrorCode::OfferForUnknownTask: return "OfferForUnknownTask";
    case ErrorCode::NoAgentsConnected: return "NoAgentsConnected";
    case ErrorCode::MalformedFrame: return "MalformedFrame";
    case ErrorCode::UnknownType: return "UnknownType";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::XmlMalformed: return "XmlMalformed";
    case ErrorCode::MissingTag: return "MissingTag";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::DuplicateTaskId: return "DuplicateTaskId";
    case ErrorCode::DuplicateNodeId: return "DuplicateNodeId";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::Transport: return "Transport";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& detail) {
  std::string msg(to_string(code));
  if (!detail.empty()) {
    msg += ": ";
    msg += detail;
  }
  return msg;
}

}  // namespace

Error::Error(ErrorCode code, std::string detail)
    : std::runtime_error(compose(code, detail)), code_(code), detail_(std::move(detail)) {}

}  // namespace gridresv
