#include "vmcast/error.hpp"

namespace vmcast {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::PastEvent: return "PastEvent";
    case ErrorCode::EmptyFleet: return "EmptyFleet";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::InvalidPlan: return "InvalidPlan";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::PdrUndefined: return "PdrUndefined";
    case ErrorCode::EedUndefined: return "EedUndefined";
    case ErrorCode::ThroughputUndefined: return "ThroughputUndefined";
    case ErrorCode::NrlUndefined: return "NrlUndefined";
    case ErrorCode::IncompleteMatrix: return "IncompleteMatrix";
    case ErrorCode::Io: return "Io";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
  }
  return "Unknown";
}

}  // namespace vmcast
