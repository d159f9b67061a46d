#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace capsp {

enum class ErrorKind {
  kParse,
  kMissingReverseEdge,
  kSelfLoop,
  kWeightOutOfRange,
  kDuplicateEdge,
  kNodeOutOfRange,
  kBitRangeViolation,
  kBandwidthViolation,
  kNonQuiescent,
  kDisconnected,
  kNegativeReducedWeight,
  kNoValidParent,
  kTooLarge,
  kBadSpec,
  kVerificationFailed,
  kInvalidArgument,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "Parse";
    case ErrorKind::kMissingReverseEdge: return "MissingReverseEdge";
    case ErrorKind::kSelfLoop: return "SelfLoop";
    case ErrorKind::kWeightOutOfRange: return "WeightOutOfRange";
    case ErrorKind::kDuplicateEdge: return "DuplicateEdge";
    case ErrorKind::kNodeOutOfRange: return "NodeOutOfRange";
    case ErrorKind::kBitRangeViolation: return "BitRangeViolation";
    case ErrorKind::kBandwidthViolation: return "BandwidthViolation";
    case ErrorKind::kNonQuiescent: return "NonQuiescent";
    case ErrorKind::kDisconnected: return "Disconnected";
    case ErrorKind::kNegativeReducedWeight: return "NegativeReducedWeight";
    case ErrorKind::kNoValidParent: return "NoValidParent";
    case ErrorKind::kTooLarge: return "TooLarge";
    case ErrorKind::kBadSpec: return "BadSpec";
    case ErrorKind::kVerificationFailed: return "VerificationFailed";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace capsp
