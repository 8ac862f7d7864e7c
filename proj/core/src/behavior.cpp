#include "wzb/behavior.hpp"

#include <string>

namespace wzb {

std::string_view to_string(BehaviorLabel label) {
  switch (label) {
    case BehaviorLabel::Stopping: return "Stopping";
    case BehaviorLabel::LC: return "LC";
    case BehaviorLabel::LA: return "LA";
    case BehaviorLabel::LD: return "LD";
    case BehaviorLabel::TLA: return "TLA";
    case BehaviorLabel::TRA: return "TRA";
    case BehaviorLabel::TLC: return "TLC";
    case BehaviorLabel::TRC: return "TRC";
    case BehaviorLabel::TLD: return "TLD";
    case BehaviorLabel::TRD: return "TRD";
  }
  return "?";
}

std::optional<BehaviorLabel> parse_behavior(std::string_view text) {
  std::string compact;
  for (char c : text) {
    if (c != '&' && c != ' ') compact.push_back(c);
  }
  for (BehaviorLabel l : kAllBehaviors) {
    if (compact == to_string(l)) return l;
  }
  return std::nullopt;
}

BehaviorLabel mirror(BehaviorLabel l) {
  switch (l) {
    case BehaviorLabel::TLA: return BehaviorLabel::TRA;
    case BehaviorLabel::TRA: return BehaviorLabel::TLA;
    case BehaviorLabel::TLC: return BehaviorLabel::TRC;
    case BehaviorLabel::TRC: return BehaviorLabel::TLC;
    case BehaviorLabel::TLD: return BehaviorLabel::TRD;
    case BehaviorLabel::TRD: return BehaviorLabel::TLD;
    default: return l;
  }
}

}  // namespace wzb
