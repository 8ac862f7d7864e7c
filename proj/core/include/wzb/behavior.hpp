#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace wzb {

/// The ten basic vehicle behaviours. Stopping and LC are rule-assigned; the
/// remaining eight are periods of interest resolved by the classifier.
enum class BehaviorLabel : int {
  Stopping = 0,
  LC,   // straight line, constant speed
  LA,   // straight line, accelerating
  LD,   // straight line, decelerating
  TLA,  // turning left, accelerating
  TRA,
  TLC,
  TRC,
  TLD,
  TRD,
};

inline constexpr std::size_t kBehaviorCount = 10;

inline constexpr std::array<BehaviorLabel, kBehaviorCount> kAllBehaviors = {
    BehaviorLabel::Stopping, BehaviorLabel::LC,  BehaviorLabel::LA,  BehaviorLabel::LD,
    BehaviorLabel::TLA,      BehaviorLabel::TRA, BehaviorLabel::TLC, BehaviorLabel::TRC,
    BehaviorLabel::TLD,      BehaviorLabel::TRD};

inline constexpr std::array<BehaviorLabel, 8> kPoiBehaviors = {
    BehaviorLabel::LA,  BehaviorLabel::LD,  BehaviorLabel::TLA, BehaviorLabel::TRA,
    BehaviorLabel::TLC, BehaviorLabel::TRC, BehaviorLabel::TLD, BehaviorLabel::TRD};

std::string_view to_string(BehaviorLabel label);

/// Accepts the canonical names ("TLA") and the ampersand spelling ("TL&A", "L&C").
std::optional<BehaviorLabel> parse_behavior(std::string_view text);

constexpr bool is_rule_label(BehaviorLabel l) {
  return l == BehaviorLabel::Stopping || l == BehaviorLabel::LC;
}
constexpr bool is_poi_label(BehaviorLabel l) { return !is_rule_label(l); }

constexpr bool is_left_turn(BehaviorLabel l) {
  return l == BehaviorLabel::TLA || l == BehaviorLabel::TLC || l == BehaviorLabel::TLD;
}
constexpr bool is_right_turn(BehaviorLabel l) {
  return l == BehaviorLabel::TRA || l == BehaviorLabel::TRC || l == BehaviorLabel::TRD;
}

/// Left/right mirror image of a label (TLA <-> TRA); straight labels map to themselves.
BehaviorLabel mirror(BehaviorLabel l);

/// Inclusive range of sample indices on the accelerometer clock.
struct TimeInterval {
  std::size_t start_idx = 0;
  std::size_t end_idx = 0;

  std::size_t size() const { return end_idx - start_idx + 1; }
  bool contains(std::size_t i) const { return i >= start_idx && i <= end_idx; }
  friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
};

}  // namespace wzb
