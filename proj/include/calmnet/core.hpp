#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "calmnet/timeutil.hpp"

namespace calmnet {

using SubjectId = std::int32_t;

class ValidationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Sensor channels

enum class SensorChannel : std::uint8_t {
  Activity = 0,
  Audio = 1,
  Conversation = 2,
  PhoneCharge = 3,
  PhoneLock = 4,
};

inline constexpr int kNumChannels = 5;

inline constexpr std::array<SensorChannel, kNumChannels> kAllChannels = {
    SensorChannel::Activity, SensorChannel::Audio, SensorChannel::Conversation,
    SensorChannel::PhoneCharge, SensorChannel::PhoneLock};

/// Number of admissible category values per channel. Activity and Audio are
/// 4-valued (0 none, 1 walk/voice, 2 run/noise, 3 unknown); the rest binary.
inline constexpr int channel_cardinality(SensorChannel c) {
  constexpr std::array<int, kNumChannels> k{4, 4, 2, 2, 2};
  return k[static_cast<std::size_t>(c)];
}

/// Dataset-wide modal value per channel; used to impute missing minutes.
inline constexpr int channel_dataset_mode(SensorChannel c) {
  constexpr std::array<int, kNumChannels> k{0, 0, 0, 0, 1};
  return k[static_cast<std::size_t>(c)];
}

inline const char* channel_name(SensorChannel c) {
  constexpr std::array<const char*, kNumChannels> names{
      "activity", "audio", "conversation", "phone_charge", "phone_lock"};
  return names[static_cast<std::size_t>(c)];
}

/// Width of one hourly histogram row: 4 + 4 + 2 + 2 + 2.
inline constexpr int kHistogramColumns = 14;

/// First histogram column of a channel's category block.
inline constexpr int channel_column_offset(SensorChannel c) {
  constexpr std::array<int, kNumChannels> off{0, 4, 8, 10, 12};
  return off[static_cast<std::size_t>(c)];
}

// ---------------------------------------------------------------------------
// Core records

struct RawEvent {
  SubjectId subject = 0;
  Timestamp timestamp = 0;
  SensorChannel channel = SensorChannel::Activity;
  int value = 0;
};

struct StressReport {
  SubjectId subject = 0;
  Timestamp timestamp = 0;
  int raw_level = 0;  // self-reported, 1..5
};

enum class StressClass : int {
  BelowMedian = 0,
  Median = 1,
  AboveMedian = 2,
};

inline constexpr int kNumClasses = 3;

inline const char* stress_class_name(StressClass c) {
  constexpr std::array<const char*, kNumClasses> names{"below_median", "median",
                                                       "above_median"};
  return names[static_cast<std::size_t>(c)];
}

/// Per-example side information fed next to the sequence branch.
struct CovariateVector {
  int day_of_week = 0;                  // 0 = Monday ... 6 = Sunday
  double sleep_rating = 0.0;
  double sleep_duration = 0.0;          // hours
  int exam_period = 0;                  // {0,1}
  double time_to_next_deadline = 0.0;   // seconds

  static constexpr int kDim = 5;

  std::array<double, kDim> as_array() const {
    return {static_cast<double>(day_of_week), sleep_rating, sleep_duration,
            static_cast<double>(exam_period), time_to_next_deadline};
  }
};

struct ClassWeights {
  std::array<double, kNumClasses> w{1.0, 1.0, 1.0};

  double operator[](StressClass c) const { return w[static_cast<std::size_t>(c)]; }

  static ClassWeights unit() { return ClassWeights{}; }
};

// ---------------------------------------------------------------------------
// Operations

/// Collapses a 1..5 self-report onto the three-class scale relative to the
/// training median.
inline StressClass collapse_stress_scale(int raw_level, int median) {
  if (raw_level < 1 || raw_level > 5)
    throw ValidationError("stress level " + std::to_string(raw_level) + " outside 1..5");
  if (median < 1 || median > 5)
    throw ValidationError("stress median " + std::to_string(median) + " outside 1..5");
  if (raw_level < median) return StressClass::BelowMedian;
  if (raw_level > median) return StressClass::AboveMedian;
  return StressClass::Median;
}

/// Lower statistical median: element floor((n-1)/2) of the sorted list.
inline int dataset_median(std::vector<int> levels) {
  if (levels.empty()) throw ValidationError("median of an empty label list");
  for (int v : levels)
    if (v < 1 || v > 5)
      throw ValidationError("stress level " + std::to_string(v) + " outside 1..5");
  std::sort(levels.begin(), levels.end());
  return levels[(levels.size() - 1) / 2];
}

/// Inverse-frequency weights N / (K * n_c), before mean-1 rescaling.
inline std::array<double, kNumClasses> inverse_frequency_weights(
    const std::array<std::int64_t, kNumClasses>& counts) {
  std::int64_t total = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    if (counts[c] <= 0)
      throw ValidationError(std::string("class '") +
                            stress_class_name(static_cast<StressClass>(c)) +
                            "' has no examples; merge folds or drop the class");
    total += counts[c];
  }
  std::array<double, kNumClasses> w{};
  for (int c = 0; c < kNumClasses; ++c)
    w[c] = static_cast<double>(total) /
           (static_cast<double>(kNumClasses) * static_cast<double>(counts[c]));
  return w;
}

/// Inverse-frequency weights rescaled so their mean over classes is 1.
inline ClassWeights compute_class_weights(const std::array<std::int64_t, kNumClasses>& counts) {
  auto w = inverse_frequency_weights(counts);
  const double mean = (w[0] + w[1] + w[2]) / kNumClasses;
  ClassWeights out;
  for (int c = 0; c < kNumClasses; ++c) out.w[c] = w[c] / mean;
  return out;
}

/// Returns the event unchanged when it satisfies all invariants.
inline const RawEvent& validate_event(const RawEvent& e) {
  if (e.timestamp <= 0)
    throw ValidationError("event timestamp must be positive, got " +
                          std::to_string(e.timestamp));
  const int card = channel_cardinality(e.channel);
  if (e.value < 0 || e.value >= card)
    throw ValidationError(std::string("channel '") + channel_name(e.channel) +
                          "' admits values 0.." + std::to_string(card - 1) +
                          ", got " + std::to_string(e.value));
  return e;
}

}  // namespace calmnet
