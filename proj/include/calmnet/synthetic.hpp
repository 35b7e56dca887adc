#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "calmnet/ingestion.hpp"
#include "calmnet/rng.hpp"

namespace calmnet {

/// Knobs for the generated benchmark cohort. The generator plants a hidden
/// per-student mapping from daily activity intensity to the stress label, so
/// that models which personalize can exploit structure a single shared model
/// cannot.
struct SyntheticSpec {
  std::uint64_t seed = 1;
  int n_students = 23;
  int days_per_student = 50;
  int labels_per_student = 50;
  /// 0: the intensity->label mapping is identical for every student;
  /// 1: mappings cycle through all permutations of the intensity bands.
  double personalization_strength = 1.0;

  void validate() const {
    if (n_students < 1 || days_per_student < 1 || labels_per_student < 1)
      throw ValidationError("synthetic spec: counts must be positive");
    if (labels_per_student < 41)
      throw ValidationError(
          "synthetic spec: labels_per_student must be at least 41 so the cohort "
          "survives the label-count filter");
    if (personalization_strength < 0.0 || personalization_strength > 1.0)
      throw ValidationError("synthetic spec: personalization_strength must be in [0,1]");
  }
};

/// Intensity band -> stress class, one entry per band.
using LabelMapping = std::array<int, 3>;

namespace detail {

inline constexpr std::array<LabelMapping, 6> kPermutations{{
    {0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {0, 2, 1}, {1, 0, 2}, {2, 1, 0},
}};

// Per-band minute probabilities: how often a minute is "on" for the band.
inline constexpr std::array<double, 3> kActivityOn{0.15, 0.45, 0.80};
inline constexpr std::array<double, 3> kAudioOn{0.20, 0.50, 0.75};
inline constexpr std::array<double, 3> kConversationOn{0.10, 0.35, 0.70};

}  // namespace detail

/// The hidden per-student mapping tables, exposed for inspection. At strength
/// 0 every student shares the identity mapping; at strength 1 students cycle
/// through all six band permutations.
inline std::vector<LabelMapping> synthetic_label_mappings(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng = Rng(spec.seed).fork(0x6d617070);
  std::vector<LabelMapping> mappings;
  mappings.reserve(static_cast<std::size_t>(spec.n_students));
  std::size_t next_perm = 0;
  for (int s = 0; s < spec.n_students; ++s) {
    const bool personalized = spec.personalization_strength >= 1.0
                                  ? true
                                  : rng.bernoulli(spec.personalization_strength);
    if (personalized)
      mappings.push_back(detail::kPermutations[next_perm++ % detail::kPermutations.size()]);
    else
      mappings.push_back(detail::kPermutations[0]);
  }
  return mappings;
}

/// Deterministic synthetic cohort. Every labeled day gets a full day of
/// sensor events whose hourly intensity follows the day's band, GPS points,
/// a sleep record, and one or more stress reports; labels are the student's
/// mapping applied to the band, emitted on the raw 2/3/4 scale so a balanced
/// cohort collapses back to the intended classes under the global median.
inline CohortDataset generate_synthetic_cohort(const SyntheticSpec& spec) {
  spec.validate();
  const std::vector<LabelMapping> mappings = synthetic_label_mappings(spec);
  const int utc_offset = kDefaultUtcOffsetHours;
  const DayIndex base_day = days_from_civil(2013, 4, 1);

  CohortDataset d;
  const Rng master(spec.seed);

  // One cohort-wide exam window in the back third of the span.
  {
    const DayIndex exam_first = base_day + (2 * spec.days_per_student) / 3;
    d.exam_periods.push_back(ExamInterval{day_start_utc(exam_first, utc_offset),
                                          day_start_utc(exam_first + 5, utc_offset)});
  }

  for (int s = 0; s < spec.n_students; ++s) {
    const SubjectId subject = static_cast<SubjectId>(s + 1);
    Rng rng = master.fork(0x1000 + static_cast<std::uint64_t>(s));

    // Labels cycle through the days in order, so exactly the first
    // min(labels, days) days carry labels.
    std::vector<int> labels_on_day(static_cast<std::size_t>(spec.days_per_student), 0);
    for (int j = 0; j < spec.labels_per_student; ++j)
      ++labels_on_day[static_cast<std::size_t>(j % spec.days_per_student)];
    const std::size_t labeled_days =
        static_cast<std::size_t>(std::min(spec.labels_per_student, spec.days_per_student));

    // Band per labeled day: balanced cycle, order shuffled per student, so
    // every band (and therefore every class) occurs for every student.
    std::vector<int> band(static_cast<std::size_t>(spec.days_per_student), 0);
    for (std::size_t i = 0; i < labeled_days; ++i) band[i] = static_cast<int>(i % 3);
    std::vector<int> prefix(band.begin(), band.begin() + static_cast<std::ptrdiff_t>(labeled_days));
    rng.shuffle(prefix);
    std::copy(prefix.begin(), prefix.end(), band.begin());

    // Deadlines roughly weekly at 23:00 local.
    for (int day = 4; day < spec.days_per_student;
         day += 6 + static_cast<int>(rng.uniform_int(0, 2)))
      d.deadlines[subject].push_back(day_start_utc(base_day + day, utc_offset) + 23 * 3600);

    GpsPoint home{0, 43.70 + 0.002 * rng.normal(), -72.29 + 0.002 * rng.normal()};

    for (int day = 0; day < spec.days_per_student; ++day) {
      if (labels_on_day[static_cast<std::size_t>(day)] == 0) continue;
      const int z = band[static_cast<std::size_t>(day)];
      const Timestamp day_start = day_start_utc(base_day + day, utc_offset);

      // Sensor events. "On" minutes always emit; "off" minutes emit
      // sparsely and imputation covers the rest. A burst minute carries
      // 2..6 readings, i.e. sampling periods from 10 s up to one minute.
      const auto emit_minutes = [&](SensorChannel channel, double p_on, int on_value,
                                    int off_value) {
        for (int minute = 0; minute < kMinutesPerDay; ++minute) {
          const bool on = rng.bernoulli(p_on);
          if (!on && !rng.bernoulli(0.25)) continue;
          int value = on ? on_value : off_value;
          if (channel == SensorChannel::Activity && on && rng.bernoulli(0.3)) value = 2;
          if (channel == SensorChannel::Audio && on && rng.bernoulli(0.25)) value = 2;
          const int readings = rng.bernoulli(0.15)
                                   ? static_cast<int>(rng.uniform_int(2, 6))
                                   : 1;
          const Timestamp minute_start = day_start + static_cast<Timestamp>(minute) * 60;
          for (int r = 0; r < readings; ++r)
            d.events.push_back(RawEvent{subject, minute_start + r * (60 / readings),
                                        channel, value});
        }
      };
      emit_minutes(SensorChannel::Activity, detail::kActivityOn[static_cast<std::size_t>(z)], 1, 0);
      emit_minutes(SensorChannel::Audio, detail::kAudioOn[static_cast<std::size_t>(z)], 1, 0);
      emit_minutes(SensorChannel::Conversation,
                   detail::kConversationOn[static_cast<std::size_t>(z)], 1, 0);
      emit_minutes(SensorChannel::PhoneCharge, 0.18, 1, 0);
      emit_minutes(SensorChannel::PhoneLock, 0.55, 1, 0);

      // GPS: a slow random walk from home, one point every ~24 minutes.
      {
        GpsPoint p = home;
        for (int i = 0; i < 60; ++i) {
          p.timestamp = day_start + static_cast<Timestamp>(i) * 1440 +
                        rng.uniform_int(0, 300);
          const double north_m = rng.normal(0.0, 40.0);
          const double east_m = rng.normal(0.0, 40.0);
          p.lat += north_m / 111320.0;
          p.lon += east_m / (111320.0 * std::cos(p.lat * kPi / 180.0));
          d.gps_points[subject].push_back(p);
        }
      }

      d.sleep_records[subject][base_day + day] =
          SleepRecord{static_cast<double>(rng.uniform_int(1, 4)),
                      std::clamp(rng.normal(7.0, 1.2), 3.0, 11.0)};

      // Stress reports for this day, 17 s apart from 20:00 local.
      const int band_class = mappings[static_cast<std::size_t>(s)][static_cast<std::size_t>(z)];
      for (int r = 0; r < labels_on_day[static_cast<std::size_t>(day)]; ++r)
        d.stress_reports.push_back(StressReport{
            subject, day_start + 20 * 3600 + static_cast<Timestamp>(r) * 17,
            2 + band_class});
    }
  }

  detail::sort_events(d.events);
  std::sort(d.stress_reports.begin(), d.stress_reports.end(),
            [](const StressReport& a, const StressReport& b) {
              if (a.subject != b.subject) return a.subject < b.subject;
              return a.timestamp < b.timestamp;
            });
  d.validate();
  return d;
}

}  // namespace calmnet
