#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "calmnet/core.hpp"
#include "calmnet/csv.hpp"
#include "calmnet/location.hpp"
#include "calmnet/timeutil.hpp"

namespace calmnet {

/// Collects notes about imputations and skipped records during a build; the
/// CLI prints them, tests inspect them.
struct BuildLog {
  std::vector<std::string> lines;
  void note(std::string s) { lines.push_back(std::move(s)); }
};

struct SleepRecord {
  double rating = 0.0;
  double duration_hours = 0.0;
};

/// Half-open [start, end) interval of UTC timestamps.
struct ExamInterval {
  Timestamp start = 0;
  Timestamp end = 0;

  bool contains(Timestamp t) const { return t >= start && t < end; }
};

/// Everything one study cohort recorded. Events and reports are kept in flat
/// vectors sorted by (subject, timestamp); per-subject containers are sorted
/// maps so iteration order is deterministic everywhere.
struct CohortDataset {
  std::vector<RawEvent> events;
  std::vector<StressReport> stress_reports;
  std::map<SubjectId, std::vector<Timestamp>> deadlines;
  std::map<SubjectId, std::map<DayIndex, SleepRecord>> sleep_records;
  std::map<SubjectId, std::vector<GpsPoint>> gps_points;
  std::vector<ExamInterval> exam_periods;

  std::vector<SubjectId> subjects() const {
    std::set<SubjectId> s;
    for (const auto& r : stress_reports) s.insert(r.subject);
    return {s.begin(), s.end()};
  }

  std::map<SubjectId, std::int64_t> label_counts() const {
    std::map<SubjectId, std::int64_t> counts;
    for (const auto& r : stress_reports) ++counts[r.subject];
    return counts;
  }

  void validate() const {
    std::set<SubjectId> sensed;
    for (const auto& e : events) sensed.insert(e.subject);
    for (const auto& [s, pts] : gps_points)
      if (!pts.empty()) sensed.insert(s);
    for (const auto& r : stress_reports)
      if (!sensed.count(r.subject))
        throw ValidationError("subject " + std::to_string(r.subject) +
                              " has stress reports but no sensor or gps data");
    for (std::size_t i = 1; i < events.size(); ++i)
      if (events[i - 1].subject == events[i].subject &&
          events[i - 1].timestamp > events[i].timestamp)
        throw ValidationError("events not sorted by (subject, timestamp)");
    for (const auto& [s, ds] : deadlines)
      if (!std::is_sorted(ds.begin(), ds.end()))
        throw ValidationError("deadlines for subject " + std::to_string(s) +
                              " not sorted");
    for (const auto& [s, pts] : gps_points)
      for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i - 1].timestamp > pts[i].timestamp)
          throw ValidationError("gps points for subject " + std::to_string(s) +
                                " not sorted");
  }
};

namespace detail {

inline void sort_events(std::vector<RawEvent>& events) {
  std::sort(events.begin(), events.end(), [](const RawEvent& a, const RawEvent& b) {
    if (a.subject != b.subject) return a.subject < b.subject;
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    if (a.channel != b.channel) return a.channel < b.channel;
    return a.value < b.value;
  });
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CSV loaders. One file per channel, header row, Unix line endings.

/// `subject_id,timestamp,value` rows for one channel, validated and sorted by
/// (subject, timestamp).
inline std::vector<RawEvent> load_events_csv(const std::filesystem::path& path,
                                             SensorChannel channel) {
  CsvReader reader(path, {"subject_id", "timestamp", "value"});
  std::vector<RawEvent> events;
  std::vector<std::string> f;
  while (reader.next(f)) {
    RawEvent e;
    e.subject = static_cast<SubjectId>(reader.to_int(f[0]));
    e.timestamp = reader.to_int(f[1]);
    e.channel = channel;
    e.value = static_cast<int>(reader.to_int(f[2]));
    try {
      validate_event(e);
    } catch (const ValidationError& err) {
      throw CsvError(path, reader.line(), err.what());
    }
    events.push_back(e);
  }
  detail::sort_events(events);
  return events;
}

/// `subject_id,timestamp,level` rows; duplicate (subject, timestamp) pairs
/// are an error rather than silently deduplicated.
inline std::vector<StressReport> load_stress_reports(const std::filesystem::path& path) {
  CsvReader reader(path, {"subject_id", "timestamp", "level"});
  std::vector<StressReport> reports;
  std::vector<std::string> f;
  while (reader.next(f)) {
    StressReport r;
    r.subject = static_cast<SubjectId>(reader.to_int(f[0]));
    r.timestamp = reader.to_int(f[1]);
    r.raw_level = static_cast<int>(reader.to_int(f[2]));
    if (r.timestamp <= 0)
      throw CsvError(path, reader.line(), "timestamp must be positive");
    if (r.raw_level < 1 || r.raw_level > 5)
      throw CsvError(path, reader.line(),
                     "stress level " + std::to_string(r.raw_level) + " outside 1..5");
    reports.push_back(r);
  }
  std::sort(reports.begin(), reports.end(), [](const StressReport& a, const StressReport& b) {
    if (a.subject != b.subject) return a.subject < b.subject;
    return a.timestamp < b.timestamp;
  });
  for (std::size_t i = 1; i < reports.size(); ++i)
    if (reports[i - 1].subject == reports[i].subject &&
        reports[i - 1].timestamp == reports[i].timestamp)
      throw ValidationError("duplicate stress report for subject " +
                            std::to_string(reports[i].subject) + " at timestamp " +
                            std::to_string(reports[i].timestamp) + " in '" +
                            path.string() + "'");
  return reports;
}

/// `subject_id,timestamp` rows.
inline std::map<SubjectId, std::vector<Timestamp>> load_deadlines(
    const std::filesystem::path& path) {
  CsvReader reader(path, {"subject_id", "timestamp"});
  std::map<SubjectId, std::vector<Timestamp>> out;
  std::vector<std::string> f;
  while (reader.next(f))
    out[static_cast<SubjectId>(reader.to_int(f[0]))].push_back(reader.to_int(f[1]));
  for (auto& [s, v] : out) std::sort(v.begin(), v.end());
  return out;
}

/// `subject_id,date,rating,duration_hours` rows, date as YYYY-MM-DD.
inline std::map<SubjectId, std::map<DayIndex, SleepRecord>> load_sleep(
    const std::filesystem::path& path) {
  CsvReader reader(path, {"subject_id", "date", "rating", "duration_hours"});
  std::map<SubjectId, std::map<DayIndex, SleepRecord>> out;
  std::vector<std::string> f;
  while (reader.next(f)) {
    const auto subject = static_cast<SubjectId>(reader.to_int(f[0]));
    DayIndex day;
    try {
      day = parse_date(f[1]);
    } catch (const std::exception& e) {
      throw CsvError(path, reader.line(), e.what());
    }
    out[subject][day] = SleepRecord{reader.to_double(f[2]), reader.to_double(f[3])};
  }
  return out;
}

/// `subject_id,timestamp,lat,lon` rows, sorted per subject.
inline std::map<SubjectId, std::vector<GpsPoint>> load_gps(
    const std::filesystem::path& path) {
  CsvReader reader(path, {"subject_id", "timestamp", "lat", "lon"});
  std::map<SubjectId, std::vector<GpsPoint>> out;
  std::vector<std::string> f;
  while (reader.next(f)) {
    const auto subject = static_cast<SubjectId>(reader.to_int(f[0]));
    GpsPoint p{reader.to_int(f[1]), reader.to_double(f[2]), reader.to_double(f[3])};
    try {
      validate_gps(p);
    } catch (const ValidationError& e) {
      throw CsvError(path, reader.line(), e.what());
    }
    out[subject].push_back(p);
  }
  for (auto& [s, v] : out)
    std::sort(v.begin(), v.end(),
              [](const GpsPoint& a, const GpsPoint& b) { return a.timestamp < b.timestamp; });
  return out;
}

/// `start,end` rows of UTC timestamps.
inline std::vector<ExamInterval> load_exam_periods(const std::filesystem::path& path) {
  CsvReader reader(path, {"start", "end"});
  std::vector<ExamInterval> out;
  std::vector<std::string> f;
  while (reader.next(f)) {
    ExamInterval iv{reader.to_int(f[0]), reader.to_int(f[1])};
    if (iv.end < iv.start)
      throw CsvError(path, reader.line(), "interval end before start");
    out.push_back(iv);
  }
  std::sort(out.begin(), out.end(),
            [](const ExamInterval& a, const ExamInterval& b) { return a.start < b.start; });
  return out;
}

inline const std::map<SensorChannel, const char*>& channel_files() {
  static const std::map<SensorChannel, const char*> files = {
      {SensorChannel::Activity, "activity.csv"},
      {SensorChannel::Audio, "audio.csv"},
      {SensorChannel::Conversation, "conversation.csv"},
      {SensorChannel::PhoneCharge, "phone_charge.csv"},
      {SensorChannel::PhoneLock, "phone_lock.csv"},
  };
  return files;
}

/// Loads a cohort directory. The five channel files and stress.csv are
/// required; deadlines.csv, sleep.csv, gps.csv and exam_periods.csv are
/// optional and default to empty.
inline CohortDataset load_cohort(const std::filesystem::path& dir, BuildLog* log = nullptr) {
  CohortDataset d;
  for (const auto& [channel, file] : channel_files()) {
    auto events = load_events_csv(dir / file, channel);
    d.events.insert(d.events.end(), events.begin(), events.end());
  }
  detail::sort_events(d.events);
  d.stress_reports = load_stress_reports(dir / "stress.csv");
  const auto optional = [&](const char* file, auto loader, auto& target) {
    const auto path = dir / file;
    if (std::filesystem::exists(path)) {
      target = loader(path);
    } else if (log) {
      log->note(std::string(file) + " not found; continuing without it");
    }
  };
  optional("deadlines.csv", load_deadlines, d.deadlines);
  optional("sleep.csv", load_sleep, d.sleep_records);
  optional("gps.csv", load_gps, d.gps_points);
  optional("exam_periods.csv", load_exam_periods, d.exam_periods);
  d.validate();
  return d;
}

// ---------------------------------------------------------------------------
// CSV writers (used by the synth command and fixtures).

inline void write_cohort_csv(const CohortDataset& d, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [channel, file] : channel_files()) {
    std::ofstream out(dir / file);
    out << "subject_id,timestamp,value\n";
    for (const auto& e : d.events)
      if (e.channel == channel)
        out << e.subject << ',' << e.timestamp << ',' << e.value << '\n';
  }
  {
    std::ofstream out(dir / "stress.csv");
    out << "subject_id,timestamp,level\n";
    for (const auto& r : d.stress_reports)
      out << r.subject << ',' << r.timestamp << ',' << r.raw_level << '\n';
  }
  {
    std::ofstream out(dir / "deadlines.csv");
    out << "subject_id,timestamp\n";
    for (const auto& [s, ds] : d.deadlines)
      for (Timestamp t : ds) out << s << ',' << t << '\n';
  }
  {
    std::ofstream out(dir / "sleep.csv");
    out << "subject_id,date,rating,duration_hours\n";
    for (const auto& [s, days] : d.sleep_records)
      for (const auto& [day, rec] : days)
        out << s << ',' << format_date(day) << ',' << format_double(rec.rating) << ','
            << format_double(rec.duration_hours) << '\n';
  }
  {
    std::ofstream out(dir / "gps.csv");
    out << "subject_id,timestamp,lat,lon\n";
    for (const auto& [s, pts] : d.gps_points)
      for (const auto& p : pts)
        out << s << ',' << p.timestamp << ',' << format_double(p.lat) << ','
            << format_double(p.lon) << '\n';
  }
  {
    std::ofstream out(dir / "exam_periods.csv");
    out << "start,end\n";
    for (const auto& iv : d.exam_periods) out << iv.start << ',' << iv.end << '\n';
  }
}

// ---------------------------------------------------------------------------
// Cohort filtering

/// Keeps subjects with strictly more than `min_labels` stress reports that
/// are not in `exclude`; drops all their records otherwise. Idempotent.
inline CohortDataset filter_students(const CohortDataset& d, int min_labels = 40,
                                     const std::set<SubjectId>& exclude = {59}) {
  const auto counts = d.label_counts();
  std::set<SubjectId> keep;
  for (const auto& [s, n] : counts)
    if (n > min_labels && !exclude.count(s)) keep.insert(s);

  CohortDataset out;
  for (const auto& e : d.events)
    if (keep.count(e.subject)) out.events.push_back(e);
  for (const auto& r : d.stress_reports)
    if (keep.count(r.subject)) out.stress_reports.push_back(r);
  for (const auto& [s, v] : d.deadlines)
    if (keep.count(s)) out.deadlines.emplace(s, v);
  for (const auto& [s, v] : d.sleep_records)
    if (keep.count(s)) out.sleep_records.emplace(s, v);
  for (const auto& [s, v] : d.gps_points)
    if (keep.count(s)) out.gps_points.emplace(s, v);
  out.exam_periods = d.exam_periods;
  return out;
}

}  // namespace calmnet
