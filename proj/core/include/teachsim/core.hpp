#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace teachsim {

using Vec = std::vector<double>;

// Raised when a caller breaks a documented precondition (wrong dimensions,
// stepping a finished episode, ...). Configuration problems use ConfigError.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Transition {
  Vec state;
  int action = 0;
  Vec next_state;

  bool operator==(const Transition&) const = default;
};

// A fixed-length run of chained transitions. Construction validates that
// next_state of step i equals state of step i + 1.
class Segment {
 public:
  Segment() = default;
  explicit Segment(std::vector<Transition> steps);

  std::size_t length() const { return steps_.size(); }
  std::span<const Transition> steps() const { return steps_; }
  const Transition& operator[](std::size_t i) const { return steps_[i]; }

  bool operator==(const Segment&) const = default;

 private:
  std::vector<Transition> steps_;
};

struct Query {
  Query() = default;
  Query(Segment first_segment, Segment second_segment);

  Segment first;
  Segment second;

  bool operator==(const Query&) const = default;
};

// Distribution over which segment of a query was preferred.
struct LabelDistribution {
  double mu1 = 0.5;
  double mu2 = 0.5;

  static LabelDistribution prefer_first() { return {1.0, 0.0}; }
  static LabelDistribution prefer_second() { return {0.0, 1.0}; }
  // Throws ContractViolation unless p lies in [0, 1].
  static LabelDistribution soft(double p);

  bool operator==(const LabelDistribution&) const = default;
};

struct PreferenceRecord {
  Query query;
  LabelDistribution label;
  int teacher_id = 0;
  std::int64_t step_collected = 0;

  bool operator==(const PreferenceRecord&) const = default;
};

// Append-only store of labelled queries; iteration is insertion order.
class PreferenceDataset {
 public:
  void append(PreferenceRecord record);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const PreferenceRecord& operator[](std::size_t i) const { return records_[i]; }
  std::span<const PreferenceRecord> records() const { return records_; }
  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }

  bool operator==(const PreferenceDataset&) const = default;

 private:
  std::vector<PreferenceRecord> records_;
};

using RewardFn = std::function<double(std::span<const double> state, int action)>;

// Sum of per-step rewards r(s_n, a_n) over the segment.
double segment_return(const Segment& segment, const RewardFn& reward);

// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);
// Inverse of format_double; accepts "nan", "inf", "-inf". Throws
// std::invalid_argument on malformed text.
double parse_double(std::string_view text);

}  // namespace teachsim
