#include "teachsim/core.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <system_error>
#include <utility>

#include "teachsim/rng.hpp"

namespace teachsim {

Segment::Segment(std::vector<Transition> steps) : steps_(std::move(steps)) {
  if (steps_.empty()) throw ContractViolation("segment must contain at least one step");
  const std::size_t dim = steps_.front().state.size();
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    const Transition& t = steps_[i];
    if (t.state.size() != dim || t.next_state.size() != dim) {
      throw ContractViolation("segment step " + std::to_string(i) + " has inconsistent dimensions");
    }
    if (i + 1 < steps_.size() && t.next_state != steps_[i + 1].state) {
      throw ContractViolation("segment steps " + std::to_string(i) + " and " +
                              std::to_string(i + 1) + " do not chain");
    }
  }
}

Query::Query(Segment first_segment, Segment second_segment)
    : first(std::move(first_segment)), second(std::move(second_segment)) {
  if (first.length() != second.length()) {
    throw ContractViolation("query segments differ in length");
  }
}

LabelDistribution LabelDistribution::soft(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ContractViolation("label probability outside [0, 1]");
  return {p, 1.0 - p};
}

void PreferenceDataset::append(PreferenceRecord record) {
  if (record.teacher_id < 0) throw ContractViolation("negative teacher id");
  records_.push_back(std::move(record));
}

double segment_return(const Segment& segment, const RewardFn& reward) {
  double total = 0.0;
  for (const Transition& t : segment.steps()) total += reward(t.state, t.action);
  return total;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("format_double: to_chars failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return value;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed),
      stream_id_(stream_id),
      engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream_id + 0x632be59bd9b4e019ULL))) {}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

int RngStream::uniform_int(int n) {
  if (n <= 0) throw ContractViolation("uniform_int needs a positive bound");
  // Rejection sampling keeps the draw unbiased and portable.
  const auto bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    const std::uint64_t x = engine_();
    if (x < limit) return static_cast<int>(x % bound);
  }
}

double RngStream::normal() {
  // Box-Muller on our own uniforms so the sequence does not depend on the
  // standard library's distribution implementation.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

RngStream RngStream::split(std::uint64_t child_id) {
  return RngStream(next_u64(), child_id);
}

}  // namespace teachsim
