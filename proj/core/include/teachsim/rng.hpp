#pragma once

#include <cstdint>
#include <random>

namespace teachsim {

// Named sub-streams derived from a run's root seed. Each consumer owns one
// stream so adding draws in one place never shifts another's sequence.
enum class Stream : std::uint64_t {
  kEnv = 1,
  kTeachers = 2,
  kSampler = 3,
  kLearner = 4,
  kModelInit = 5,
  kEvaluation = 6,
  kRollout = 7,
  kTraining = 8,
};

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);
  RngStream(std::uint64_t seed, Stream stream)
      : RngStream(seed, static_cast<std::uint64_t>(stream)) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer on [0, n). n must be positive.
  int uniform_int(int n);
  bool bernoulli(double p) { return uniform() < p; }
  double normal();

  // Child stream keyed on a fresh draw from this one.
  RngStream split(std::uint64_t child_id);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace teachsim
