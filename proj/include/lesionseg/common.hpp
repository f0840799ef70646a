#ifndef LESIONSEG_COMMON_HPP_
#define LESIONSEG_COMMON_HPP_

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace lesionseg {

inline constexpr const char* kVersion = "lesionseg 0.1.0";

// Base error carrying a stable machine-parsable code. The CLI prints
// "lesionseg: error: <CODE>: <message>" and exits nonzero.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& msg)
      : std::runtime_error(msg), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

struct ParamError : Error {
  explicit ParamError(const std::string& m) : Error("PARAM", m) {}
};
struct InputError : Error {
  explicit InputError(const std::string& m) : Error("INPUT", m) {}
};
struct UsageError : Error {
  explicit UsageError(const std::string& m) : Error("USAGE", m) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error("CONFIG", m) {}
};
struct IoError : Error {
  explicit IoError(const std::string& m) : Error("IO", m) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& m) : Error("NUMERIC", m) {}
};
struct MetricError : Error {
  explicit MetricError(const std::string& m) : Error("METRIC_UNDEFINED", m) {}
};

uint64_t fnv1a64(const void* data, std::size_t n,
                 uint64_t seed = 1469598103934665603ull);
uint64_t fnv1a64(const std::string& s);

// Seeded random stream. Worker streams are derived from (base seed, stream id)
// so per-image extraction is order-independent.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  static Rng for_stream(uint64_t base_seed, const std::string& stream_id) {
    return Rng(fnv1a64(stream_id, base_seed ^ 0x9e3779b97f4a7c15ull));
  }

  double uniform() {  // [0,1)
    return std::uniform_real_distribution<double>(0.0, 1.0)(eng_);
  }
  double uniform(double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(eng_);
  }
  int uniform_int(int n) {  // [0,n)
    return std::uniform_int_distribution<int>(0, n - 1)(eng_);
  }
  double normal(double mu = 0.0, double sigma = 1.0) {
    return std::normal_distribution<double>(mu, sigma)(eng_);
  }
  uint64_t next_u64() { return eng_(); }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace lesionseg

#endif  // LESIONSEG_COMMON_HPP_
