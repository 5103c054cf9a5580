#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace selftimed::tm {

using Bits = std::vector<bool>;

class SizeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Compare : std::uint8_t { Greater, Equal, Less };
enum class Decision : std::uint8_t { InClass, NotInClass };

std::string_view to_string(Compare c);
std::string_view to_string(Decision d);

/// Inference-side view of a single-class Tsetlin Machine: the automata are
/// reduced to their exclude actions.
struct TmConfig {
  std::size_t features = 0;      // F
  std::size_t clauses = 0;       // C, even
  std::vector<Bits> exclude;     // C rows of 2F bits; [2m] gates f[m], [2m+1] gates !f[m]
  std::vector<int> polarity;     // +1 / -1 per clause

  /// Clauses 0..C/2-1 vote positively, the rest negatively.
  static TmConfig first_half_positive(std::size_t features, std::size_t clauses);
  void validate() const;
  std::size_t literals() const { return 2 * features; }
};

struct InferenceResult {
  Bits clause_bits;
  std::size_t pos_count = 0;
  std::size_t neg_count = 0;
  Compare outcome = Compare::Equal;
  Decision decision = Decision::InClass;
};

bool clause_eval(const Bits& features, const Bits& exclude_row);
InferenceResult infer(const Bits& features, const TmConfig& config);
std::size_t popcount_oracle(const Bits& bits);
Compare compare_oracle(std::uint64_t a, std::uint64_t b);
/// Ties go to the class.
Decision decide(Compare c);

/// Hex with the highest-index bit as the most significant digit.
std::string bits_to_hex(const Bits& bits);
Bits hex_to_bits(std::string_view hex, std::size_t width);
Bits uint_to_bits(std::uint64_t v, std::size_t width);

nlohmann::json to_json(const TmConfig& c);
TmConfig config_from_json(const nlohmann::json& j);
TmConfig load_config(const std::string& path);
/// One hex feature vector per line; blank lines and '#' comments skipped.
std::vector<Bits> parse_stimulus(std::string_view text, std::size_t features);

}  // namespace selftimed::tm
