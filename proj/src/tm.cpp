#include "selftimed/tm.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace selftimed::tm {

std::string_view to_string(Compare c) {
  switch (c) {
    case Compare::Greater: return "GREATER";
    case Compare::Equal: return "EQUAL";
    default: return "LESS";
  }
}

std::string_view to_string(Decision d) {
  return d == Decision::InClass ? "IN_CLASS" : "NOT_IN_CLASS";
}

TmConfig TmConfig::first_half_positive(std::size_t features, std::size_t clauses) {
  TmConfig c;
  c.features = features;
  c.clauses = clauses;
  c.exclude.assign(clauses, Bits(2 * features, true));
  for (std::size_t j = 0; j < clauses; ++j) c.polarity.push_back(j < clauses / 2 ? +1 : -1);
  return c;
}

void TmConfig::validate() const {
  if (features < 1) throw std::invalid_argument("TmConfig: F must be >= 1");
  if (clauses < 2 || clauses % 2 != 0) throw std::invalid_argument("TmConfig: C must be even and >= 2");
  if (exclude.size() != clauses) throw SizeMismatch("TmConfig: exclude needs one row per clause");
  for (const auto& row : exclude)
    if (row.size() != literals()) throw SizeMismatch("TmConfig: exclude rows must have 2F bits");
  if (polarity.size() != clauses) throw SizeMismatch("TmConfig: polarity needs one entry per clause");
  std::size_t positive = 0;
  for (int p : polarity) {
    if (p != 1 && p != -1) throw std::invalid_argument("TmConfig: polarity must be +1 or -1");
    positive += p == 1;
  }
  if (positive != clauses / 2) throw std::invalid_argument("TmConfig: exactly C/2 clauses must be positive");
}

bool clause_eval(const Bits& f, const Bits& exclude_row) {
  if (exclude_row.size() != 2 * f.size()) throw SizeMismatch("clause_eval: exclude row must have 2F bits");
  for (std::size_t m = 0; m < f.size(); ++m) {
    if (!(exclude_row[2 * m] || f[m])) return false;
    if (!(exclude_row[2 * m + 1] || !f[m])) return false;
  }
  return true;
}

Compare compare_oracle(std::uint64_t a, std::uint64_t b) {
  return a > b ? Compare::Greater : (a == b ? Compare::Equal : Compare::Less);
}

Decision decide(Compare c) { return c == Compare::Less ? Decision::NotInClass : Decision::InClass; }

InferenceResult infer(const Bits& f, const TmConfig& config) {
  config.validate();
  if (f.size() != config.features) throw SizeMismatch("infer: feature vector must have F bits");
  InferenceResult r;
  for (std::size_t j = 0; j < config.clauses; ++j) {
    const bool c = clause_eval(f, config.exclude[j]);
    r.clause_bits.push_back(c);
    if (c) (config.polarity[j] > 0 ? r.pos_count : r.neg_count)++;
  }
  r.outcome = compare_oracle(r.pos_count, r.neg_count);
  r.decision = decide(r.outcome);
  return r;
}

std::size_t popcount_oracle(const Bits& bits) {
  std::size_t n = 0;
  for (bool b : bits) n += b;
  return n;
}

std::string bits_to_hex(const Bits& bits) {
  const std::size_t digits = std::max<std::size_t>(1, (bits.size() + 3) / 4);
  std::string s(digits, '0');
  for (std::size_t d = 0; d < digits; ++d) {
    int v = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const std::size_t i = 4 * d + k;
      if (i < bits.size() && bits[i]) v |= 1 << k;
    }
    s[digits - 1 - d] = "0123456789abcdef"[v];
  }
  return s;
}

Bits hex_to_bits(std::string_view hex, std::size_t width) {
  if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
  Bits bits(width, false);
  std::size_t pos = 0;
  for (auto it = hex.rbegin(); it != hex.rend(); ++it, pos += 4) {
    const char c = *it;
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    else throw std::invalid_argument("bad hex digit '" + std::string(1, c) + "'");
    for (std::size_t k = 0; k < 4; ++k) {
      if (!(v >> k & 1)) continue;
      if (pos + k >= width)
        throw SizeMismatch("hex value '" + std::string(hex) + "' exceeds " + std::to_string(width) + " bits");
      bits[pos + k] = true;
    }
  }
  return bits;
}

Bits uint_to_bits(std::uint64_t v, std::size_t width) {
  Bits b(width);
  for (std::size_t i = 0; i < width; ++i) b[i] = (v >> i) & 1;
  return b;
}

nlohmann::json to_json(const TmConfig& c) {
  nlohmann::json ex = nlohmann::json::array();
  for (const auto& row : c.exclude) ex.push_back(bits_to_hex(row));
  return {{"F", c.features}, {"C", c.clauses}, {"exclude", ex}, {"polarity", "first-half-positive"}};
}

TmConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("TmConfig JSON must be an object");
  for (const auto& [key, _] : j.items())
    if (key != "F" && key != "C" && key != "exclude" && key != "polarity")
      throw std::invalid_argument("TmConfig JSON: unknown field '" + key + "'");
  TmConfig c;
  try {
    c = TmConfig::first_half_positive(j.at("F").get<std::size_t>(), j.at("C").get<std::size_t>());
    const auto pol = j.value("polarity", std::string("first-half-positive"));
    if (pol != "first-half-positive")
      throw std::invalid_argument("TmConfig JSON: unsupported polarity '" + pol + "'");
    const auto& ex = j.at("exclude");
    if (!ex.is_array() || ex.size() != c.clauses)
      throw SizeMismatch("TmConfig JSON: exclude must list one hex string per clause");
    for (std::size_t k = 0; k < c.clauses; ++k)
      c.exclude[k] = hex_to_bits(ex[k].get<std::string>(), c.literals());
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("TmConfig JSON: ") + e.what());
  }
  c.validate();
  return c;
}

TmConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return config_from_json(j);
}

std::vector<Bits> parse_stimulus(std::string_view text, std::size_t features) {
  std::vector<Bits> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    out.push_back(hex_to_bits(std::string_view(line).substr(b, e - b + 1), features));
  }
  return out;
}

}  // namespace selftimed::tm
