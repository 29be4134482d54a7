#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stfall {

// Bad user input: missing files, malformed values, shape mismatches at the API
// boundary.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Inconsistent network description (e.g. a stride that does not divide the
// spatial dimension).
struct SpecError : std::runtime_error {
    explicit SpecError(const std::string& msg) : std::runtime_error(msg) {}
};

// Degenerate evaluation request (e.g. single-class label set).
struct EvalError : std::runtime_error {
    explicit EvalError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// FNV-1a, used for dataset/config fingerprints in run manifests.
class Fnv1a {
  public:
    void update(const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            hash_ ^= p[i];
            hash_ *= 0x100000001b3ULL;
        }
    }
    void update(const std::string& s) { update(s.data(), s.size()); }
    std::uint64_t digest() const { return hash_; }
    std::string hex() const;

  private:
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

std::string hash_file(const std::string& path);
std::string hash_directory(const std::string& root);

// Deterministic formatting for CSV/JSON output; enough digits to round-trip
// float exactly.
std::string format_real(double v);

// Plain-text `key = value` config files. Comments start with '#'. Returns
// pairs in file order; malformed lines raise InputError naming the line.
std::vector<std::pair<std::string, std::string>> parse_kv_file(const std::string& path);
std::vector<std::pair<std::string, std::string>> parse_kv_text(const std::string& text);

}  // namespace stfall
