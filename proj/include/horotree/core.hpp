#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace horotree {

using Vertex = std::uint32_t;
inline constexpr Vertex kNoVertex = 0xffffffffu;
inline constexpr std::uint16_t kUnreached = 0xffffu;

// Error classes double as CLI exit codes.
enum class ErrorClass : int {
    Input = 2,
    Radius = 3,
    Divergence = 4,
    Audit = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorClass c, const std::string& msg) : std::runtime_error(msg), class_(c) {}
    ErrorClass error_class() const { return class_; }

private:
    ErrorClass class_;
};

[[noreturn]] inline void fail_input(const std::string& m) { throw Error(ErrorClass::Input, m); }
[[noreturn]] inline void fail_radius(const std::string& m) { throw Error(ErrorClass::Radius, m); }
[[noreturn]] inline void fail_divergence(const std::string& m) { throw Error(ErrorClass::Divergence, m); }
[[noreturn]] inline void fail_audit(const std::string& m) { throw Error(ErrorClass::Audit, m); }

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    return mix64(h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2)));
}

}  // namespace horotree
