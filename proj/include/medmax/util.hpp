#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace medmax {

// splitmix64 finalizer applied to a seed combined with a stream id.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

// Round-trip decimal formatting used by every CSV writer.
std::string format_double(double v);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace medmax
