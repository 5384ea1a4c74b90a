#pragma once

#include <cstdint>
#include <string_view>

namespace vulcan {

/// Independent seed for a named random stream derived from one master seed
/// (splitmix64 over the seed mixed with an FNV hash of the stream name).
std::uint64_t sub_seed(std::uint64_t seed, std::string_view stream);

}  // namespace vulcan
