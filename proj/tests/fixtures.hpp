#pragma once

// Shared test programs.

namespace vulcan::testing {

// Loop updates r, then y, then x = y / r.
inline constexpr const char* kLoopDivision =
    "func foo(y, r, n) {\n"
    "    while r < n {\n"
    "        r = r * 2\n"
    "    }\n"
    "    y = y + 1\n"
    "    x = y / r\n"
    "    return x\n"
    "}";

inline constexpr int kDivLine = 6;
inline constexpr int kYDefLine = 5;
inline constexpr int kRDefLine = 3;
inline constexpr int kHeaderLine = 1;

}  // namespace vulcan::testing
