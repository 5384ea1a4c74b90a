#include "vulcan/corpus/types.hpp"

namespace vulcan::corpus {

std::string_view to_string(VulnClass v) {
  switch (v) {
    case VulnClass::DeadAfterCall: return "DeadAfterCall";
    case VulnClass::UncheckedDiv: return "UncheckedDiv";
    case VulnClass::LoopOverflow: return "LoopOverflow";
  }
  return "?";
}

std::optional<VulnClass> vuln_class_from_string(std::string_view name) {
  for (auto v : {VulnClass::DeadAfterCall, VulnClass::UncheckedDiv, VulnClass::LoopOverflow}) {
    if (to_string(v) == name) return v;
  }
  return std::nullopt;
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

std::optional<Split> split_from_string(std::string_view name) {
  for (auto s : {Split::Train, Split::Val, Split::Test}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

}  // namespace vulcan::corpus
