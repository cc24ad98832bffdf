#pragma once

#include <string>
#include <string_view>

namespace rms {

struct TextPolicy {
  /// Strict mode sets this to false: case differences become significant.
  bool case_fold = true;
};

/// Canonical form used for every text comparison: Unicode NFC composition,
/// trim, optional case folding, runs of whitespace collapsed to one space.
std::string normalize_text(std::string_view text, TextPolicy policy = {});

bool texts_equivalent(std::string_view a, std::string_view b, TextPolicy policy = {});

}  // namespace rms
