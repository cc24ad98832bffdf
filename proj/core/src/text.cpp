#include "rms/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <stdexcept>

namespace rms {

std::string normalize_text(std::string_view text, TextPolicy policy) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");

  icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  if (policy.case_fold) s.foldCase();
  s = nfc->normalize(s, status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU normalization failed");

  // Collapse whitespace runs and trim, working on code points.
  icu::UnicodeString out;
  bool pending_space = false;
  for (int32_t i = 0; i < s.length();) {
    const UChar32 c = s.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      pending_space = !out.isEmpty();
      continue;
    }
    if (pending_space) out.append(static_cast<UChar>(u' '));
    pending_space = false;
    out.append(c);
  }
  std::string result;
  out.toUTF8String(result);
  return result;
}

bool texts_equivalent(std::string_view a, std::string_view b, TextPolicy policy) {
  return normalize_text(a, policy) == normalize_text(b, policy);
}

}  // namespace rms
