#include "mep/engine/phrase.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "mep/error.hpp"

namespace mep::engine {

namespace {

icu::UnicodeString nfc(const icu::UnicodeString& s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error(ErrorCode::InvalidArgument, "ICU NFC unavailable");
  icu::UnicodeString out = n->normalize(s, status);
  if (U_FAILURE(status)) throw Error(ErrorCode::InvalidArgument, "NFC normalization failed");
  return out;
}

}  // namespace

std::string normalize_phrase(std::string_view text) {
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  s = nfc(s);
  s.toLower(icu::Locale::getRoot());

  icu::UnicodeString out;
  bool pending_space = false;
  for (int32_t i = 0; i < s.length();) {
    const UChar32 c = s.char32At(i);
    i += U16_LENGTH(c);
    if (u_ispunct(c)) continue;
    if (u_isUWhiteSpace(c)) {
      pending_space = !out.isEmpty();
      continue;
    }
    if (pending_space) {
      out.append(static_cast<UChar>(0x20));
      pending_space = false;
    }
    out.append(c);
  }
  // lowercasing can produce sequences that are no longer composed
  out = nfc(out);

  std::string utf8;
  out.toUTF8String(utf8);
  return utf8;
}

}  // namespace mep::engine
