#include "dialectqe/textnorm.hpp"

#include <unicode/uchar.h>
#include <unicode/unorm2.h>
#include <unicode/ustring.h>
#include <unicode/utf8.h>

#include <cctype>

#include "dialectqe/errors.hpp"

namespace dialectqe::textnorm {

namespace {

std::u16string to_utf16(std::string_view utf8) {
  std::u16string out(utf8.size() + 1, u'\0');
  UErrorCode ec = U_ZERO_ERROR;
  int32_t len = 0;
  u_strFromUTF8(out.data(), static_cast<int32_t>(out.size()), &len,
                utf8.data(), static_cast<int32_t>(utf8.size()), &ec);
  if (U_FAILURE(ec)) raise(ErrorKind::parse, "invalid UTF-8 input");
  out.resize(static_cast<std::size_t>(len));
  return out;
}

std::string to_utf8(const std::u16string& utf16) {
  std::string out(utf16.size() * 4 + 1, '\0');
  UErrorCode ec = U_ZERO_ERROR;
  int32_t len = 0;
  u_strToUTF8(out.data(), static_cast<int32_t>(out.size()), &len,
              utf16.data(), static_cast<int32_t>(utf16.size()), &ec);
  if (U_FAILURE(ec)) raise(ErrorKind::parse, "UTF-16 to UTF-8 conversion failed");
  out.resize(static_cast<std::size_t>(len));
  return out;
}

bool is_punct_or_symbol(UChar32 c) {
  return (U_GET_GC_MASK(c) & (U_GC_P_MASK | U_GC_S_MASK)) != 0;
}

}  // namespace

std::string nfc(std::string_view utf8) {
  if (utf8.empty()) return {};
  UErrorCode ec = U_ZERO_ERROR;
  const UNormalizer2* norm = unorm2_getNFCInstance(&ec);
  if (U_FAILURE(ec) || norm == nullptr)
    raise(ErrorKind::io, "ICU NFC normalizer unavailable");

  std::u16string src = to_utf16(utf8);
  std::u16string dst(src.size() * 2 + 8, u'\0');
  int32_t len = unorm2_normalize(norm, src.data(), static_cast<int32_t>(src.size()),
                                 dst.data(), static_cast<int32_t>(dst.size()), &ec);
  if (U_FAILURE(ec)) raise(ErrorKind::parse, "NFC normalization failed");
  dst.resize(static_cast<std::size_t>(len));
  return to_utf8(dst);
}

std::string strip_edge_punct(std::string_view utf8) {
  const auto* s = reinterpret_cast<const std::uint8_t*>(utf8.data());
  int32_t n = static_cast<int32_t>(utf8.size());

  int32_t begin = 0;
  while (begin < n) {
    int32_t i = begin;
    UChar32 c;
    U8_NEXT(s, i, n, c);
    if (c < 0 || !is_punct_or_symbol(c)) break;
    begin = i;
  }
  int32_t end = n;
  while (end > begin) {
    int32_t i = end;
    UChar32 c;
    U8_PREV(s, begin, i, c);
    if (c < 0 || !is_punct_or_symbol(c)) break;
    end = i;
  }
  return std::string(utf8.substr(static_cast<std::size_t>(begin),
                                 static_cast<std::size_t>(end - begin)));
}

std::vector<std::string_view> split_whitespace(std::string_view utf8) {
  std::vector<std::string_view> out;
  const auto* s = reinterpret_cast<const std::uint8_t*>(utf8.data());
  int32_t n = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  int32_t token_start = -1;
  while (i < n) {
    int32_t here = i;
    UChar32 c;
    U8_NEXT(s, i, n, c);
    bool space = c >= 0 && u_isUWhiteSpace(c);
    if (space) {
      if (token_start >= 0) {
        out.push_back(utf8.substr(static_cast<std::size_t>(token_start),
                                  static_cast<std::size_t>(here - token_start)));
        token_start = -1;
      }
    } else if (token_start < 0) {
      token_start = here;
    }
  }
  if (token_start >= 0)
    out.push_back(utf8.substr(static_cast<std::size_t>(token_start)));
  return out;
}

std::string_view trim(std::string_view sv) {
  std::size_t b = 0, e = sv.size();
  while (b < e && std::isspace(static_cast<unsigned char>(sv[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(sv[e - 1]))) --e;
  return sv.substr(b, e - b);
}

std::string sanitize_utf8(std::string_view bytes, bool& lossy) {
  lossy = false;
  std::string out;
  out.reserve(bytes.size());
  const auto* s = reinterpret_cast<const std::uint8_t*>(bytes.data());
  int32_t n = static_cast<int32_t>(bytes.size());
  int32_t i = 0;
  while (i < n) {
    int32_t start = i;
    UChar32 c;
    U8_NEXT(s, i, n, c);
    if (c < 0) {
      out += "\xEF\xBF\xBD";  // U+FFFD
      lossy = true;
    } else {
      out.append(bytes.substr(static_cast<std::size_t>(start),
                              static_cast<std::size_t>(i - start)));
    }
  }
  return out;
}

}  // namespace dialectqe::textnorm
