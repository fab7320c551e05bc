#ifndef SEGTAG_UTF8_HPP_
#define SEGTAG_UTF8_HPP_

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace segtag {

class Utf8Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DecodedChar {
  char32_t code;
  std::size_t offset;  // byte offset of the first code unit
};

std::vector<DecodedChar> DecodeUtf8(std::string_view text);
void AppendUtf8(std::string& out, char32_t code);
std::string EncodeUtf8(char32_t code);

// Characters folded into the space features instead of being modeled.
bool IsSpace(char32_t c);

}  // namespace segtag

#endif  // SEGTAG_UTF8_HPP_
