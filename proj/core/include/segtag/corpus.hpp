#ifndef SEGTAG_CORPUS_HPP_
#define SEGTAG_CORPUS_HPP_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "segtag/segmentation.hpp"

namespace segtag {

// Malformed input; carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Token forms do not line up with the sentence text.
class AlignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid or missing configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Half-open interval over the non-space characters of a sentence.
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  friend bool operator==(const CharSpan&, const CharSpan&) = default;
  friend auto operator<=>(const CharSpan&, const CharSpan&) = default;
};

struct Token {
  std::string form;
  std::string upos;                   // training label
  std::vector<std::string> gold_set;  // labels accepted at evaluation
  CharSpan span;
  bool space_after = true;
};

struct Sentence {
  std::string text;  // forms joined by single spaces per SpaceAfter
  std::vector<Token> tokens;
};

struct TagDoc {
  std::vector<Sentence> sentences;
};

// CoNLL-U reader. Comment lines and all columns other than FORM, UPOS and
// MISC are ignored. For a multiword range line the surface form is kept and
// the component word lines are dropped; its UPOS is the first component's.
// MISC `SpaceAfter=No` clears the space after a token and `GoldUPOS=A|B`
// sets the evaluation label set.
TagDoc ParseConllu(std::istream& in);
TagDoc ParseConlluFile(const std::string& path);

// Emits one line per token: ID FORM _ UPOS _ _ _ _ _ MISC, preceded by a
// `# text =` comment, sentences separated by blank lines.
void WriteConllu(std::ostream& out, const TagDoc& doc);

// Recomputes Sentence::text and every token span from the forms and
// space flags. Throws AlignmentError for a form without visible characters.
void AlignSentence(Sentence& sentence);

// Non-space characters of a sentence, in order.
std::vector<char32_t> NonSpaceChars(const Sentence& sentence);

class CharVocab {
 public:
  static constexpr std::size_t kOov = static_cast<std::size_t>(-1);

  // Returns the id of `c`, adding it when new. Spaces are rejected.
  std::size_t Add(char32_t c);
  std::size_t Lookup(char32_t c) const;
  char32_t Char(std::size_t id) const { return chars_.at(id); }
  std::size_t size() const { return chars_.size(); }

  void Save(std::ostream& out) const;
  static CharVocab Load(std::istream& in);

  friend bool operator==(const CharVocab& a, const CharVocab& b) { return a.chars_ == b.chars_; }

 private:
  std::vector<char32_t> chars_;
  std::unordered_map<char32_t, std::size_t> ids_;
};

class TagSet {
 public:
  std::size_t Add(const std::string& label);
  // Throws std::out_of_range for unknown labels.
  std::size_t Id(const std::string& label) const;
  std::optional<std::size_t> Find(const std::string& label) const;
  const std::string& Label(std::size_t id) const { return labels_.at(id); }
  std::size_t size() const { return labels_.size(); }

  void Save(std::ostream& out) const;
  static TagSet Load(std::istream& in);

  friend bool operator==(const TagSet& a, const TagSet& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> ids_;
};

struct Vocabularies {
  CharVocab chars;
  TagSet tags;
};

// Every non-space character and every UPOS of the training document, in
// first-seen order. Throws ConfigError for a document without tokens.
Vocabularies BuildVocabs(const TagDoc& train);

// The model input for one sentence: non-space characters with the two
// space features and their byte offsets into the source text.
struct CharSequence {
  std::vector<char32_t> chars;
  std::vector<std::size_t> ids;  // CharVocab id or CharVocab::kOov
  std::vector<bool> space_before;
  std::vector<bool> space_after;
  std::vector<std::size_t> offsets;
  std::size_t size() const { return chars.size(); }
};

// Raw text to a CharSequence; runs of spaces collapse into the flags and
// spaces before the first or after the last character are dropped.
CharSequence TextToCharSequence(std::string_view text, const CharVocab& vocab);

// Sentence to model input plus its gold segmentation, one segment per token
// labeled with Token::upos. Throws ContractError for labels outside `tags`.
std::pair<CharSequence, Segmentation> ToCharSequence(const Sentence& sentence,
                                                     const CharVocab& vocab,
                                                     const TagSet& tags);

// Inverse of the space folding: chars joined with a single space wherever a
// flag is set.
std::string ReconstructText(const CharSequence& seq);

}  // namespace segtag

#endif  // SEGTAG_CORPUS_HPP_
