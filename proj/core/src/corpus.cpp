#include "segtag/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "segtag/tensor.hpp"
#include "segtag/utf8.hpp"

namespace segtag {

namespace {

std::vector<std::string_view> SplitView(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

bool ParseIndex(std::string_view s, std::size_t* value) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *value);
  return ec == std::errc() && ptr == s.data() + s.size();
}

struct Misc {
  bool space_after = true;
  std::vector<std::string> gold_set;
};

Misc ParseMisc(std::string_view misc) {
  Misc out;
  if (misc == "_") return out;
  bool in_gold = false;
  for (std::string_view item : SplitView(misc, '|')) {
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      // Continuation of a multi-valued GoldUPOS=A|B attribute.
      if (in_gold && !item.empty()) out.gold_set.emplace_back(item);
      continue;
    }
    in_gold = false;
    const std::string_view key = item.substr(0, eq);
    const std::string_view value = item.substr(eq + 1);
    if (key == "SpaceAfter" && value == "No") {
      out.space_after = false;
    } else if (key == "GoldUPOS") {
      in_gold = true;
      if (!value.empty()) out.gold_set.emplace_back(value);
    }
  }
  return out;
}

// Tokens collected for the sentence currently being read.
struct PendingSentence {
  Sentence sentence;
  std::string text_comment;
  bool has_text_comment = false;
  std::size_t first_line = 0;
  // Last word id covered by the open multiword token, 0 if none.
  std::size_t multiword_end = 0;
  bool multiword_needs_upos = false;
};

void FinishSentence(PendingSentence& pending, TagDoc& doc) {
  if (pending.sentence.tokens.empty()) {
    pending = PendingSentence{};
    return;
  }
  if (pending.multiword_needs_upos) {
    throw ParseError(pending.first_line, "multiword token without component words");
  }
  for (Token& tok : pending.sentence.tokens) {
    if (tok.gold_set.empty()) tok.gold_set.push_back(tok.upos);
  }
  AlignSentence(pending.sentence);
  if (pending.has_text_comment) {
    std::vector<char32_t> expected;
    for (const auto& dc : DecodeUtf8(pending.text_comment)) {
      if (!IsSpace(dc.code)) expected.push_back(dc.code);
    }
    if (expected != NonSpaceChars(pending.sentence)) {
      throw AlignmentError("sentence starting at line " + std::to_string(pending.first_line) +
                           ": token forms do not match the '# text' comment");
    }
  }
  doc.sentences.push_back(std::move(pending.sentence));
  pending = PendingSentence{};
}

}  // namespace

void AlignSentence(Sentence& sentence) {
  std::string text;
  std::size_t position = 0;
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    Token& tok = sentence.tokens[i];
    std::size_t visible = 0;
    for (const auto& dc : DecodeUtf8(tok.form)) {
      if (!IsSpace(dc.code)) ++visible;
    }
    if (visible == 0) {
      throw AlignmentError("token '" + tok.form + "' has no visible characters");
    }
    tok.span = CharSpan{position, position + visible};
    position += visible;
    text += tok.form;
    if (tok.space_after && i + 1 < sentence.tokens.size()) text.push_back(' ');
  }
  sentence.text = std::move(text);
}

std::vector<char32_t> NonSpaceChars(const Sentence& sentence) {
  std::vector<char32_t> out;
  for (const Token& tok : sentence.tokens) {
    for (const auto& dc : DecodeUtf8(tok.form)) {
      if (!IsSpace(dc.code)) out.push_back(dc.code);
    }
  }
  return out;
}

TagDoc ParseConllu(std::istream& in) {
  TagDoc doc;
  PendingSentence pending;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      FinishSentence(pending, doc);
      continue;
    }
    if (pending.first_line == 0) pending.first_line = line_no;
    if (line[0] == '#') {
      constexpr std::string_view kText = "# text = ";
      if (line.rfind(kText, 0) == 0) {
        pending.text_comment = line.substr(kText.size());
        pending.has_text_comment = true;
      }
      continue;
    }
    const auto fields = SplitView(line, '\t');
    if (fields.size() != 10) {
      throw ParseError(line_no, "expected 10 tab-separated columns, found " +
                                    std::to_string(fields.size()));
    }
    const std::string_view id = fields[0];
    if (fields[1].empty()) throw ParseError(line_no, "empty FORM column");
    if (id.find('.') != std::string_view::npos) continue;  // empty node

    try {
      const std::size_t dash = id.find('-');
      if (dash != std::string_view::npos) {
        std::size_t first = 0, last = 0;
        if (!ParseIndex(id.substr(0, dash), &first) || !ParseIndex(id.substr(dash + 1), &last) ||
            last < first) {
          throw ParseError(line_no, "malformed multiword range '" + std::string(id) + "'");
        }
        const Misc misc = ParseMisc(fields[9]);
        Token tok;
        tok.form = std::string(fields[1]);
        tok.space_after = misc.space_after;
        tok.gold_set = misc.gold_set;
        if (fields[3] != "_") tok.upos = std::string(fields[3]);
        pending.multiword_needs_upos = tok.upos.empty();
        pending.multiword_end = last;
        pending.sentence.tokens.push_back(std::move(tok));
        continue;
      }
      std::size_t word_id = 0;
      if (!ParseIndex(id, &word_id)) {
        throw ParseError(line_no, "malformed ID '" + std::string(id) + "'");
      }
      if (fields[3].empty() || fields[3] == "_") {
        throw ParseError(line_no, "missing UPOS for '" + std::string(fields[1]) + "'");
      }
      if (word_id <= pending.multiword_end) {
        if (pending.multiword_needs_upos) {
          pending.sentence.tokens.back().upos = std::string(fields[3]);
          pending.multiword_needs_upos = false;
        }
        continue;
      }
      pending.multiword_end = 0;
      const Misc misc = ParseMisc(fields[9]);
      Token tok;
      tok.form = std::string(fields[1]);
      tok.upos = std::string(fields[3]);
      tok.space_after = misc.space_after;
      tok.gold_set = misc.gold_set;
      pending.sentence.tokens.push_back(std::move(tok));
    } catch (const Utf8Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  FinishSentence(pending, doc);
  return doc;
}

TagDoc ParseConlluFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return ParseConllu(in);
}

void WriteConllu(std::ostream& out, const TagDoc& doc) {
  for (const Sentence& sentence : doc.sentences) {
    out << "# text = " << sentence.text << '\n';
    for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
      const Token& tok = sentence.tokens[i];
      std::string misc;
      if (!tok.space_after) misc = "SpaceAfter=No";
      const bool plain_gold = tok.gold_set.empty() ||
                              (tok.gold_set.size() == 1 && tok.gold_set[0] == tok.upos);
      if (!plain_gold) {
        if (!misc.empty()) misc += '|';
        misc += "GoldUPOS=";
        for (std::size_t k = 0; k < tok.gold_set.size(); ++k) {
          if (k) misc += '|';
          misc += tok.gold_set[k];
        }
      }
      if (misc.empty()) misc = "_";
      out << (i + 1) << '\t' << tok.form << "\t_\t" << tok.upos << "\t_\t_\t_\t_\t_\t" << misc
          << '\n';
    }
    out << '\n';
  }
}

std::size_t CharVocab::Add(char32_t c) {
  if (IsSpace(c)) throw ContractError("space characters are not part of the vocabulary");
  auto [it, inserted] = ids_.try_emplace(c, chars_.size());
  if (inserted) chars_.push_back(c);
  return it->second;
}

std::size_t CharVocab::Lookup(char32_t c) const {
  auto it = ids_.find(c);
  return it == ids_.end() ? kOov : it->second;
}

void CharVocab::Save(std::ostream& out) const {
  for (char32_t c : chars_) out << EncodeUtf8(c) << '\n';
}

CharVocab CharVocab::Load(std::istream& in) {
  CharVocab vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto decoded = DecodeUtf8(line);
    if (decoded.size() != 1) {
      throw ParseError(line_no, "character vocabulary entries hold exactly one character");
    }
    if (vocab.Lookup(decoded[0].code) != kOov) {
      throw ParseError(line_no, "duplicate character vocabulary entry");
    }
    vocab.Add(decoded[0].code);
  }
  return vocab;
}

std::size_t TagSet::Add(const std::string& label) {
  auto [it, inserted] = ids_.try_emplace(label, labels_.size());
  if (inserted) labels_.push_back(label);
  return it->second;
}

std::size_t TagSet::Id(const std::string& label) const {
  auto it = ids_.find(label);
  if (it == ids_.end()) throw std::out_of_range("unknown label " + label);
  return it->second;
}

std::optional<std::size_t> TagSet::Find(const std::string& label) const {
  auto it = ids_.find(label);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

void TagSet::Save(std::ostream& out) const {
  for (const auto& label : labels_) out << label << '\n';
}

TagSet TagSet::Load(std::istream& in) {
  TagSet tags;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) throw ParseError(line_no, "empty label");
    if (tags.Find(line)) throw ParseError(line_no, "duplicate label " + line);
    tags.Add(line);
  }
  return tags;
}

Vocabularies BuildVocabs(const TagDoc& train) {
  Vocabularies v;
  std::size_t tokens = 0;
  for (const Sentence& sentence : train.sentences) {
    for (const Token& tok : sentence.tokens) {
      ++tokens;
      v.tags.Add(tok.upos);
      for (const auto& dc : DecodeUtf8(tok.form)) {
        if (!IsSpace(dc.code)) v.chars.Add(dc.code);
      }
    }
  }
  if (tokens == 0) throw ConfigError("training document contains no tokens");
  return v;
}

CharSequence TextToCharSequence(std::string_view text, const CharVocab& vocab) {
  CharSequence seq;
  bool pending_space = false;
  for (const auto& dc : DecodeUtf8(text)) {
    if (IsSpace(dc.code)) {
      pending_space = true;
      continue;
    }
    const bool space = pending_space && !seq.chars.empty();
    if (space) seq.space_after.back() = true;
    seq.chars.push_back(dc.code);
    seq.ids.push_back(vocab.Lookup(dc.code));
    seq.space_before.push_back(space);
    seq.space_after.push_back(false);
    seq.offsets.push_back(dc.offset);
    pending_space = false;
  }
  return seq;
}

std::pair<CharSequence, Segmentation> ToCharSequence(const Sentence& sentence,
                                                     const CharVocab& vocab,
                                                     const TagSet& tags) {
  CharSequence seq = TextToCharSequence(sentence.text, vocab);
  Segmentation gold;
  gold.reserve(sentence.tokens.size());
  for (const Token& tok : sentence.tokens) {
    const auto label = tags.Find(tok.upos);
    if (!label) throw ContractError("label '" + tok.upos + "' is not in the tag set");
    gold.push_back(Segment{tok.span.begin, tok.span.size(), *label});
  }
  const std::size_t covered = gold.empty() ? 0 : gold.back().start + gold.back().length;
  if (covered != seq.size()) {
    throw AlignmentError("token spans cover " + std::to_string(covered) + " of " +
                         std::to_string(seq.size()) + " characters");
  }
  return {std::move(seq), std::move(gold)};
}

std::string ReconstructText(const CharSequence& seq) {
  std::string text;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq.space_before[i]) text.push_back(' ');
    AppendUtf8(text, seq.chars[i]);
  }
  return text;
}

}  // namespace segtag
