#include "synthetic.hpp"

#include <string>
#include <vector>

#include "segtag/rng.hpp"

namespace segtag::testing {

namespace {

struct Word {
  const char* form;
  const char* upos;
};

const std::vector<Word> kDet = {{"the", "DET"}, {"a", "DET"}, {"this", "DET"},
                                {"that", "DET"}, {"every", "DET"}, {"some", "DET"}};
const std::vector<Word> kNoun = {
    {"cat", "NOUN"},     {"dog", "NOUN"},    {"rabbit", "NOUN"}, {"man", "NOUN"},
    {"woman", "NOUN"},   {"child", "NOUN"},  {"house", "NOUN"},  {"garden", "NOUN"},
    {"river", "NOUN"},   {"book", "NOUN"},   {"letter", "NOUN"}, {"teacher", "NOUN"},
    {"farmer", "NOUN"},  {"bird", "NOUN"},   {"tree", "NOUN"},   {"car", "NOUN"},
    {"city", "NOUN"},    {"road", "NOUN"},   {"window", "NOUN"}, {"morning", "NOUN"},
    {"saw", "NOUN"},     {"watch", "NOUN"}};
const std::vector<Word> kPropn = {
    {"Anna", "PROPN"}, {"Peter", "PROPN"}, {"London", "PROPN"}, {"Maria", "PROPN"}};
const std::vector<Word> kPron = {
    {"she", "PRON"}, {"he", "PRON"}, {"they", "PRON"}, {"it", "PRON"}, {"we", "PRON"}};
const std::vector<Word> kVerb = {
    {"chased", "VERB"}, {"saw", "VERB"},  {"found", "VERB"}, {"liked", "VERB"},
    {"watched", "VERB"}, {"opened", "VERB"}, {"read", "VERB"}, {"wrote", "VERB"},
    {"took", "VERB"},   {"gave", "VERB"},  {"watch", "VERB"}};
const std::vector<Word> kAdj = {{"big", "ADJ"},   {"small", "ADJ"}, {"old", "ADJ"},
                                {"young", "ADJ"}, {"quick", "ADJ"}, {"lazy", "ADJ"},
                                {"green", "ADJ"}, {"quiet", "ADJ"}, {"happy", "ADJ"}};
const std::vector<Word> kAdv = {
    {"quickly", "ADV"}, {"slowly", "ADV"}, {"often", "ADV"}, {"never", "ADV"}};
const std::vector<Word> kAdp = {{"in", "ADP"},    {"on", "ADP"},   {"near", "ADP"},
                                {"under", "ADP"}, {"with", "ADP"}, {"from", "ADP"}};
const std::vector<Word> kConj = {{"and", "CCONJ"}, {"but", "CCONJ"}};
const std::vector<Word> kAux = {{"was", "AUX"}, {"is", "AUX"}, {"will", "AUX"}};
const std::vector<Word> kNum = {{"two", "NUM"}, {"three", "NUM"}, {"seven", "NUM"}};
const std::vector<Word> kEnd = {{".", "PUNCT"}, {".", "PUNCT"}, {"!", "PUNCT"}, {"?", "PUNCT"}};

class Builder {
 public:
  explicit Builder(Rng& rng) : rng_(rng) {}

  void Pick(const std::vector<Word>& words) {
    const Word& w = words[rng_.UniformInt(words.size())];
    Push(w.form, w.upos);
  }

  void Push(const std::string& form, const std::string& upos) {
    const bool punct = upos == "PUNCT";
    if (punct && !sentence_.tokens.empty()) sentence_.tokens.back().space_after = false;
    Token tok;
    tok.form = form;
    tok.upos = upos;
    tok.gold_set = {upos};
    sentence_.tokens.push_back(std::move(tok));
  }

  void NounPhrase() {
    const double u = rng_.Uniform();
    if (u < 0.55) {
      Pick(kDet);
      if (rng_.Bernoulli(0.4)) Pick(kAdj);
      Pick(kNoun);
    } else if (u < 0.75) {
      Pick(kPron);
    } else if (u < 0.9) {
      Pick(kPropn);
    } else {
      Pick(kNum);
      Pick(kNoun);
    }
    if (rng_.Bernoulli(0.2)) {
      Pick(kAdp);
      Pick(kDet);
      Pick(kNoun);
    }
  }

  void VerbPhrase() {
    const double u = rng_.Uniform();
    if (u < 0.6) {
      if (rng_.Bernoulli(0.15)) Pick(kAdv);
      Pick(kVerb);
      NounPhrase();
    } else if (u < 0.8) {
      Pick(kAux);
      Pick(kAdj);
    } else {
      Pick(kVerb);
      NounPhrase();
      Pick(kAdv);
    }
  }

  Sentence Finish() {
    Pick(kEnd);
    sentence_.tokens.back().space_after = true;
    std::string& first = sentence_.tokens.front().form;
    if (first[0] >= 'a' && first[0] <= 'z') first[0] = static_cast<char>(first[0] - 'a' + 'A');
    AlignSentence(sentence_);
    return std::move(sentence_);
  }

 private:
  Rng& rng_;
  Sentence sentence_;
};

}  // namespace

TagDoc SyntheticCorpus(std::size_t sentences, std::uint64_t seed) {
  TagDoc doc;
  for (std::size_t i = 0; i < sentences; ++i) {
    Rng rng = Rng::Derive(seed, i);
    Builder b(rng);
    b.NounPhrase();
    b.VerbPhrase();
    if (rng.Bernoulli(0.25)) {
      if (rng.Bernoulli(0.5)) b.Push(",", "PUNCT");
      b.Pick(kConj);
      b.NounPhrase();
      b.VerbPhrase();
    }
    doc.sentences.push_back(b.Finish());
  }
  return doc;
}

TagDoc TwoLabelCorpus(std::size_t sentences, std::uint64_t seed) {
  TagDoc doc = SyntheticCorpus(sentences, seed);
  for (Sentence& s : doc.sentences) {
    for (Token& tok : s.tokens) {
      if (tok.upos != "PUNCT") tok.upos = "WORD";
      tok.gold_set = {tok.upos};
    }
  }
  return doc;
}

}  // namespace segtag::testing
