#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "segtag/corpus.hpp"
#include "segtag/corruptor.hpp"
#include "segtag/metrics.hpp"
#include "segtag/model.hpp"
#include "segtag/trainer.hpp"
#include "segtag/utf8.hpp"

namespace segtag::cli {

namespace {

namespace fs = std::filesystem;

class InputFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Io {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

TagDoc ReadDoc(const std::string& path, const Io& io) {
  if (path == "-") return ParseConllu(io.in);
  std::ifstream file(path);
  if (!file) throw InputFileError("cannot open " + path);
  return ParseConllu(file);
}

std::string ReadText(const std::string& path, const Io& io) {
  std::ostringstream buf;
  if (path == "-") {
    buf << io.in.rdbuf();
  } else {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw InputFileError("cannot open " + path);
    buf << file.rdbuf();
  }
  return buf.str();
}

void WriteTo(const std::string& path, const Io& io, const std::function<void(std::ostream&)>& fn) {
  if (path == "-") {
    fn(io.out);
    io.out.flush();
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot write " + path);
  fn(file);
  if (!file) throw ConfigError("failed writing " + path);
}

struct TrainArgs {
  std::string train, dev, out, config;
  std::optional<std::string> featurizer;
  std::optional<std::uint64_t> seed;
  bool noise_mode = false;
};

int CmdTrain(const TrainArgs& a, const Io& io) {
  TrainConfig config;
  if (!a.config.empty()) {
    std::ifstream file(a.config);
    if (!file) throw ConfigError("cannot open config file " + a.config);
    std::ostringstream text;
    text << file.rdbuf();
    config = ConfigFromJson(text.str(), config);
  }
  if (a.noise_mode) config.input_dropout = 0.0;
  if (a.featurizer) {
    try {
      config.featurizer = ParseFeaturizerKind(*a.featurizer);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--featurizer: ") + e.what());
    }
  }
  if (a.seed) config.seed = *a.seed;
  config.Validate();

  const TagDoc train = ReadDoc(a.train, io);
  const TagDoc dev = ReadDoc(a.dev, io);

  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec || !fs::is_directory(a.out)) throw ConfigError("cannot create output directory " + a.out);
  const fs::path dir(a.out);

  std::ofstream log(dir / "train_log.jsonl");
  if (!log) throw ConfigError("cannot write " + (dir / "train_log.jsonl").string());
  TrainResult result = Train(train, dev, config, TrainStreams{&log, &io.err});

  SaveCheckpointFile(result.best, (dir / "model.ckpt").string());
  WriteTo((dir / "chars.txt").string(), io, [&](std::ostream& o) { result.best.vocab.chars.Save(o); });
  WriteTo((dir / "tags.txt").string(), io, [&](std::ostream& o) { result.best.vocab.tags.Save(o); });
  WriteTo((dir / "config.json").string(), io,
          [&](std::ostream& o) { o << ConfigToJson(config) << '\n'; });
  io.err << "trained " << result.epochs.size() << " epochs; best dev joint F1 "
         << result.best.best_dev_f1 << " at epoch " << result.best.epoch << '\n';
  return kOk;
}

struct TagArgs {
  std::string model, input = "-", format = "conllu", out = "-";
};

int CmdTag(const TagArgs& a, const Io& io) {
  Model model(LoadCheckpointFile(a.model));
  TagDoc output;
  if (a.format == "conllu") {
    output = TagDocument(model, ReadDoc(a.input, io), &io.err);
  } else {
    std::istringstream lines(ReadText(a.input, io));
    std::string line;
    std::size_t number = 0;
    while (std::getline(lines, line)) {
      ++number;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      Sentence tagged = TagText(model, line);
      if (tagged.tokens.empty()) {
        io.err << "warning: line " << number << " is empty\n";
        continue;
      }
      output.sentences.push_back(std::move(tagged));
    }
  }
  output.sentences.erase(std::remove_if(output.sentences.begin(), output.sentences.end(),
                                        [](const Sentence& s) { return s.tokens.empty(); }),
                         output.sentences.end());
  WriteTo(a.out, io, [&](std::ostream& o) { WriteConllu(o, output); });
  return kOk;
}

struct CorruptArgs {
  std::string input, out;
  double pd = 0.0, pi = 0.0;
  std::uint64_t seed = 1;
  std::optional<std::string> level;
};

int CmdCorrupt(const CorruptArgs& a, const Io& io) {
  NoiseSpec spec{a.pd, a.pi, a.seed};
  if (a.level) {
    const auto level = ParseNoiseLevel(*a.level);
    if (!level) throw ConfigError("--level must be low, mid or high");
    spec = PresetSpec(*level, a.seed);
  }
  spec.Validate();
  const CorruptionResult result = Corrupt(ReadDoc(a.input, io), spec);
  WriteTo(a.out, io, [&](std::ostream& o) { WriteConllu(o, result.doc); });

  nlohmann::json stats{{"level", a.level ? nlohmann::json(*a.level) : nlohmann::json()},
                       {"p_d", spec.p_delete},
                       {"p_i", spec.p_insert},
                       {"deletions", result.report.deletions},
                       {"insertions", result.report.insertions},
                       {"seed", spec.seed}};
  if (a.out == "-") {
    io.err << stats.dump() << '\n';
  } else {
    WriteTo(a.out + ".stats.json", io, [&](std::ostream& o) { o << stats.dump(2) << '\n'; });
  }
  return kOk;
}

struct EvalArgs {
  std::string gold, pred, clean_gold, report = "-";
};

int CmdEval(const EvalArgs& a, const Io& io) {
  const TagDoc gold = ReadDoc(a.gold, io);
  const TagDoc pred = ReadDoc(a.pred, io);
  std::optional<TagDoc> clean;
  if (!a.clean_gold.empty()) clean = ReadDoc(a.clean_gold, io);
  const EvalReport report = Evaluate(gold, pred, clean ? &*clean : nullptr);
  WriteTo(a.report, io, [&](std::ostream& o) { o << report.ToJson() << '\n'; });
  return kOk;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  const Io io{in, out, err};
  CLI::App app{"Character-level semi-Markov CRF tokenizer and POS tagger"};
  app.name(args.empty() ? "segtag" : fs::path(args[0]).filename().string());
  app.require_subcommand(1, 1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "train a model");
  train_cmd->add_option("--train", train.train, "training CoNLL-U")->required();
  train_cmd->add_option("--dev", train.dev, "development CoNLL-U")->required();
  train_cmd->add_option("--out", train.out, "output directory")->required();
  train_cmd->add_option("--config", train.config, "JSON config file");
  train_cmd->add_option("--featurizer", train.featurizer, "grconv, srnn or diff");
  train_cmd->add_flag("--noise-mode", train.noise_mode, "disable input dropout");
  train_cmd->add_option("--seed", train.seed, "random seed");

  TagArgs tag;
  auto* tag_cmd = app.add_subcommand("tag", "segment and tag text");
  tag_cmd->add_option("--model", tag.model, "checkpoint file")->required();
  tag_cmd->add_option("--input", tag.input, "input file or -");
  tag_cmd->add_option("--format", tag.format, "conllu or text")
      ->check(CLI::IsMember({"conllu", "text"}));
  tag_cmd->add_option("--out", tag.out, "output file or -");

  CorruptArgs corrupt;
  auto* corrupt_cmd = app.add_subcommand("corrupt", "corrupt the spacing of a corpus");
  corrupt_cmd->add_option("--input", corrupt.input, "input CoNLL-U or -")->required();
  corrupt_cmd->add_option("--out", corrupt.out, "output CoNLL-U or -")->required();
  corrupt_cmd->add_option("--pd", corrupt.pd, "space deletion probability");
  corrupt_cmd->add_option("--pi", corrupt.pi, "space insertion probability");
  corrupt_cmd->add_option("--seed", corrupt.seed, "random seed");
  corrupt_cmd->add_option("--level", corrupt.level, "preset: low, mid or high");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "score predictions");
  eval_cmd->add_option("--gold", eval.gold, "gold CoNLL-U")->required();
  eval_cmd->add_option("--pred", eval.pred, "predicted CoNLL-U")->required();
  eval_cmd->add_option("--clean-gold", eval.clean_gold, "clean gold for relaxed accuracy");
  eval_cmd->add_option("--report", eval.report, "report file or -");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (train_cmd->parsed()) return CmdTrain(train, io);
    if (tag_cmd->parsed()) return CmdTag(tag, io);
    if (corrupt_cmd->parsed()) return CmdCorrupt(corrupt, io);
    return CmdEval(eval, io);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kInputError;
  } catch (const Utf8Error& e) {
    err << "encoding error: " << e.what() << '\n';
    return kInputError;
  } catch (const InputFileError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const ModelIoError& e) {
    err << "model error: " << e.what() << '\n';
    return kModelError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const AlignmentError& e) {
    err << "alignment error: " << e.what() << '\n';
    return kConfigError;
  } catch (const TrainingError& e) {
    err << "training error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace segtag::cli
