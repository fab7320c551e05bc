#include "segtag/model.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace segtag {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'S', 'E', 'G', 'T', 'A', 'G', 'C', 'K'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename T>
T Get(const json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

std::size_t GetCount(const json& value, const std::string& key) {
  if (!value.is_number_integer() || value.get<long long>() < 0) {
    throw ConfigError("config key '" + key + "' must be a non-negative integer");
  }
  return value.get<std::size_t>();
}

json ConfigJson(const TrainConfig& c) {
  return json{{"batch_size", c.batch_size},
              {"lr", c.lr},
              {"beta1", c.beta1},
              {"beta2", c.beta2},
              {"adam_eps", c.adam_eps},
              {"dropout", c.dropout},
              {"input_dropout", c.input_dropout},
              {"max_segment_length", c.max_segment_length},
              {"min_epochs", c.min_epochs},
              {"max_epochs", c.max_epochs},
              {"patience", c.patience},
              {"target_dev_f1", c.target_dev_f1},
              {"grad_clip", c.grad_clip},
              {"seed", c.seed},
              {"threads", c.threads},
              {"init_scale", c.init_scale},
              {"embed_dim", c.embed_dim},
              {"lstm_hidden", c.lstm_hidden},
              {"lstm_layers", c.lstm_layers},
              {"featurizer", std::string(FeaturizerName(c.featurizer))},
              {"segfeat.dim", c.segfeat_dim},
              {"segfeat.nonlinearity", std::string(ActivationName(c.segfeat_nonlinearity))},
              {"segfeat.srnn_hidden", c.srnn_hidden}};
}

TrainConfig ConfigFromObject(const json& obj, const TrainConfig& base) {
  if (!obj.is_object()) throw ConfigError("config must be a JSON object");
  TrainConfig c = base;
  for (const auto& [key, value] : obj.items()) {
    if (key == "batch_size") c.batch_size = GetCount(value, key);
    else if (key == "lr") c.lr = Get<double>(value, key);
    else if (key == "beta1") c.beta1 = Get<double>(value, key);
    else if (key == "beta2") c.beta2 = Get<double>(value, key);
    else if (key == "adam_eps") c.adam_eps = Get<double>(value, key);
    else if (key == "dropout") c.dropout = Get<double>(value, key);
    else if (key == "input_dropout") c.input_dropout = Get<double>(value, key);
    else if (key == "max_segment_length") c.max_segment_length = GetCount(value, key);
    else if (key == "min_epochs") c.min_epochs = GetCount(value, key);
    else if (key == "max_epochs") c.max_epochs = GetCount(value, key);
    else if (key == "patience") c.patience = GetCount(value, key);
    else if (key == "target_dev_f1") c.target_dev_f1 = Get<double>(value, key);
    else if (key == "grad_clip") c.grad_clip = Get<double>(value, key);
    else if (key == "seed") c.seed = GetCount(value, key);
    else if (key == "threads") c.threads = GetCount(value, key);
    else if (key == "init_scale") c.init_scale = Get<double>(value, key);
    else if (key == "embed_dim") c.embed_dim = GetCount(value, key);
    else if (key == "lstm_hidden") c.lstm_hidden = GetCount(value, key);
    else if (key == "lstm_layers") c.lstm_layers = GetCount(value, key);
    else if (key == "featurizer") {
      try {
        c.featurizer = ParseFeaturizerKind(Get<std::string>(value, key));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    } else if (key == "segfeat.dim") c.segfeat_dim = GetCount(value, key);
    else if (key == "segfeat.nonlinearity") {
      try {
        c.segfeat_nonlinearity = ParseActivation(Get<std::string>(value, key));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    } else if (key == "segfeat.srnn_hidden") c.srnn_hidden = GetCount(value, key);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  return c;
}

void WriteU32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void WriteU64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T ReadScalar(std::istream& in) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw ModelIoError("checkpoint truncated");
  }
  return v;
}

}  // namespace

void TrainConfig::Validate() const {
  auto probability = [](double p, const char* key) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(key) + " must lie in [0, 1]");
  };
  auto positive = [](std::size_t v, const char* key) {
    if (v == 0) throw ConfigError(std::string(key) + " must be at least 1");
  };
  probability(dropout, "dropout");
  probability(input_dropout, "input_dropout");
  if (dropout >= 1.0) throw ConfigError("dropout must be below 1");
  probability(target_dev_f1, "target_dev_f1");
  probability(beta1, "beta1");
  probability(beta2, "beta2");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
  if (grad_clip < 0.0) throw ConfigError("grad_clip must be non-negative");
  if (!(init_scale >= 0.0)) throw ConfigError("init_scale must be non-negative");
  positive(batch_size, "batch_size");
  positive(max_segment_length, "max_segment_length");
  positive(min_epochs, "min_epochs");
  positive(max_epochs, "max_epochs");
  positive(threads, "threads");
  positive(embed_dim, "embed_dim");
  positive(lstm_hidden, "lstm_hidden");
  positive(lstm_layers, "lstm_layers");
  positive(segfeat_dim, "segfeat.dim");
  positive(srnn_hidden, "segfeat.srnn_hidden");
}

TrainConfig ConfigFromJson(const std::string& text, const TrainConfig& base) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return ConfigFromObject(obj, base);
}

std::string ConfigToJson(const TrainConfig& config) { return ConfigJson(config).dump(2); }

void SaveCheckpoint(const Checkpoint& ck, std::ostream& out) {
  json header;
  header["format_version"] = Checkpoint::kFormatVersion;
  header["config"] = ConfigJson(ck.config);
  json chars = json::array();
  for (std::size_t i = 0; i < ck.vocab.chars.size(); ++i) {
    chars.push_back(static_cast<std::uint32_t>(ck.vocab.chars.Char(i)));
  }
  json tags = json::array();
  for (std::size_t i = 0; i < ck.vocab.tags.size(); ++i) tags.push_back(ck.vocab.tags.Label(i));
  header["vocab"] = {{"chars", chars}, {"tags", tags}};
  json tensors = json::array();
  std::size_t offset = 0;
  for (std::size_t i = 0; i < ck.params.size(); ++i) {
    const Tensor& t = ck.params.value(ParamId{i});
    tensors.push_back({{"name", ck.params.name(ParamId{i})}, {"shape", t.shape()}, {"offset", offset}});
    offset += t.size();
  }
  header["tensors"] = tensors;
  header["best_dev_f1"] = ck.best_dev_f1;
  header["epoch"] = ck.epoch;
  const std::string text = header.dump();

  out.write(kMagic, sizeof kMagic);
  WriteU32(out, Checkpoint::kFormatVersion);
  WriteU64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (std::size_t i = 0; i < ck.params.size(); ++i) {
    const auto data = ck.params.value(ParamId{i}).data();
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
  }
  if (!out) throw ModelIoError("failed to write checkpoint");
}

void SaveCheckpointFile(const Checkpoint& checkpoint, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelIoError("cannot create " + path);
  SaveCheckpoint(checkpoint, out);
}

Checkpoint LoadCheckpoint(std::istream& in) {
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw ModelIoError("not a segtag checkpoint");
  }
  const auto version = ReadScalar<std::uint32_t>(in);
  if (version != Checkpoint::kFormatVersion) {
    throw ModelIoError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto header_size = ReadScalar<std::uint64_t>(in);
  if (header_size > (std::uint64_t{1} << 32)) throw ModelIoError("implausible header size");
  std::string text(header_size, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_size))) {
    throw ModelIoError("checkpoint header truncated");
  }
  Checkpoint ck;
  try {
    const json header = json::parse(text);
    ck.config = ConfigFromObject(header.at("config"), TrainConfig{});
    for (const auto& c : header.at("vocab").at("chars")) {
      ck.vocab.chars.Add(static_cast<char32_t>(c.get<std::uint32_t>()));
    }
    for (const auto& t : header.at("vocab").at("tags")) ck.vocab.tags.Add(t.get<std::string>());
    for (const auto& entry : header.at("tensors")) {
      const Shape shape = entry.at("shape").get<Shape>();
      Tensor t(shape);
      auto data = t.data();
      if (!in.read(reinterpret_cast<char*>(data.data()),
                   static_cast<std::streamsize>(data.size() * sizeof(double)))) {
        throw ModelIoError("checkpoint tensor data truncated");
      }
      ck.params.Add(entry.at("name").get<std::string>(), std::move(t));
    }
    ck.best_dev_f1 = header.at("best_dev_f1").get<double>();
    ck.epoch = header.at("epoch").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ModelIoError(std::string("malformed checkpoint header: ") + e.what());
  } catch (const ConfigError& e) {
    throw ModelIoError(std::string("checkpoint config: ") + e.what());
  } catch (const std::logic_error& e) {
    throw ModelIoError(std::string("checkpoint contents: ") + e.what());
  }
  return ck;
}

Checkpoint LoadCheckpointFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelIoError("cannot open model " + path);
  return LoadCheckpoint(in);
}

Model::Model(const TrainConfig& config, Vocabularies vocab)
    : config_(config), vocab_(std::move(vocab)) {
  config_.Validate();
  Rng init(config_.seed);
  ParamBinder binder(params_, &init, config_.init_scale);
  Build(binder);
}

Model::Model(Checkpoint checkpoint)
    : config_(checkpoint.config),
      vocab_(std::move(checkpoint.vocab)),
      params_(std::move(checkpoint.params)) {
  config_.Validate();
  ParamBinder binder(params_, nullptr, config_.init_scale);
  try {
    Build(binder);
  } catch (const std::logic_error& e) {
    throw ModelIoError(std::string("checkpoint does not match its config: ") + e.what());
  }
}

void Model::Build(ParamBinder& binder) {
  EncoderConfig enc;
  enc.vocab_size = vocab_.chars.size();
  enc.embed_dim = config_.embed_dim;
  enc.hidden = config_.lstm_hidden;
  enc.layers = config_.lstm_layers;
  encoder_ = std::make_unique<CharEncoder>(enc, binder);

  SegFeatConfig seg;
  seg.kind = config_.featurizer;
  seg.input_dim = encoder_->output_dim();
  seg.dim = config_.segfeat_dim;
  seg.nonlinearity = config_.segfeat_nonlinearity;
  seg.srnn_hidden = config_.srnn_hidden;
  featurizer_ = MakeFeaturizer(seg, binder);

  if (vocab_.tags.size() == 0) throw ConfigError("model needs at least one label");
  crf_ = MakeCrfParams(binder, vocab_.tags.size(), config_.segfeat_dim);
}

LatticeVars Model::Lattice(Tape& tape, const CharSequence& seq, const Dropout& dropout,
                           Rng* rng) const {
  Var embedded = encoder_->Embed(tape, params_, seq, dropout.input, rng);
  Var states = encoder_->Encode(tape, params_, embedded, dropout.layer, rng);
  SegmentFeatures features =
      featurizer_->Compute(tape, params_, states, config_.max_segment_length);
  return ScoreLattice(features, tape.Param(params_, crf_.weights),
                      tape.Param(params_, crf_.bias));
}

Var Model::Loss(Tape& tape, const CharSequence& seq, const Segmentation& gold,
                const Dropout& dropout, Rng* rng) const {
  LatticeVars lattice = Lattice(tape, seq, dropout, rng);
  return Nll(gold, lattice, Transitions(tape));
}

Segmentation Model::Decode(const CharSequence& seq) const {
  if (seq.size() == 0) return {};
  Tape tape;
  LatticeVars lattice = Lattice(tape, seq, Dropout{}, nullptr);
  return Viterbi(lattice.Values(), Transitions(tape).value()).segmentation;
}

Checkpoint Model::ToCheckpoint(double best_dev_f1, std::size_t epoch) const {
  Checkpoint ck;
  ck.config = config_;
  ck.vocab = vocab_;
  ck.params = params_;
  ck.best_dev_f1 = best_dev_f1;
  ck.epoch = epoch;
  return ck;
}

}  // namespace segtag
