#include "segtag/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "segtag/metrics.hpp"
#include "segtag/rng.hpp"
#include "segtag/utf8.hpp"

namespace segtag {

namespace {

constexpr std::uint64_t kShuffleStream = std::numeric_limits<std::uint64_t>::max();

using Example = std::pair<CharSequence, Segmentation>;

struct SentenceResult {
  double loss = 0.0;
  Gradients grads;
};

SentenceResult RunSentence(const Model& model, const Example& example, const Dropout& dropout,
                           Rng* rng) {
  Tape tape;
  Var loss = model.Loss(tape, example.first, example.second, dropout, rng);
  SentenceResult out;
  out.loss = loss.value().item();
  out.grads = tape.Backward(loss, model.params());
  return out;
}

std::vector<Example> PrepareTraining(const TagDoc& train, const Vocabularies& vocab,
                                     std::size_t max_length, std::ostream* diagnostics) {
  std::vector<Example> out;
  std::size_t too_long = 0, empty = 0;
  for (const Sentence& sentence : train.sentences) {
    if (sentence.tokens.empty()) {
      ++empty;
      continue;
    }
    bool fits = true;
    for (const Token& tok : sentence.tokens) fits = fits && tok.span.size() <= max_length;
    if (!fits) {
      ++too_long;
      continue;
    }
    out.push_back(ToCharSequence(sentence, vocab.chars, vocab.tags));
  }
  if (diagnostics && too_long > 0) {
    *diagnostics << "warning: skipped " << too_long
                 << " training sentences with a token longer than " << max_length
                 << " characters\n";
  }
  if (diagnostics && empty > 0) {
    *diagnostics << "warning: skipped " << empty << " empty training sentences\n";
  }
  if (out.empty()) throw ConfigError("no usable training sentences");
  return out;
}

}  // namespace

AdamConfig AdamFrom(const TrainConfig& c) { return {c.lr, c.beta1, c.beta2, c.adam_eps}; }

void AdamStep(ParameterStore& params, const Gradients& grads, AdamState& state,
              const AdamConfig& config) {
  if (state.first.size() != params.size()) state = AdamState(params);
  if (grads.size() != params.size()) throw ContractError("gradient count differs from parameters");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(config.beta1, t);
  const double correct2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const ParamId id{i};
    auto p = params.value(id).data();
    const auto g = grads[id].data();
    auto m = state.first[id].data();
    auto v = state.second[id].data();
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g[k];
      v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g[k] * g[k];
      const double m_hat = m[k] / correct1;
      const double v_hat = v[k] / correct2;
      p[k] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
    }
  }
}

std::string EpochLog::ToJson() const {
  nlohmann::json j{{"epoch", epoch},
                   {"train_nll", train_nll},
                   {"dev_token_f1", dev_token_f1},
                   {"dev_joint_f1", dev_joint_f1},
                   {"seconds", seconds}};
  return j.dump();
}

BatchGradients ComputeBatch(const Model& model, const std::vector<Example>& batch,
                            const Dropout& dropout, const std::vector<Rng*>& rngs,
                            std::size_t threads) {
  if (batch.empty()) throw ContractError("empty batch");
  if (rngs.size() != batch.size()) throw ContractError("one rng per batch sentence required");
  std::vector<SentenceResult> results(batch.size());
  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), batch.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < batch.size(); ++i) {
      results[i] = RunSentence(model, batch[i], dropout, rngs[i]);
    }
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < batch.size(); i += workers) {
            results[i] = RunSentence(model, batch[i], dropout, rngs[i]);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  BatchGradients out;
  out.grads = std::move(results[0].grads);
  out.loss = results[0].loss;
  for (std::size_t i = 1; i < results.size(); ++i) {
    out.grads += results[i].grads;
    out.loss += results[i].loss;
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  out.grads.Scale(scale);
  out.loss *= scale;
  return out;
}

TrainResult Train(const TagDoc& train, const TagDoc& dev, const TrainConfig& config,
                  const TrainStreams& streams) {
  config.Validate();
  if (dev.sentences.empty()) throw ConfigError("development set is empty");
  Model model(config, BuildVocabs(train));
  const std::vector<Example> examples =
      PrepareTraining(train, model.vocab(), config.max_segment_length, streams.diagnostics);

  const AdamConfig adam = AdamFrom(config);
  AdamState state(model.params());
  const Dropout dropout{config.input_dropout, config.dropout};

  TrainResult result;
  double best = -1.0;
  std::size_t best_epoch = 0;
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    Rng shuffle = Rng::Derive(config.seed, epoch, kShuffleStream);
    shuffle.Shuffle(order);

    double total_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(begin + config.batch_size, order.size());
      std::vector<Example> batch;
      std::vector<Rng> rng_storage;
      rng_storage.reserve(end - begin);
      for (std::size_t k = begin; k < end; ++k) {
        batch.push_back(examples[order[k]]);
        rng_storage.push_back(Rng::Derive(config.seed, epoch, k));
      }
      std::vector<Rng*> rngs;
      for (auto& r : rng_storage) rngs.push_back(&r);

      BatchGradients bg = ComputeBatch(model, batch, dropout, rngs, config.threads);
      const double norm = std::sqrt(bg.grads.SquaredNorm());
      if (!std::isfinite(bg.loss) || !std::isfinite(norm)) {
        std::ostringstream msg;
        msg << "non-finite training state at epoch " << epoch << ", batch " << batch_index + 1
            << ": loss " << bg.loss << ", gradient norm " << norm;
        throw TrainingError(msg.str());
      }
      if (config.grad_clip > 0.0 && norm > config.grad_clip) {
        bg.grads.Scale(config.grad_clip / norm);
      }
      AdamStep(model.params(), bg.grads, state, adam);
      total_loss += bg.loss * static_cast<double>(end - begin);
    }

    const TagDoc predicted = TagDocument(model, dev);
    const EvalReport report = Evaluate(dev, predicted);
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_nll = total_loss / static_cast<double>(examples.size());
    entry.dev_token_f1 = report.token.f1;
    entry.dev_joint_f1 = report.joint.f1;
    entry.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.epochs.push_back(entry);
    if (streams.log) *streams.log << entry.ToJson() << '\n' << std::flush;

    if (entry.dev_joint_f1 > best) {
      best = entry.dev_joint_f1;
      best_epoch = epoch;
      result.best = model.ToCheckpoint(best, epoch);
    }
    if (epoch < config.min_epochs) continue;
    if (config.target_dev_f1 > 0.0 && best >= config.target_dev_f1) break;
    if (epoch - best_epoch >= config.patience) break;
  }
  return result;
}

Sentence SegmentsToSentence(const CharSequence& seq, const Segmentation& segmentation,
                            const TagSet& tags) {
  Sentence out;
  for (const Segment& seg : segmentation) {
    Token tok;
    const std::size_t last = seg.start + seg.length - 1;
    for (std::size_t i = seg.start; i <= last; ++i) {
      AppendUtf8(tok.form, seq.chars[i]);
      if (i < last && seq.space_after[i]) tok.form.push_back(' ');
    }
    tok.upos = tags.Label(seg.label);
    tok.gold_set = {tok.upos};
    tok.space_after = seq.space_after[last];
    out.tokens.push_back(std::move(tok));
  }
  if (!out.tokens.empty()) out.tokens.back().space_after = true;
  AlignSentence(out);
  return out;
}

Sentence TagText(const Model& model, std::string_view text) {
  const CharSequence seq = TextToCharSequence(text, model.vocab().chars);
  if (seq.size() == 0) return {};
  return SegmentsToSentence(seq, model.Decode(seq), model.vocab().tags);
}

TagDoc TagDocument(const Model& model, const TagDoc& doc, std::ostream* diagnostics) {
  TagDoc out;
  out.sentences.reserve(doc.sentences.size());
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    Sentence tagged = TagText(model, doc.sentences[i].text);
    if (tagged.tokens.empty() && diagnostics) {
      *diagnostics << "warning: sentence " << i + 1 << " is empty\n";
    }
    out.sentences.push_back(std::move(tagged));
  }
  return out;
}

}  // namespace segtag
