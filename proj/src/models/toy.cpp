#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "arvote/error.hpp"
#include "arvote/models.hpp"
#include "arvote/rng.hpp"
#include "external.hpp"

namespace arvote {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

// Byte offsets of code-point starts, plus the end offset. Stray continuation
// or truncated bytes count as one unit each.
std::vector<std::size_t> codepoint_offsets(std::string_view s) {
  std::vector<std::size_t> offsets;
  offsets.reserve(s.size() + 1);
  std::size_t i = 0;
  while (i < s.size()) {
    offsets.push_back(i);
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c & 0xe0) == 0xc0 ? 2 : (c & 0xf0) == 0xe0 ? 3 : (c & 0xf8) == 0xf0 ? 4 : 1;
    if (i + len > s.size()) len = 1;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xc0) != 0x80) {
        len = 1;
        break;
      }
    }
    i += len;
  }
  offsets.push_back(s.size());
  return offsets;
}

const std::vector<double>& weights_of(const Parameters& params) { return params.at(0).values; }
const std::vector<double>& bias_of(const Parameters& params) { return params.at(1).values; }

std::size_t argmax(const Distribution& p) { return p[1] > p[0] ? 1 : 0; }

std::size_t gold_index(const Example& e, const LabelSpace& space) {
  return *space.index_of(*e.label);
}

double accuracy(const Parameters& params, std::span<const SparseVector> xs, std::span<const std::size_t> gold) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (argmax(softmax(linear_logits(params, xs[i]))) == gold[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(xs.size());
}

}  // namespace

std::uint64_t ngram_hash(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = kFnvOffset ^ splitmix64(seed);
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  return h;
}

SparseVector featurize(std::string_view text, const BackboneSpec& spec) {
  if (spec.kind != BackboneKind::kToy) throw ContractError("featurize: backbone '" + spec.name + "' is not a toy backbone");
  SparseVector out;
  out.dim = spec.toy.dim;

  auto offsets = codepoint_offsets(text);
  if (offsets.size() - 1 > spec.max_seq_len) offsets.resize(spec.max_seq_len + 1);
  const std::size_t units = offsets.size() - 1;

  std::vector<std::uint32_t> buckets;
  for (int order : spec.toy.orders) {
    const auto n = static_cast<std::size_t>(order);
    for (std::size_t i = 0; i + n <= units; ++i) {
      const auto gram = text.substr(offsets[i], offsets[i + n] - offsets[i]);
      buckets.push_back(static_cast<std::uint32_t>(ngram_hash(gram, spec.toy.hash_seed) % spec.toy.dim));
    }
  }
  std::sort(buckets.begin(), buckets.end());
  for (std::size_t i = 0; i < buckets.size();) {
    std::size_t j = i;
    while (j < buckets.size() && buckets[j] == buckets[i]) ++j;
    out.indices.push_back(buckets[i]);
    out.values.push_back(static_cast<double>(j - i));
    i = j;
  }
  return out;
}

Distribution softmax(const std::array<double, kNumLabels>& logits) {
  const double top = std::max(logits[0], logits[1]);
  Distribution p{std::exp(logits[0] - top), std::exp(logits[1] - top)};
  const double z = p[0] + p[1];
  p[0] /= z;
  p[1] /= z;
  return p;
}

double cross_entropy(const Distribution& probs, std::size_t gold) {
  return -std::log(std::max(probs.at(gold), kProbFloor));
}

Parameters init_linear_head(std::size_t dim) {
  return {{"weights", std::vector<double>(kNumLabels * dim, 0.0)}, {"bias", std::vector<double>(kNumLabels, 0.0)}};
}

std::array<double, kNumLabels> linear_logits(const Parameters& params, const SparseVector& x) {
  const auto& w = weights_of(params);
  const auto& b = bias_of(params);
  const std::size_t dim = w.size() / kNumLabels;
  if (x.dim != dim) throw ContractError(fmt::format("feature dimension {} does not match model dimension {}", x.dim, dim));
  std::array<double, kNumLabels> logits{b[0], b[1]};
  for (std::size_t k = 0; k < kNumLabels; ++k) {
    const double* row = w.data() + k * dim;
    for (std::size_t i = 0; i < x.indices.size(); ++i) logits[k] += row[x.indices[i]] * x.values[i];
  }
  return logits;
}

double batch_loss(const Parameters& params, std::span<const SparseVector> batch, std::span<const std::size_t> gold,
                  Parameters* grads) {
  if (batch.size() != gold.size()) throw ContractError("batch_loss: batch and gold sizes differ");
  if (grads) {
    grads->resize(params.size());
    for (std::size_t b = 0; b < params.size(); ++b) {
      (*grads)[b].name = params[b].name;
      (*grads)[b].values.assign(params[b].values.size(), 0.0);
    }
  }
  if (batch.empty()) return 0.0;

  const std::size_t dim = weights_of(params).size() / kNumLabels;
  const double scale = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (std::size_t e = 0; e < batch.size(); ++e) {
    const auto p = softmax(linear_logits(params, batch[e]));
    total += cross_entropy(p, gold[e]);
    if (!grads) continue;
    auto& gw = (*grads)[0].values;
    auto& gb = (*grads)[1].values;
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      const double delta = (p[k] - (k == gold[e] ? 1.0 : 0.0)) * scale;
      gb[k] += delta;
      double* row = gw.data() + k * dim;
      const auto& x = batch[e];
      for (std::size_t i = 0; i < x.indices.size(); ++i) row[x.indices[i]] += delta * x.values[i];
    }
  }
  return total * scale;
}

std::vector<Distribution> forward(const FittedModel& model, std::span<const SparseVector> batch) {
  const auto* params = std::get_if<Parameters>(&model.weights);
  if (!params) throw ContractError("forward: model '" + model.name + "' has no in-process parameters");
  std::vector<Distribution> out;
  out.reserve(batch.size());
  for (const auto& x : batch) out.push_back(softmax(linear_logits(*params, x)));
  return out;
}

FittedModel train(const BackboneSpec& spec, const Dataset& train_set, const Dataset& dev_set, const TrainConfig& cfg) {
  if (spec.kind != BackboneKind::kToy) {
    throw ContractError("train: backbone '" + spec.name + "' is external; use fine_tune_external");
  }
  spec.validate();
  cfg.validate();
  if (train_set.empty()) throw ConfigError("train: training set is empty");
  if (!train_set.fully_labeled()) throw DataError("train: training set has unlabeled examples");
  if (!dev_set.fully_labeled()) throw DataError("train: dev set has unlabeled examples");
  if (dev_set.empty() && cfg.selection == CheckpointSelection::kBestDev) {
    throw ConfigError("train: best_dev checkpoint selection needs a non-empty dev set");
  }

  FittedModel model;
  model.name = spec.name;
  model.spec = spec;
  model.train_config = cfg;
  model.labelspace = train_set.labelspace;

  std::vector<SparseVector> xs, dev_xs;
  std::vector<std::size_t> ys, dev_ys;
  for (const auto& e : train_set.examples) {
    xs.push_back(featurize(e.text, spec));
    ys.push_back(gold_index(e, train_set.labelspace));
  }
  for (const auto& e : dev_set.examples) {
    dev_xs.push_back(featurize(e.text, spec));
    dev_ys.push_back(gold_index(e, dev_set.labelspace));
  }

  if (std::all_of(ys.begin(), ys.end(), [&](std::size_t y) { return y == ys.front(); })) {
    const auto msg = fmt::format("model '{}': training set contains a single class ('{}')", spec.name,
                                 train_set.labelspace.label(ys.front()));
    spdlog::warn(msg);
    model.warnings.push_back(msg);
  }

  Parameters params = init_linear_head(spec.toy.dim);
  OptimizerState state = OptimizerState::zeros_like(params);
  Parameters grads;
  Parameters best = params;
  double best_f1 = -1.0;
  int best_epoch = 0;

  std::vector<SparseVector> batch_x;
  std::vector<std::size_t> batch_y;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto order = seeded_permutation(xs.size(), cfg.seed, static_cast<std::uint64_t>(epoch));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      batch_x.clear();
      batch_y.clear();
      for (std::size_t i = start; i < stop; ++i) {
        batch_x.push_back(xs[order[i]]);
        batch_y.push_back(ys[order[i]]);
      }
      loss_sum += batch_loss(params, batch_x, batch_y, &grads) * static_cast<double>(stop - start);
      adamw_step(params, grads, state, cfg.learning_rate, cfg.adamw);
    }

    EpochRecord record{epoch, loss_sum / static_cast<double>(xs.size()), std::nullopt, state.step};
    if (!dev_xs.empty()) {
      record.dev_micro_f1 = accuracy(params, dev_xs, dev_ys);
      if (*record.dev_micro_f1 > best_f1) {
        best_f1 = *record.dev_micro_f1;
        best_epoch = epoch;
        best = params;
      }
    }
    model.history.push_back(record);
  }

  if (cfg.selection == CheckpointSelection::kBestDev) {
    model.selected_epoch = best_epoch;
    model.weights = std::move(best);
  } else {
    model.selected_epoch = cfg.epochs;
    model.weights = std::move(params);
  }
  return model;
}

PredictionSet predict(const FittedModel& model, const Dataset& data) {
  if (!model.is_toy()) return detail::predict_external(model, data);
  const auto& params = std::get<Parameters>(model.weights);
  PredictionSet out(model.name);
  for (const auto& e : data.examples) {
    const auto p = softmax(linear_logits(params, featurize(e.text, model.spec)));
    const std::size_t k = argmax(p);
    out.add({e.id, model.labelspace.label(k), p[k]});
  }
  return out;
}

}  // namespace arvote
