#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "arvote/corpus.hpp"
#include "arvote/prediction.hpp"

namespace arvote {

inline constexpr std::size_t kNumLabels = 2;

enum class BackboneKind { kExternal, kToy };
std::string_view to_string(BackboneKind kind);

struct ToyConfig {
  std::vector<int> orders{2, 3, 4};
  std::size_t dim = std::size_t{1} << 16;
  std::uint64_t hash_seed = 0;

  bool operator==(const ToyConfig&) const = default;
};

struct BackboneSpec {
  std::string name;
  BackboneKind kind = BackboneKind::kToy;
  std::size_t max_seq_len = 512;
  std::size_t num_labels = kNumLabels;
  /// Pretrained checkpoint identifier handed to the external adapter.
  std::string checkpoint;
  ToyConfig toy;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;

  bool operator==(const BackboneSpec&) const = default;
};

/// Built-in roster. Throws ConfigError for unknown names.
const BackboneSpec& lookup_backbone(std::string_view name);
std::vector<std::string> backbone_names();

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;

  bool operator==(const AdamWConfig&) const = default;
};

enum class CheckpointSelection { kBestDev, kLastEpoch };
std::string_view to_string(CheckpointSelection s);
CheckpointSelection parse_selection(std::string_view s);

struct TrainConfig {
  int epochs = 10;
  double learning_rate = 1e-2;
  std::size_t batch_size = 32;
  AdamWConfig adamw;
  std::uint64_t seed = 0;
  CheckpointSelection selection = CheckpointSelection::kBestDev;

  /// 1e-5 for external backbones, 1e-2 for the toy backbone.
  static TrainConfig defaults_for(BackboneKind kind);
  void validate() const;

  bool operator==(const TrainConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Optimizer

struct ParamBlock {
  std::string name;
  std::vector<double> values;

  bool operator==(const ParamBlock&) const = default;
};
using Parameters = std::vector<ParamBlock>;

struct OptimizerState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t step = 0;

  static OptimizerState zeros_like(const Parameters& params);
};

/// One AdamW update with decoupled weight decay:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
///   theta <- theta - lr (m_hat / (sqrt(v_hat) + eps) + wd theta)
/// Throws TrainingError naming the block if any gradient is non-finite (no
/// state is modified in that case) and ContractError on shape mismatch.
void adamw_step(Parameters& params, const Parameters& grads, OptimizerState& state, double learning_rate,
                const AdamWConfig& cfg);

// ---------------------------------------------------------------------------
// Toy backbone: hashed character n-grams into a linear softmax head.

struct SparseVector {
  std::size_t dim = 0;
  std::vector<std::uint32_t> indices;  // strictly increasing
  std::vector<double> values;

  bool operator==(const SparseVector&) const = default;
};

/// FNV-1a 64 over `bytes`, offset basis xor splitmix64(seed).
std::uint64_t ngram_hash(std::string_view bytes, std::uint64_t seed);

/// Counts of code-point n-grams (orders from spec.toy) hashed into
/// spec.toy.dim buckets. The text is cut to max_seq_len code points first.
SparseVector featurize(std::string_view text, const BackboneSpec& spec);

using Distribution = std::array<double, kNumLabels>;

Distribution softmax(const std::array<double, kNumLabels>& logits);

inline constexpr double kProbFloor = 1e-12;

/// -log(max(probs[gold], kProbFloor)).
double cross_entropy(const Distribution& probs, std::size_t gold);

/// Zero weights ("weights", num_labels x dim, row-major) and bias ("bias").
Parameters init_linear_head(std::size_t dim);

std::array<double, kNumLabels> linear_logits(const Parameters& params, const SparseVector& x);

/// Mean cross-entropy over the batch. When `grads` is non-null it is resized
/// like `params` and receives the analytic gradient of that mean.
double batch_loss(const Parameters& params, std::span<const SparseVector> batch, std::span<const std::size_t> gold,
                  Parameters* grads);

// ---------------------------------------------------------------------------
// Fitted models

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  std::optional<double> dev_micro_f1;
  /// Optimizer steps taken up to the end of this epoch.
  std::uint64_t steps = 0;

  bool operator==(const EpochRecord&) const = default;
};

struct ExternalHandle {
  std::string model_dir;
  std::string runtime;
  std::string runtime_version;
  std::string checkpoint_version;

  bool operator==(const ExternalHandle&) const = default;
};

struct FittedModel {
  /// Member name used in prediction sets and votes; defaults to spec.name.
  std::string name;
  BackboneSpec spec;
  TrainConfig train_config;
  LabelSpace labelspace = LabelSpace::for_task(Task::kTask1a);
  CleanOptions preprocess;
  std::vector<EpochRecord> history;
  int selected_epoch = 0;
  std::variant<Parameters, ExternalHandle> weights;
  std::vector<std::string> warnings;

  bool is_toy() const { return std::holds_alternative<Parameters>(weights); }
};

/// Per-example label distributions. Toy models only; throws ContractError if
/// a feature dimension does not match.
std::vector<Distribution> forward(const FittedModel& model, std::span<const SparseVector> batch);

/// Seeded mini-batch AdamW training of a toy backbone. Inputs must already be
/// cleaned. Deterministic for a given (spec, data, cfg).
FittedModel train(const BackboneSpec& spec, const Dataset& train_set, const Dataset& dev_set,
                  const TrainConfig& cfg);

/// Argmax label per example (ties go to the positive class), confidence is
/// the winning probability. External models are run through the adapter.
PredictionSet predict(const FittedModel& model, const Dataset& data);

/// Environment variable that names the external runtime adapter executable.
inline constexpr const char* kAdapterEnvVar = "ARVOTE_ADAPTER";

/// Fine-tunes an external pretrained checkpoint through the adapter process.
/// Writes the exchange files under `work_dir`.
FittedModel fine_tune_external(const BackboneSpec& spec, const Dataset& train_set, const Dataset& dev_set,
                               const TrainConfig& cfg, const std::filesystem::path& work_dir);

/// Adapter exit status meaning "checkpoint not resolvable".
inline constexpr int kAdapterCheckpointMissing = 10;

// ---------------------------------------------------------------------------
// Checkpoints

inline constexpr const char* kCheckpointMagic = "arvote-checkpoint";
inline constexpr int kCheckpointVersion = 1;

std::string serialize_model(const FittedModel& model);
FittedModel deserialize_model(std::string_view blob, std::string_view source);
void save_model(const FittedModel& model, const std::string& path);
FittedModel load_model(const std::string& path);

/// SHA-256 of the serialized checkpoint.
std::string model_digest(const FittedModel& model);

}  // namespace arvote
