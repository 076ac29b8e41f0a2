#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nlos/core.hpp"
#include "nlos/io.hpp"
#include "nlos/mae_config.hpp"
#include "nlos/mae_layers.hpp"
#include "nlos/masking.hpp"

namespace nlos::mae {

template <typename T>
struct Params {
  Linear<T> embed;  // n_bins -> enc_width
  std::vector<Block<T>> encoder;
  LayerNorm<T> enc_norm;
  Linear<T> dec_embed;   // enc_width -> dec_width
  Matrix<T> mask_token;  // 1 x dec_width
  std::vector<Block<T>> decoder;
  LayerNorm<T> dec_norm;
  Linear<T> head;  // dec_width -> n_bins
  std::optional<Linear<T>> classifier;  // enc_width -> n_classes

  // Every tensor in a fixed order, with stable names ("encoder.0.attn.qkv.w").
  std::vector<std::pair<std::string, Matrix<T>*>> tensors();
  std::vector<std::pair<std::string, const Matrix<T>*>> tensors() const;

  // Same shapes, all zeros.
  Params zeros_like() const;
  Params& operator+=(const Params& other);
  Params& operator*=(T scale);
};

// Fixed 2D sin-cos table, one row per grid slot (row-major), `width` columns:
// x-coordinate features in the first half, y-coordinate in the second.
template <typename T>
Matrix<T> sincos_positions(std::size_t ny, std::size_t nx, std::size_t width);

template <typename T>
struct Model {
  MaeConfig config;
  Params<T> params;
  Matrix<T> enc_pos;  // tokens x enc_width
  Matrix<T> dec_pos;  // tokens x dec_width

  // Xavier-uniform linear weights, zero biases, unit norm gains, N(0, 0.02)
  // mask token.
  static Model init(const MaeConfig& config, std::uint64_t seed);

  std::size_t parameter_count() const;

  template <typename U>
  Model<U> cast() const;
};

// Layer-level intermediates of one forward pass, kept for backward.
template <typename T>
struct ForwardCache {
  std::vector<std::size_t> visible;  // unmasked scan indices, row-major
  std::vector<std::size_t> hidden;   // masked scan indices
  Matrix<T> tokens;                  // U x n_bins
  std::vector<BlockCache<T>> encoder;
  LayerNormCache<T> enc_norm;
  Matrix<T> latent;  // U x enc_width, after the final encoder norm
  Matrix<T> dec_in;  // U x dec_width, projected latents
  std::vector<BlockCache<T>> decoder;
  LayerNormCache<T> dec_norm;
  Matrix<T> dec_out;  // N x dec_width, normalized
  Matrix<T> raw;      // N x n_bins, decoder predictions for every slot
};

template <typename T>
struct ForwardResult {
  TransientVolume completed;  // measured histograms kept, predictions at masked slots
  Matrix<T> latent;           // U x enc_width
  Matrix<T> raw;              // N x n_bins
};

// Row-per-scan-point view of a volume.
template <typename T>
Matrix<T> to_tokens(const TransientVolume& volume);
template <typename T>
TransientVolume from_tokens(const Matrix<T>& tokens, const ScanGeometry& geometry);

template <typename T>
void forward_pass(const Model<T>& model, const Matrix<T>& all_tokens, const SpmMask& mask, ForwardCache<T>& cache);

template <typename T>
ForwardResult<T> forward(const Model<T>& model, const TransientVolume& volume, const SpmMask& mask);

// Encoder only; returns the U x enc_width latents.
template <typename T>
Matrix<T> encode(const Model<T>& model, const TransientVolume& volume, const SpmMask& mask);

// Mean squared error over every element of every masked scan point. Throws
// when nothing is masked.
template <typename T>
T masked_loss(const Matrix<T>& target, const Matrix<T>& raw, const SpmMask& mask);
template <typename T>
T masked_loss(const TransientVolume& target, const Matrix<T>& raw, const SpmMask& mask);

// d loss / d raw; rows of unmasked slots are exactly zero.
template <typename T>
Matrix<T> masked_loss_gradient(const Matrix<T>& target, const Matrix<T>& raw, const SpmMask& mask);

template <typename T>
struct Gradient {
  T loss;
  Params<T> grads;
};

// Exact gradient of the masked loss for one sample (the target is the
// volume itself). Throws NumericalError naming the first tensor with a
// non-finite gradient.
template <typename T>
Gradient<T> loss_and_gradient(const Model<T>& model, const TransientVolume& volume, const SpmMask& mask);

// Mean loss and mean gradient over a batch. Samples run in parallel; the
// reduction is in sample order, so results do not depend on the thread count.
template <typename T>
Gradient<T> batch_gradient(const Model<T>& model, const std::vector<const TransientVolume*>& volumes,
                           const std::vector<SpmMask>& masks);

// --- optimization --------------------------------------------------------

struct OptimizerConfig {
  double base_lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
  double weight_decay = 0.05;  // linear weights only
  double warmup_epochs = 6.0;
  double min_lr = 0.0;
};

// Linear warm-up from 0 to base_lr over warmup_epochs, then cosine decay to
// min_lr at the end of the last epoch.
double learning_rate(const OptimizerConfig& config, std::size_t step, std::size_t steps_per_epoch,
                     std::size_t total_epochs);

template <typename T>
struct AdamW {
  OptimizerConfig config;
  Params<T> m;
  Params<T> v;
  std::size_t step = 0;

  AdamW(const OptimizerConfig& cfg, const Params<T>& like) : config(cfg), m(like.zeros_like()), v(like.zeros_like()) {}

  // One update at learning rate `lr`. When `trainable` is set, tensors it
  // rejects are left untouched.
  void apply(Params<T>& params, const Params<T>& grads, double lr,
             const std::function<bool(const std::string&)>& trainable = {});
};

struct TrainOptions {
  std::size_t epochs = 10;
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;
  OptimizerConfig optimizer;
  std::optional<double> mask_ratio;  // defaults to the model config's ratio
};

struct EpochLog {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double lr = 0.0;  // learning rate of the epoch's last step
};

// Self-supervised pretraining: shuffled mini-batches, a fresh random mask per
// sample per epoch, AdamW with warm-up + cosine schedule. `on_epoch` runs
// after every epoch (checkpointing). Throws NumericalError on a NaN loss.
template <typename T>
std::vector<EpochLog> train(Model<T>& model, const std::vector<TransientVolume>& samples, const TrainOptions& options,
                            const std::function<void(const EpochLog&, const Model<T>&)>& on_epoch = {});

// Same as train(), loading every container listed in the manifest.
std::vector<EpochLog> train_from_manifest(Model<float>& model, const std::filesystem::path& manifest,
                                          const TrainOptions& options,
                                          const std::function<void(const EpochLog&, const Model<float>&)>& on_epoch = {});

// Mask used for sample `index` in `epoch`.
SpmMask training_mask(const MaeConfig& config, double ratio, std::uint64_t seed, std::size_t epoch,
                      std::size_t index);

// --- classification ------------------------------------------------------

// Adds (or replaces) a linear head over max-pooled encoder latents.
template <typename T>
void init_classifier(Model<T>& model, std::size_t n_classes, std::uint64_t seed);

template <typename T>
std::vector<T> classify(const Model<T>& model, const TransientVolume& volume, const SpmMask& mask);

struct FinetuneOptions {
  std::size_t epochs = 200;
  double lr = 1e-2;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
};

struct FinetuneLog {
  std::vector<double> loss;  // mean cross-entropy per epoch
  double train_accuracy = 0.0;
};

// Trains the classifier head with cross-entropy while the encoder stays
// frozen. Labels are class indices in [0, n_classes).
template <typename T>
FinetuneLog finetune_head(Model<T>& model, const std::vector<TransientVolume>& volumes,
                          const std::vector<std::size_t>& labels, const SpmMask& mask,
                          const FinetuneOptions& options);

// --- checkpoints ---------------------------------------------------------

template <typename T>
io::Checkpoint to_checkpoint(const Model<T>& model);
template <typename T>
Model<T> from_checkpoint(const io::Checkpoint& checkpoint);

}  // namespace nlos::mae
