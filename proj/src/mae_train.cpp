#include <algorithm>
#include <cmath>
#include <numeric>

#include "nlos/mae.hpp"
#include "nlos/random.hpp"
#include "nlos/scenes.hpp"

namespace nlos::mae {

namespace {

constexpr std::uint64_t kShuffleLabel = 0x73687566666c65ULL;
constexpr std::uint64_t kMaskLabel = 0x6d61736b73ULL;

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  CounterRng rng(derive_seed(seed, kShuffleLabel), epoch);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

template <typename T>
Matrix<T> max_pool(const Matrix<T>& latent) {
  if (latent.rows() == 0) throw ValidationError("classify: no unmasked tokens to pool");
  return latent.colwise().maxCoeff();
}

template <typename T>
Matrix<T> softmax_row(const Matrix<T>& logits) {
  Matrix<T> p = logits;
  softmax_rows(p);
  return p;
}

}  // namespace

SpmMask training_mask(const MaeConfig& config, double ratio, std::uint64_t seed, std::size_t epoch,
                      std::size_t index) {
  return make_random_mask(config.ny, config.nx, ratio,
                          derive_seed(derive_seed(derive_seed(seed, kMaskLabel), epoch), index));
}

template <typename T>
std::vector<EpochLog> train(Model<T>& model, const std::vector<TransientVolume>& samples, const TrainOptions& options,
                            const std::function<void(const EpochLog&, const Model<T>&)>& on_epoch) {
  std::vector<EpochLog> log;
  if (options.epochs == 0) return log;
  if (samples.empty()) throw ValidationError("train: dataset is empty");
  if (options.batch_size < 1) throw ValidationError("train: batch size must be >= 1");
  for (const auto& s : samples) {
    if (s.ny() != model.config.ny || s.nx() != model.config.nx || s.n_bins() != model.config.n_bins) {
      throw ValidationError("train: sample shape does not match the model config");
    }
  }
  const double ratio = options.mask_ratio.value_or(model.config.mask_ratio);
  if (masked_count_for(ratio, model.config.tokens()) == 0) {
    throw ValidationError("train: mask ratio leaves no masked scan points");
  }

  const std::size_t n = samples.size();
  const std::size_t steps_per_epoch = (n + options.batch_size - 1) / options.batch_size;
  AdamW<T> opt(options.optimizer, model.params);
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const auto order = epoch_order(n, options.seed, epoch);
    double loss_sum = 0.0;
    double lr = 0.0;
    for (std::size_t start = 0; start < n; start += options.batch_size) {
      const std::size_t stop = std::min(n, start + options.batch_size);
      std::vector<const TransientVolume*> batch;
      std::vector<SpmMask> masks;
      for (std::size_t i = start; i < stop; ++i) {
        batch.push_back(&samples[order[i]]);
        masks.push_back(training_mask(model.config, ratio, options.seed, epoch, order[i]));
      }
      lr = learning_rate(options.optimizer, step, steps_per_epoch, options.epochs);
      const auto g = batch_gradient(model, batch, masks);
      if (!std::isfinite(static_cast<double>(g.loss))) {
        throw NumericalError("training diverged (non-finite loss) at epoch " + std::to_string(epoch + 1));
      }
      opt.apply(model.params, g.grads, lr);
      loss_sum += static_cast<double>(g.loss) * static_cast<double>(batch.size());
      ++step;
    }
    log.push_back({epoch + 1, loss_sum / static_cast<double>(n), lr});
    if (on_epoch) on_epoch(log.back(), model);
  }
  return log;
}

std::vector<EpochLog> train_from_manifest(Model<float>& model, const std::filesystem::path& manifest,
                                          const TrainOptions& options,
                                          const std::function<void(const EpochLog&, const Model<float>&)>& on_epoch) {
  const auto rows = read_manifest(manifest);
  std::vector<TransientVolume> samples;
  samples.reserve(rows.size());
  for (const auto& row : rows) samples.push_back(io::read_transient(manifest.parent_path() / row.file));
  return train(model, samples, options, on_epoch);
}

// --- classification ------------------------------------------------------

template <typename T>
void init_classifier(Model<T>& model, std::size_t n_classes, std::uint64_t seed) {
  if (n_classes < 2) throw ValidationError("classifier: need at least 2 classes");
  CounterRng rng(derive_seed(seed, 0x636c73ULL), 0);
  const double limit = std::sqrt(6.0 / static_cast<double>(model.config.enc_width + n_classes));
  Linear<T> head;
  head.w.resize(static_cast<Eigen::Index>(model.config.enc_width), static_cast<Eigen::Index>(n_classes));
  for (Eigen::Index i = 0; i < head.w.size(); ++i) head.w.data()[i] = static_cast<T>(rng.uniform(-limit, limit));
  head.b = Matrix<T>::Zero(1, static_cast<Eigen::Index>(n_classes));
  model.params.classifier = std::move(head);
}

template <typename T>
std::vector<T> classify(const Model<T>& model, const TransientVolume& volume, const SpmMask& mask) {
  if (!model.params.classifier) throw ValidationError("classify: model has no classification head");
  const Matrix<T> pooled = max_pool(encode(model, volume, mask));
  const Matrix<T> logits = linear_forward(*model.params.classifier, pooled);
  return std::vector<T>(logits.data(), logits.data() + logits.size());
}

template <typename T>
FinetuneLog finetune_head(Model<T>& model, const std::vector<TransientVolume>& volumes,
                          const std::vector<std::size_t>& labels, const SpmMask& mask,
                          const FinetuneOptions& options) {
  if (!model.params.classifier) throw ValidationError("finetune: model has no classification head");
  if (volumes.empty() || volumes.size() != labels.size()) throw ValidationError("finetune: need one label per volume");
  const auto n_classes = static_cast<std::size_t>(model.params.classifier->w.cols());
  for (auto l : labels) {
    if (l >= n_classes) throw ValidationError("finetune: label out of range");
  }

  // The encoder is frozen, so pooled features are computed once.
  const auto n = static_cast<Eigen::Index>(volumes.size());
  Matrix<T> features(n, static_cast<Eigen::Index>(model.config.enc_width));
#pragma omp parallel for schedule(dynamic, 1)
  for (Eigen::Index i = 0; i < n; ++i) {
    features.row(i) = max_pool(encode(model, volumes[static_cast<std::size_t>(i)], mask));
  }

  OptimizerConfig oc;
  oc.base_lr = options.lr;
  oc.weight_decay = options.weight_decay;
  oc.beta2 = 0.999;
  AdamW<T> opt(oc, model.params);
  const auto only_head = [](const std::string& name) { return name.rfind("classifier.", 0) == 0; };

  FinetuneLog log;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    Gradient<T> g{T(0), model.params.zeros_like()};
    auto& gh = *g.grads.classifier;
    const Matrix<T> logits = linear_forward(*model.params.classifier, features);
    Matrix<T> dlogits(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      const Matrix<T> p = softmax_row<T>(logits.row(i));
      const auto y = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]);
      g.loss -= std::log(std::max(p(0, y), std::numeric_limits<T>::min()));
      dlogits.row(i) = p;
      dlogits(i, y) -= T(1);
    }
    dlogits /= static_cast<T>(n);
    g.loss /= static_cast<T>(n);
    linear_backward(*model.params.classifier, features, dlogits, gh);
    if (!std::isfinite(static_cast<double>(g.loss))) throw NumericalError("finetune diverged");
    opt.apply(model.params, g.grads, options.lr, only_head);
    log.loss.push_back(static_cast<double>(g.loss));
  }

  const Matrix<T> logits = linear_forward(*model.params.classifier, features);
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    logits.row(i).maxCoeff(&best);
    if (static_cast<std::size_t>(best) == labels[static_cast<std::size_t>(i)]) ++hits;
  }
  log.train_accuracy = static_cast<double>(hits) / static_cast<double>(n);
  return log;
}

#define NLOS_MAE_TRAIN_INSTANTIATE(T)                                                                       \
  template std::vector<EpochLog> train<T>(Model<T>&, const std::vector<TransientVolume>&, const TrainOptions&, \
                                          const std::function<void(const EpochLog&, const Model<T>&)>&);   \
  template void init_classifier<T>(Model<T>&, std::size_t, std::uint64_t);                                \
  template std::vector<T> classify<T>(const Model<T>&, const TransientVolume&, const SpmMask&);            \
  template FinetuneLog finetune_head<T>(Model<T>&, const std::vector<TransientVolume>&,                    \
                                        const std::vector<std::size_t>&, const SpmMask&, const FinetuneOptions&);

NLOS_MAE_TRAIN_INSTANTIATE(float)
NLOS_MAE_TRAIN_INSTANTIATE(double)

}  // namespace nlos::mae
