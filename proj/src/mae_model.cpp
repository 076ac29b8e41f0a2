#include <cmath>
#include <numbers>
#include <string>

#include "nlos/mae.hpp"
#include "nlos/random.hpp"

namespace nlos {

void MaeConfig::validate() const {
  for (std::size_t v : {n_bins, ny, nx, enc_width, enc_depth, enc_heads, dec_width, dec_depth, dec_heads}) {
    if (v < 1) throw ValidationError("mae config: all sizes must be >= 1");
  }
  if (enc_width % enc_heads != 0 || dec_width % dec_heads != 0) {
    throw ValidationError("mae config: widths must be divisible by head counts");
  }
  if (enc_width % 4 != 0 || dec_width % 4 != 0) {
    throw ValidationError("mae config: widths must be divisible by 4 for 2D positional embeddings");
  }
  if (!(mask_ratio >= 0.0 && mask_ratio <= 1.0)) throw ValidationError("mae config: mask ratio must lie in [0, 1]");
}

MaeConfig desk_config() { return MaeConfig{}; }

MaeConfig full_config() {
  MaeConfig c;
  c.ny = 64;
  c.nx = 64;
  c.n_bins = 512;
  c.enc_width = 1024;
  c.enc_depth = 24;
  c.enc_heads = 16;
  c.dec_width = 512;
  c.dec_depth = 8;
  c.dec_heads = 16;
  c.mask_ratio = 0.95;
  return c;
}

MaeConfig gradcheck_config() {
  MaeConfig c;
  c.n_bins = 8;
  c.ny = 4;
  c.nx = 4;
  c.enc_width = 16;
  c.enc_depth = 1;
  c.enc_heads = 2;
  c.dec_width = 16;
  c.dec_depth = 1;
  c.dec_heads = 2;
  c.mask_ratio = 0.5;
  return c;
}

std::size_t parameter_count(const MaeConfig& c) {
  const auto block = [](std::size_t w) { return 12 * w * w + 13 * w; };
  const std::size_t e = c.enc_width, d = c.dec_width, t = c.n_bins;
  return (t * e + e) + c.enc_depth * block(e) + 2 * e + (e * d + d) + d + c.dec_depth * block(d) + 2 * d +
         (d * t + t);
}

MaeConfig config_preset(const std::string& name) {
  if (name == "tiny" || name == "desk") return desk_config();
  if (name == "full") return full_config();
  if (name == "gradcheck") return gradcheck_config();
  throw ValidationError("unknown config preset '" + name + "' (expected tiny, full or gradcheck)");
}

}  // namespace nlos

namespace nlos::mae {

namespace {

template <typename T, typename P, typename F>
void visit_linear(const std::string& name, P& lin, F& f) {
  f(name + ".w", lin.w);
  f(name + ".b", lin.b);
}

template <typename T, typename P, typename F>
void visit_norm(const std::string& name, P& n, F& f) {
  f(name + ".gamma", n.gamma);
  f(name + ".beta", n.beta);
}

template <typename T, typename P, typename F>
void visit_block(const std::string& name, P& b, F& f) {
  visit_norm<T>(name + ".ln1", b.ln1, f);
  visit_linear<T>(name + ".attn.qkv", b.qkv, f);
  visit_linear<T>(name + ".attn.proj", b.proj, f);
  visit_norm<T>(name + ".ln2", b.ln2, f);
  visit_linear<T>(name + ".mlp.fc1", b.fc1, f);
  visit_linear<T>(name + ".mlp.fc2", b.fc2, f);
}

// Works for both const and mutable Params.
template <typename T, typename P, typename F>
void visit_params(P& p, F&& f) {
  visit_linear<T>("embed", p.embed, f);
  for (std::size_t i = 0; i < p.encoder.size(); ++i) visit_block<T>("encoder." + std::to_string(i), p.encoder[i], f);
  visit_norm<T>("enc_norm", p.enc_norm, f);
  visit_linear<T>("dec_embed", p.dec_embed, f);
  f(std::string("mask_token"), p.mask_token);
  for (std::size_t i = 0; i < p.decoder.size(); ++i) visit_block<T>("decoder." + std::to_string(i), p.decoder[i], f);
  visit_norm<T>("dec_norm", p.dec_norm, f);
  visit_linear<T>("head", p.head, f);
  if (p.classifier) visit_linear<T>("classifier", *p.classifier, f);
}

template <typename T>
Matrix<T> xavier(std::size_t in, std::size_t out, CounterRng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  Matrix<T> m(static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(out));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(rng.uniform(-limit, limit));
  return m;
}

template <typename T>
Linear<T> make_linear(std::size_t in, std::size_t out, CounterRng& rng) {
  return {xavier<T>(in, out, rng), Matrix<T>::Zero(1, static_cast<Eigen::Index>(out))};
}

template <typename T>
LayerNorm<T> make_norm(std::size_t width) {
  const auto w = static_cast<Eigen::Index>(width);
  return {Matrix<T>::Ones(1, w), Matrix<T>::Zero(1, w)};
}

template <typename T>
Block<T> make_block(std::size_t width, CounterRng& rng) {
  Block<T> b;
  b.ln1 = make_norm<T>(width);
  b.qkv = make_linear<T>(width, 3 * width, rng);
  b.proj = make_linear<T>(width, width, rng);
  b.ln2 = make_norm<T>(width);
  b.fc1 = make_linear<T>(width, 4 * width, rng);
  b.fc2 = make_linear<T>(4 * width, width, rng);
  return b;
}

template <typename T>
void check_finite(const Params<T>& grads) {
  for (const auto& [name, m] : grads.tensors()) {
    if (!m->allFinite()) throw NumericalError("non-finite gradient in tensor '" + name + "'");
  }
}

}  // namespace

template <typename T>
std::vector<std::pair<std::string, Matrix<T>*>> Params<T>::tensors() {
  std::vector<std::pair<std::string, Matrix<T>*>> out;
  visit_params<T>(*this, [&](const std::string& n, Matrix<T>& m) { out.emplace_back(n, &m); });
  return out;
}

template <typename T>
std::vector<std::pair<std::string, const Matrix<T>*>> Params<T>::tensors() const {
  std::vector<std::pair<std::string, const Matrix<T>*>> out;
  visit_params<T>(*this, [&](const std::string& n, const Matrix<T>& m) { out.emplace_back(n, &m); });
  return out;
}

template <typename T>
Params<T> Params<T>::zeros_like() const {
  Params<T> z = *this;
  for (auto& [name, m] : z.tensors()) m->setZero();
  return z;
}

template <typename T>
Params<T>& Params<T>::operator+=(const Params<T>& other) {
  auto mine = tensors();
  const auto theirs = other.tensors();
  if (mine.size() != theirs.size()) throw ValidationError("params: tensor lists differ");
  for (std::size_t i = 0; i < mine.size(); ++i) *mine[i].second += *theirs[i].second;
  return *this;
}

template <typename T>
Params<T>& Params<T>::operator*=(T scale) {
  for (auto& [name, m] : tensors()) *m *= scale;
  return *this;
}

template <typename T>
Matrix<T> sincos_positions(std::size_t ny, std::size_t nx, std::size_t width) {
  if (width % 4 != 0) throw ValidationError("positional embedding width must be divisible by 4");
  const std::size_t quarter = width / 4;
  Matrix<T> pos(static_cast<Eigen::Index>(ny * nx), static_cast<Eigen::Index>(width));
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const auto row = static_cast<Eigen::Index>(iy * nx + ix);
      for (std::size_t k = 0; k < quarter; ++k) {
        const double omega = 1.0 / std::pow(10000.0, static_cast<double>(k) / static_cast<double>(quarter));
        const double ax = static_cast<double>(ix) * omega;
        const double ay = static_cast<double>(iy) * omega;
        pos(row, static_cast<Eigen::Index>(k)) = static_cast<T>(std::sin(ax));
        pos(row, static_cast<Eigen::Index>(quarter + k)) = static_cast<T>(std::cos(ax));
        pos(row, static_cast<Eigen::Index>(2 * quarter + k)) = static_cast<T>(std::sin(ay));
        pos(row, static_cast<Eigen::Index>(3 * quarter + k)) = static_cast<T>(std::cos(ay));
      }
    }
  }
  return pos;
}

template <typename T>
Model<T> Model<T>::init(const MaeConfig& config, std::uint64_t seed) {
  config.validate();
  Model<T> m;
  m.config = config;
  std::uint64_t stream = 0;
  auto next_rng = [&] { return CounterRng(seed, ++stream); };

  auto rng = next_rng();
  m.params.embed = make_linear<T>(config.n_bins, config.enc_width, rng);
  for (std::size_t i = 0; i < config.enc_depth; ++i) {
    auto r = next_rng();
    m.params.encoder.push_back(make_block<T>(config.enc_width, r));
  }
  m.params.enc_norm = make_norm<T>(config.enc_width);
  rng = next_rng();
  m.params.dec_embed = make_linear<T>(config.enc_width, config.dec_width, rng);
  rng = next_rng();
  m.params.mask_token.resize(1, static_cast<Eigen::Index>(config.dec_width));
  for (Eigen::Index i = 0; i < m.params.mask_token.size(); ++i) {
    m.params.mask_token.data()[i] = static_cast<T>(0.02 * rng.normal());
  }
  for (std::size_t i = 0; i < config.dec_depth; ++i) {
    auto r = next_rng();
    m.params.decoder.push_back(make_block<T>(config.dec_width, r));
  }
  m.params.dec_norm = make_norm<T>(config.dec_width);
  rng = next_rng();
  m.params.head = make_linear<T>(config.dec_width, config.n_bins, rng);

  m.enc_pos = sincos_positions<T>(config.ny, config.nx, config.enc_width);
  m.dec_pos = sincos_positions<T>(config.ny, config.nx, config.dec_width);
  return m;
}

template <typename T>
std::size_t Model<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, m] : params.tensors()) n += static_cast<std::size_t>(m->size());
  return n;
}

template <typename T>
template <typename U>
Model<U> Model<T>::cast() const {
  Model<U> out = Model<U>::init(config, 0);
  if (params.classifier) {
    out.params.classifier = Linear<U>{params.classifier->w.template cast<U>(), params.classifier->b.template cast<U>()};
  }
  auto dst = out.params.tensors();
  const auto src = params.tensors();
  for (std::size_t i = 0; i < src.size(); ++i) *dst[i].second = src[i].second->template cast<U>();
  out.enc_pos = enc_pos.template cast<U>();
  out.dec_pos = dec_pos.template cast<U>();
  return out;
}

// --- forward -------------------------------------------------------------

template <typename T>
Matrix<T> to_tokens(const TransientVolume& volume) {
  Matrix<T> m(static_cast<Eigen::Index>(volume.geometry().scan_count()), static_cast<Eigen::Index>(volume.n_bins()));
  const auto& d = volume.data();
  for (std::size_t i = 0; i < d.size(); ++i) m.data()[i] = static_cast<T>(d[i]);
  return m;
}

template <typename T>
TransientVolume from_tokens(const Matrix<T>& tokens, const ScanGeometry& geometry) {
  if (static_cast<std::size_t>(tokens.rows()) != geometry.scan_count() ||
      static_cast<std::size_t>(tokens.cols()) != geometry.n_bins) {
    throw ValidationError("token matrix does not match the scan geometry");
  }
  std::vector<double> data(static_cast<std::size_t>(tokens.size()));
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<double>(tokens.data()[i]);
  return TransientVolume(geometry, std::move(data));
}

namespace {

void check_shapes(const MaeConfig& config, std::size_t rows, std::size_t cols, const SpmMask& mask) {
  if (rows != config.tokens() || cols != config.n_bins) {
    throw ValidationError("mae: input of " + std::to_string(rows) + " tokens x " + std::to_string(cols) +
                          " bins does not match model (" + std::to_string(config.ny) + "x" +
                          std::to_string(config.nx) + " x " + std::to_string(config.n_bins) + ")");
  }
  if (mask.ny != config.ny || mask.nx != config.nx || mask.masked.size() != config.tokens()) {
    throw ValidationError("mae: mask grid does not match model grid");
  }
}

template <typename T>
void encoder_pass(const Model<T>& model, const Matrix<T>& all_tokens, const SpmMask& mask, ForwardCache<T>& cache) {
  check_shapes(model.config, static_cast<std::size_t>(all_tokens.rows()), static_cast<std::size_t>(all_tokens.cols()),
               mask);
  cache.visible = mask.unmasked_indices();
  cache.hidden = mask.masked_indices();
  const auto u = static_cast<Eigen::Index>(cache.visible.size());
  cache.tokens.resize(u, all_tokens.cols());
  Matrix<T> pos(u, model.enc_pos.cols());
  for (Eigen::Index k = 0; k < u; ++k) {
    const auto src = static_cast<Eigen::Index>(cache.visible[static_cast<std::size_t>(k)]);
    cache.tokens.row(k) = all_tokens.row(src);
    pos.row(k) = model.enc_pos.row(src);
  }
  Matrix<T> x = linear_forward(model.params.embed, cache.tokens) + pos;
  cache.encoder.resize(model.params.encoder.size());
  for (std::size_t b = 0; b < model.params.encoder.size(); ++b) {
    x = block_forward(model.params.encoder[b], model.config.enc_heads, x, cache.encoder[b]);
  }
  cache.latent = layernorm_forward(model.params.enc_norm, x, cache.enc_norm);
}

}  // namespace

template <typename T>
void forward_pass(const Model<T>& model, const Matrix<T>& all_tokens, const SpmMask& mask, ForwardCache<T>& cache) {
  encoder_pass(model, all_tokens, mask, cache);
  cache.dec_in = linear_forward(model.params.dec_embed, cache.latent);
  Matrix<T> x = model.dec_pos;
  for (std::size_t k = 0; k < cache.visible.size(); ++k) {
    x.row(static_cast<Eigen::Index>(cache.visible[k])) += cache.dec_in.row(static_cast<Eigen::Index>(k));
  }
  for (std::size_t i : cache.hidden) x.row(static_cast<Eigen::Index>(i)) += model.params.mask_token.row(0);
  cache.decoder.resize(model.params.decoder.size());
  for (std::size_t b = 0; b < model.params.decoder.size(); ++b) {
    x = block_forward(model.params.decoder[b], model.config.dec_heads, x, cache.decoder[b]);
  }
  cache.dec_out = layernorm_forward(model.params.dec_norm, x, cache.dec_norm);
  cache.raw = linear_forward(model.params.head, cache.dec_out);
}

template <typename T>
ForwardResult<T> forward(const Model<T>& model, const TransientVolume& volume, const SpmMask& mask) {
  ForwardCache<T> cache;
  forward_pass(model, to_tokens<T>(volume), mask, cache);
  const TransientVolume predicted = from_tokens(cache.raw, volume.geometry());
  return {combine_predictions(volume, predicted, mask), std::move(cache.latent), std::move(cache.raw)};
}

template <typename T>
Matrix<T> encode(const Model<T>& model, const TransientVolume& volume, const SpmMask& mask) {
  ForwardCache<T> cache;
  encoder_pass(model, to_tokens<T>(volume), mask, cache);
  return std::move(cache.latent);
}

// --- loss ----------------------------------------------------------------

template <typename T>
T masked_loss(const Matrix<T>& target, const Matrix<T>& raw, const SpmMask& mask) {
  if (target.rows() != raw.rows() || target.cols() != raw.cols()) throw ValidationError("masked loss: shapes differ");
  if (static_cast<std::size_t>(raw.rows()) != mask.size()) throw ValidationError("masked loss: mask size mismatch");
  const auto hidden = mask.masked_indices();
  if (hidden.empty()) throw ValidationError("masked loss: no masked scan points, loss undefined");
  T acc = 0;
  for (std::size_t i : hidden) {
    const auto r = static_cast<Eigen::Index>(i);
    acc += (raw.row(r) - target.row(r)).squaredNorm();
  }
  return acc / static_cast<T>(hidden.size() * static_cast<std::size_t>(raw.cols()));
}

template <typename T>
T masked_loss(const TransientVolume& target, const Matrix<T>& raw, const SpmMask& mask) {
  return masked_loss(to_tokens<T>(target), raw, mask);
}

template <typename T>
Matrix<T> masked_loss_gradient(const Matrix<T>& target, const Matrix<T>& raw, const SpmMask& mask) {
  if (target.rows() != raw.rows() || target.cols() != raw.cols()) throw ValidationError("masked loss: shapes differ");
  const auto hidden = mask.masked_indices();
  if (hidden.empty()) throw ValidationError("masked loss: no masked scan points, loss undefined");
  const T scale = T(2) / static_cast<T>(hidden.size() * static_cast<std::size_t>(raw.cols()));
  Matrix<T> d = Matrix<T>::Zero(raw.rows(), raw.cols());
  for (std::size_t i : hidden) {
    const auto r = static_cast<Eigen::Index>(i);
    d.row(r) = scale * (raw.row(r) - target.row(r));
  }
  return d;
}

// --- backward ------------------------------------------------------------

template <typename T>
Gradient<T> loss_and_gradient(const Model<T>& model, const TransientVolume& volume, const SpmMask& mask) {
  const Matrix<T> target = to_tokens<T>(volume);
  ForwardCache<T> cache;
  forward_pass(model, target, mask, cache);

  Gradient<T> out{masked_loss(target, cache.raw, mask), model.params.zeros_like()};
  auto& g = out.grads;
  const auto& p = model.params;

  const Matrix<T> d_raw = masked_loss_gradient(target, cache.raw, mask);
  Matrix<T> dx = linear_backward(p.head, cache.dec_out, d_raw, g.head);
  dx = layernorm_backward(p.dec_norm, cache.dec_norm, dx, g.dec_norm);
  for (std::size_t b = p.decoder.size(); b-- > 0;) dx = block_backward(p.decoder[b], cache.decoder[b], dx, g.decoder[b]);

  // Decoder input: projected latents at visible slots, mask token elsewhere;
  // positional embeddings are fixed.
  for (std::size_t i : cache.hidden) g.mask_token.row(0) += dx.row(static_cast<Eigen::Index>(i));
  Matrix<T> d_dec_in(static_cast<Eigen::Index>(cache.visible.size()), dx.cols());
  for (std::size_t k = 0; k < cache.visible.size(); ++k) {
    d_dec_in.row(static_cast<Eigen::Index>(k)) = dx.row(static_cast<Eigen::Index>(cache.visible[k]));
  }
  Matrix<T> de = linear_backward(p.dec_embed, cache.latent, d_dec_in, g.dec_embed);
  de = layernorm_backward(p.enc_norm, cache.enc_norm, de, g.enc_norm);
  for (std::size_t b = p.encoder.size(); b-- > 0;) de = block_backward(p.encoder[b], cache.encoder[b], de, g.encoder[b]);
  linear_backward(p.embed, cache.tokens, de, g.embed);

  check_finite(g);
  return out;
}

template <typename T>
Gradient<T> batch_gradient(const Model<T>& model, const std::vector<const TransientVolume*>& volumes,
                           const std::vector<SpmMask>& masks) {
  if (volumes.empty() || volumes.size() != masks.size()) throw ValidationError("batch: need one mask per volume");
  std::vector<std::optional<Gradient<T>>> per_sample(volumes.size());
  std::vector<std::string> errors(volumes.size());
  const auto n = static_cast<std::ptrdiff_t>(volumes.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      per_sample[k] = loss_and_gradient(model, *volumes[k], masks[k]);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }
  for (std::size_t k = 0; k < errors.size(); ++k) {
    if (!errors[k].empty()) throw NumericalError("batch sample " + std::to_string(k) + ": " + errors[k]);
  }
  Gradient<T> total = std::move(*per_sample[0]);
  for (std::size_t k = 1; k < per_sample.size(); ++k) {
    total.loss += per_sample[k]->loss;
    total.grads += per_sample[k]->grads;
  }
  const T inv = T(1) / static_cast<T>(volumes.size());
  total.loss *= inv;
  total.grads *= inv;
  return total;
}

// --- optimizer -----------------------------------------------------------

double learning_rate(const OptimizerConfig& config, std::size_t step, std::size_t steps_per_epoch,
                     std::size_t total_epochs) {
  const double warm = config.warmup_epochs * static_cast<double>(steps_per_epoch);
  const double total = static_cast<double>(total_epochs * steps_per_epoch);
  const double s = static_cast<double>(step);
  if (s < warm) return config.base_lr * s / warm;
  if (total <= warm) return config.base_lr;
  const double progress = std::min(1.0, (s - warm) / (total - warm));
  return config.min_lr + (config.base_lr - config.min_lr) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

template <typename T>
void AdamW<T>::apply(Params<T>& params, const Params<T>& grads, double lr,
                     const std::function<bool(const std::string&)>& trainable) {
  ++step;
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m1 = m.tensors();
  auto m2 = v.tensors();
  if (p.size() != g.size() || p.size() != m1.size()) throw ValidationError("adamw: parameter layout changed");
  const T b1 = static_cast<T>(config.beta1), b2 = static_cast<T>(config.beta2);
  const T c1 = static_cast<T>(1.0 - std::pow(config.beta1, static_cast<double>(step)));
  const T c2 = static_cast<T>(1.0 - std::pow(config.beta2, static_cast<double>(step)));
  const T eps = static_cast<T>(config.eps);
  const T lr_t = static_cast<T>(lr);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::string& name = p[i].first;
    if (trainable && !trainable(name)) continue;
    auto& w = *p[i].second;
    const auto& gi = *g[i].second;
    auto& mi = *m1[i].second;
    auto& vi = *m2[i].second;
    mi = b1 * mi + (T(1) - b1) * gi;
    vi = b2 * vi + (T(1) - b2) * gi.cwiseProduct(gi);
    const bool decay = name.size() > 2 && name.compare(name.size() - 2, 2, ".w") == 0;
    if (decay && config.weight_decay > 0.0) w *= (T(1) - lr_t * static_cast<T>(config.weight_decay));
    w.array() -= lr_t * ((mi.array() / c1) / ((vi.array() / c2).sqrt() + eps));
  }
}

// --- checkpoints ---------------------------------------------------------

template <typename T>
io::Checkpoint to_checkpoint(const Model<T>& model) {
  io::Checkpoint ck;
  ck.config = model.config;
  for (const auto& [name, m] : model.params.tensors()) {
    io::NamedTensor t;
    t.name = name;
    t.dims = {static_cast<std::uint32_t>(m->rows()), static_cast<std::uint32_t>(m->cols())};
    t.data.resize(static_cast<std::size_t>(m->size()));
    for (std::size_t i = 0; i < t.data.size(); ++i) t.data[i] = static_cast<float>(m->data()[i]);
    ck.tensors.push_back(std::move(t));
  }
  return ck;
}

template <typename T>
Model<T> from_checkpoint(const io::Checkpoint& ck) {
  Model<T> model = Model<T>::init(ck.config, 0);
  if (const auto* cls = ck.find("classifier.w")) {
    if (cls->dims.size() != 2) throw ValidationError("checkpoint: classifier.w must be rank 2");
    init_classifier(model, cls->dims[1], 0);
  }
  for (auto& [name, m] : model.params.tensors()) {
    const auto* t = ck.find(name);
    if (!t) throw ValidationError("checkpoint: missing tensor '" + name + "'");
    if (t->dims.size() != 2 || t->dims[0] != m->rows() || t->dims[1] != m->cols()) {
      throw ValidationError("checkpoint: tensor '" + name + "' has the wrong shape");
    }
    for (std::size_t i = 0; i < t->data.size(); ++i) m->data()[i] = static_cast<T>(t->data[i]);
  }
  return model;
}

#define NLOS_MAE_INSTANTIATE(T)                                                                                  \
  template struct Params<T>;                                                                                     \
  template struct Model<T>;                                                                                      \
  template struct AdamW<T>;                                                                                      \
  template Matrix<T> sincos_positions<T>(std::size_t, std::size_t, std::size_t);                                 \
  template Matrix<T> to_tokens<T>(const TransientVolume&);                                                      \
  template TransientVolume from_tokens<T>(const Matrix<T>&, const ScanGeometry&);                               \
  template void forward_pass<T>(const Model<T>&, const Matrix<T>&, const SpmMask&, ForwardCache<T>&);           \
  template ForwardResult<T> forward<T>(const Model<T>&, const TransientVolume&, const SpmMask&);                \
  template Matrix<T> encode<T>(const Model<T>&, const TransientVolume&, const SpmMask&);                        \
  template T masked_loss<T>(const Matrix<T>&, const Matrix<T>&, const SpmMask&);                                \
  template T masked_loss<T>(const TransientVolume&, const Matrix<T>&, const SpmMask&);                          \
  template Matrix<T> masked_loss_gradient<T>(const Matrix<T>&, const Matrix<T>&, const SpmMask&);               \
  template Gradient<T> loss_and_gradient<T>(const Model<T>&, const TransientVolume&, const SpmMask&);           \
  template Gradient<T> batch_gradient<T>(const Model<T>&, const std::vector<const TransientVolume*>&,           \
                                         const std::vector<SpmMask>&);                                          \
  template io::Checkpoint to_checkpoint<T>(const Model<T>&);                                                    \
  template Model<T> from_checkpoint<T>(const io::Checkpoint&);

NLOS_MAE_INSTANTIATE(float)
NLOS_MAE_INSTANTIATE(double)

template Model<double> Model<float>::cast<double>() const;
template Model<float> Model<double>::cast<float>() const;
template Model<float> Model<float>::cast<float>() const;
template Model<double> Model<double>::cast<double>() const;

}  // namespace nlos::mae
