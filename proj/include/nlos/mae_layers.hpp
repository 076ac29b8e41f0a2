#pragma once

// Transformer building blocks with explicit backward passes. Activations are
// row-per-token matrices; linear layers compute y = x W + b with W stored
// (in x out).

#include <Eigen/Core>
#include <cmath>
#include <numbers>
#include <vector>

namespace nlos::mae {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
struct Linear {
  Matrix<T> w;  // in x out
  Matrix<T> b;  // 1 x out
};

template <typename T>
struct LayerNorm {
  Matrix<T> gamma;  // 1 x width
  Matrix<T> beta;   // 1 x width
};

// Pre-norm Transformer block: x + attn(ln1(x)), then + mlp(ln2(.)).
template <typename T>
struct Block {
  LayerNorm<T> ln1;
  Linear<T> qkv;   // width x 3 width, columns [q | k | v], heads contiguous
  Linear<T> proj;  // width x width
  LayerNorm<T> ln2;
  Linear<T> fc1;  // width x 4 width
  Linear<T> fc2;  // 4 width x width
};

inline constexpr double kLayerNormEps = 1e-6;

// --- linear --------------------------------------------------------------

template <typename T>
Matrix<T> linear_forward(const Linear<T>& p, const Matrix<T>& x) {
  Matrix<T> y = x * p.w;
  y.rowwise() += p.b.row(0);
  return y;
}

// Accumulates dW, db into `grad`; returns dx.
template <typename T>
Matrix<T> linear_backward(const Linear<T>& p, const Matrix<T>& x, const Matrix<T>& dy, Linear<T>& grad) {
  grad.w.noalias() += x.transpose() * dy;
  grad.b += dy.colwise().sum();
  return dy * p.w.transpose();
}

// --- layer norm ----------------------------------------------------------

template <typename T>
struct LayerNormCache {
  Matrix<T> xhat;
  Eigen::Matrix<T, Eigen::Dynamic, 1> rstd;
};

template <typename T>
Matrix<T> layernorm_forward(const LayerNorm<T>& p, const Matrix<T>& x, LayerNormCache<T>& cache) {
  const auto n = x.cols();
  cache.xhat.resize(x.rows(), n);
  cache.rstd.resize(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const T mean = x.row(r).mean();
    const T var = (x.row(r).array() - mean).square().sum() / static_cast<T>(n);
    const T rstd = T(1) / std::sqrt(var + static_cast<T>(kLayerNormEps));
    cache.rstd(r) = rstd;
    cache.xhat.row(r) = (x.row(r).array() - mean) * rstd;
  }
  Matrix<T> y = cache.xhat.array().rowwise() * p.gamma.row(0).array();
  y.rowwise() += p.beta.row(0);
  return y;
}

template <typename T>
Matrix<T> layernorm_backward(const LayerNorm<T>& p, const LayerNormCache<T>& cache, const Matrix<T>& dy,
                             LayerNorm<T>& grad) {
  grad.gamma += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  grad.beta += dy.colwise().sum();
  const Matrix<T> dxhat = dy.array().rowwise() * p.gamma.row(0).array();
  const auto n = static_cast<T>(dy.cols());
  Matrix<T> dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const T mean_d = dxhat.row(r).sum() / n;
    const T mean_dx = (dxhat.row(r).array() * cache.xhat.row(r).array()).sum() / n;
    dx.row(r) = cache.rstd(r) * (dxhat.row(r).array() - mean_d - cache.xhat.row(r).array() * mean_dx);
  }
  return dx;
}

// --- GELU (erf form) -----------------------------------------------------

template <typename T>
Matrix<T> gelu(const Matrix<T>& x) {
  const T inv_sqrt2 = static_cast<T>(1.0 / std::numbers::sqrt2);
  return x.unaryExpr([=](T v) { return T(0.5) * v * (T(1) + std::erf(v * inv_sqrt2)); });
}

template <typename T>
Matrix<T> gelu_backward(const Matrix<T>& x, const Matrix<T>& dy) {
  const T inv_sqrt2 = static_cast<T>(1.0 / std::numbers::sqrt2);
  const T inv_sqrt2pi = static_cast<T>(1.0 / std::sqrt(2.0 * std::numbers::pi));
  const Matrix<T> d = x.unaryExpr([=](T v) {
    return T(0.5) * (T(1) + std::erf(v * inv_sqrt2)) + v * inv_sqrt2pi * std::exp(T(-0.5) * v * v);
  });
  return dy.cwiseProduct(d);
}

// --- multi-head self-attention -------------------------------------------

template <typename T>
void softmax_rows(Matrix<T>& s) {
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    const T m = s.row(r).maxCoeff();
    s.row(r) = (s.row(r).array() - m).exp();
    s.row(r) /= s.row(r).sum();
  }
}

// `qkv` is (L x 3w). Returns the concatenated head outputs (L x w) and
// stores one (L x L) probability matrix per head.
template <typename T>
Matrix<T> attention_forward(const Matrix<T>& qkv, std::size_t heads, std::vector<Matrix<T>>& probs) {
  const Eigen::Index len = qkv.rows();
  const Eigen::Index width = qkv.cols() / 3;
  const Eigen::Index dh = width / static_cast<Eigen::Index>(heads);
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  Matrix<T> out(len, width);
  probs.resize(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const Eigen::Index c = static_cast<Eigen::Index>(h) * dh;
    const auto q = qkv.middleCols(c, dh);
    const auto k = qkv.middleCols(width + c, dh);
    const auto v = qkv.middleCols(2 * width + c, dh);
    Matrix<T> s = (q * k.transpose()) * scale;
    softmax_rows(s);
    out.middleCols(c, dh).noalias() = s * v;
    probs[h] = std::move(s);
  }
  return out;
}

template <typename T>
Matrix<T> attention_backward(const Matrix<T>& qkv, const std::vector<Matrix<T>>& probs, const Matrix<T>& dout) {
  const Eigen::Index width = qkv.cols() / 3;
  const auto heads = static_cast<Eigen::Index>(probs.size());
  const Eigen::Index dh = width / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  Matrix<T> dqkv(qkv.rows(), qkv.cols());
  for (Eigen::Index h = 0; h < heads; ++h) {
    const Eigen::Index c = h * dh;
    const auto q = qkv.middleCols(c, dh);
    const auto k = qkv.middleCols(width + c, dh);
    const auto v = qkv.middleCols(2 * width + c, dh);
    const Matrix<T>& a = probs[static_cast<std::size_t>(h)];
    const auto d_o = dout.middleCols(c, dh);
    const Matrix<T> da = d_o * v.transpose();
    // Softmax Jacobian applied row-wise.
    const Eigen::Matrix<T, Eigen::Dynamic, 1> dot = (a.array() * da.array()).rowwise().sum();
    const Matrix<T> ds = (a.array() * (da.array().colwise() - dot.array())).matrix() * scale;
    dqkv.middleCols(c, dh).noalias() = ds * k;
    dqkv.middleCols(width + c, dh).noalias() = ds.transpose() * q;
    dqkv.middleCols(2 * width + c, dh).noalias() = a.transpose() * d_o;
  }
  return dqkv;
}

// --- block ---------------------------------------------------------------

template <typename T>
struct BlockCache {
  LayerNormCache<T> ln1;
  Matrix<T> h1;
  Matrix<T> qkv;
  std::vector<Matrix<T>> probs;
  Matrix<T> attn;
  LayerNormCache<T> ln2;
  Matrix<T> h2;
  Matrix<T> pre_act;
  Matrix<T> act;
};

template <typename T>
Matrix<T> block_forward(const Block<T>& p, std::size_t heads, const Matrix<T>& x, BlockCache<T>& cache) {
  cache.h1 = layernorm_forward(p.ln1, x, cache.ln1);
  cache.qkv = linear_forward(p.qkv, cache.h1);
  cache.attn = attention_forward(cache.qkv, heads, cache.probs);
  Matrix<T> x1 = x + linear_forward(p.proj, cache.attn);
  cache.h2 = layernorm_forward(p.ln2, x1, cache.ln2);
  cache.pre_act = linear_forward(p.fc1, cache.h2);
  cache.act = gelu(cache.pre_act);
  x1 += linear_forward(p.fc2, cache.act);
  return x1;
}

template <typename T>
Matrix<T> block_backward(const Block<T>& p, const BlockCache<T>& cache, const Matrix<T>& dy, Block<T>& grad) {
  // MLP branch.
  Matrix<T> d_act = linear_backward(p.fc2, cache.act, dy, grad.fc2);
  Matrix<T> d_pre = gelu_backward(cache.pre_act, d_act);
  Matrix<T> d_h2 = linear_backward(p.fc1, cache.h2, d_pre, grad.fc1);
  Matrix<T> dx1 = dy + layernorm_backward(p.ln2, cache.ln2, d_h2, grad.ln2);
  // Attention branch.
  Matrix<T> d_attn = linear_backward(p.proj, cache.attn, dx1, grad.proj);
  Matrix<T> d_qkv = attention_backward(cache.qkv, cache.probs, d_attn);
  Matrix<T> d_h1 = linear_backward(p.qkv, cache.h1, d_qkv, grad.qkv);
  return dx1 + layernorm_backward(p.ln1, cache.ln1, d_h1, grad.ln1);
}

}  // namespace nlos::mae
