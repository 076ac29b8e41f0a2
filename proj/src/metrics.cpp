#include "nlos/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nlos {

namespace {

void check_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw ValidationError("metrics: reference and candidate shapes differ");
}

double mean_squared_error(std::span<const double> a, std::span<const double> b) {
  check_same_size(a.size(), b.size());
  if (a.empty()) throw ValidationError("metrics: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

std::vector<double> gaussian_window(std::size_t size, double sigma) {
  std::vector<double> w(size);
  const double c = static_cast<double>(size / 2);
  double sum = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - c;
    w[i] = std::exp(-0.5 * d * d / (sigma * sigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Separable valid-region filtering of a height x width image.
std::vector<double> filter_valid(const std::vector<double>& img, std::size_t h, std::size_t w,
                                 const std::vector<double>& win) {
  const std::size_t k = win.size();
  const std::size_t oh = h - k + 1, ow = w - k + 1;
  std::vector<double> rows(h * ow);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < k; ++i) acc += win[i] * img[y * w + x + i];
      rows[y * ow + x] = acc;
    }
  std::vector<double> out(oh * ow);
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < k; ++i) acc += win[i] * rows[(y + i) * ow + x];
      out[y * ow + x] = acc;
    }
  return out;
}

MetricReport scalar_metrics(std::span<const double> a, std::span<const double> b, double data_range) {
  MetricReport r;
  r.ed = rmse(a, b);
  r.cs = cosine_similarity(a, b);
  r.psnr = psnr(a, b, data_range);
  return r;
}

}  // namespace

double rmse(std::span<const double> a, std::span<const double> b) { return std::sqrt(mean_squared_error(a, b)); }

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  check_same_size(a.size(), b.size());
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 && bb == 0.0) return 1.0;
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

double psnr(std::span<const double> a, std::span<const double> b, double data_range) {
  if (!(data_range > 0.0)) throw ValidationError("metrics: data range must be > 0");
  const double mse = mean_squared_error(a, b);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(data_range * data_range / mse);
}

double ssim(ImageView a, ImageView b, double data_range) {
  if (a.height != b.height || a.width != b.width) throw ValidationError("metrics: image shapes differ");
  check_same_size(a.data.size(), b.data.size());
  if (a.data.size() != a.height * a.width || a.data.empty()) throw ValidationError("metrics: bad image buffer");
  if (!(data_range > 0.0)) throw ValidationError("metrics: data range must be > 0");

  std::size_t win = std::min<std::size_t>(11, std::min(a.height, a.width));
  if (win % 2 == 0) --win;
  const auto window = gaussian_window(win, 1.5);
  const double c1 = (0.01 * data_range) * (0.01 * data_range);
  const double c2 = (0.03 * data_range) * (0.03 * data_range);

  const std::size_t n = a.data.size();
  std::vector<double> x(a.data.begin(), a.data.end()), y(b.data.begin(), b.data.end());
  std::vector<double> xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mx = filter_valid(x, a.height, a.width, window);
  const auto my = filter_valid(y, a.height, a.width, window);
  const auto mxx = filter_valid(xx, a.height, a.width, window);
  const auto myy = filter_valid(yy, a.height, a.width, window);
  const auto mxy = filter_valid(xy, a.height, a.width, window);

  double acc = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = mxx[i] - mx[i] * mx[i];
    const double vy = myy[i] - my[i] * my[i];
    const double cxy = mxy[i] - mx[i] * my[i];
    acc += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cxy + c2)) /
           ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return acc / static_cast<double>(mx.size());
}

MetricReport evaluate(const TransientVolume& reference, const TransientVolume& candidate, double data_range) {
  if (!reference.same_shape(candidate)) throw ValidationError("metrics: transient volume shapes differ");
  MetricReport r = scalar_metrics(reference.data(), candidate.data(), data_range);

  const std::size_t ny = reference.ny(), nx = reference.nx(), nb = reference.n_bins();
  std::vector<double> sa(ny * nx), sb(ny * nx);
  double acc = 0.0;
  for (std::size_t t = 0; t < nb; ++t) {
    for (std::size_t i = 0; i < ny * nx; ++i) {
      sa[i] = reference.data()[i * nb + t];
      sb[i] = candidate.data()[i * nb + t];
    }
    acc += ssim({sa, ny, nx}, {sb, ny, nx}, data_range);
  }
  r.ssim = acc / static_cast<double>(nb);
  return r;
}

MetricReport evaluate(ImageView reference, ImageView candidate, double data_range) {
  MetricReport r = scalar_metrics(reference.data, candidate.data, data_range);
  r.ssim = ssim(reference, candidate, data_range);
  return r;
}

MetricReport evaluate_subset(const TransientVolume& reference, const TransientVolume& candidate,
                             const std::vector<std::size_t>& indices, double data_range) {
  if (!reference.same_shape(candidate)) throw ValidationError("metrics: transient volume shapes differ");
  std::vector<double> a, b;
  a.reserve(indices.size() * reference.n_bins());
  b.reserve(indices.size() * reference.n_bins());
  for (std::size_t i : indices) {
    const auto ha = reference.histogram(i), hb = candidate.histogram(i);
    a.insert(a.end(), ha.begin(), ha.end());
    b.insert(b.end(), hb.begin(), hb.end());
  }
  return scalar_metrics(a, b, data_range);
}

namespace {

std::string format_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

std::string to_csv_long(const MetricReport& r) {
  return "metric,value\ned," + format_value(r.ed) + "\ncs," + format_value(r.cs) + "\nssim," +
         format_value(r.ssim) + "\npsnr," + format_value(r.psnr) + "\n";
}

std::string to_csv_wide(const MetricReport& r) {
  return "ed,cs,ssim,psnr\n" + format_value(r.ed) + "," + format_value(r.cs) + "," + format_value(r.ssim) + "," +
         format_value(r.psnr) + "\n";
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted) {
  if (truth >= n_classes || predicted >= n_classes) throw ValidationError("confusion matrix: class out of range");
  ++counts[truth * n_classes + predicted];
}

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

double ConfusionMatrix::accuracy() const {
  const auto t = total();
  if (t == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < n_classes; ++k) hits += at(k, k);
  return static_cast<double>(hits) / static_cast<double>(t);
}

}  // namespace nlos
