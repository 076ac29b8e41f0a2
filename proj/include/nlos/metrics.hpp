#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nlos/core.hpp"

namespace nlos {

struct MetricReport {
  double ed = 0.0;    // root-mean-square difference
  double cs = 1.0;    // cosine similarity
  double ssim = 1.0;
  double psnr = std::numeric_limits<double>::infinity();  // dB, +inf for identical inputs
};

// Row-major 2D image view over borrowed data.
struct ImageView {
  std::span<const double> data;
  std::size_t height = 0;
  std::size_t width = 0;
};

struct Image {
  std::vector<double> data;
  std::size_t height = 0;
  std::size_t width = 0;

  ImageView view() const { return {data, height, width}; }
};

double rmse(std::span<const double> a, std::span<const double> b);
double cosine_similarity(std::span<const double> a, std::span<const double> b);
double psnr(std::span<const double> a, std::span<const double> b, double data_range);

// Mean SSIM with an 11x11 Gaussian window (sigma 1.5, K1 0.01, K2 0.03),
// valid-region filtering. Images smaller than the window use the largest odd
// window that fits.
double ssim(ImageView a, ImageView b, double data_range);

// ED, CS, PSNR over every element; SSIM averaged over time slices.
MetricReport evaluate(const TransientVolume& reference, const TransientVolume& candidate, double data_range);

MetricReport evaluate(ImageView reference, ImageView candidate, double data_range);

// Metrics restricted to the scan points selected by `indices` (ED, CS, PSNR
// over their histograms; SSIM is left at its default).
MetricReport evaluate_subset(const TransientVolume& reference, const TransientVolume& candidate,
                             const std::vector<std::size_t>& indices, double data_range);

std::string to_csv_long(const MetricReport& report);  // metric,value rows
std::string to_csv_wide(const MetricReport& report);  // ed,cs,ssim,psnr

// counts[truth][predicted]
struct ConfusionMatrix {
  std::size_t n_classes = 0;
  std::vector<std::size_t> counts;

  explicit ConfusionMatrix(std::size_t classes) : n_classes(classes), counts(classes * classes, 0) {}
  void add(std::size_t truth, std::size_t predicted);
  std::size_t at(std::size_t truth, std::size_t predicted) const { return counts[truth * n_classes + predicted]; }
  std::size_t total() const;
  double accuracy() const;
};

}  // namespace nlos
