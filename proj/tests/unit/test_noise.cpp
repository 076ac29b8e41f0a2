#include <cmath>
#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "nlos/noise.hpp"

using namespace nlos;

namespace {

TransientVolume constant_volume(std::size_t n_side, std::size_t bins, double value) {
  TransientVolume v(testutil::small_geometry(n_side, bins));
  std::fill(v.data().begin(), v.data().end(), value);
  return v;
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments moments(const std::vector<double>& x) {
  Moments m;
  for (double v : x) m.mean += v;
  m.mean /= static_cast<double>(x.size());
  for (double v : x) m.var += (v - m.mean) * (v - m.mean);
  m.var /= static_cast<double>(x.size() - 1);
  return m;
}

}  // namespace

TEST_CASE("jitter kernel sums to one") {
  for (double fwhm : {1e-12, 32e-12, 64e-12, 128e-12, 500e-12}) {
    const auto k = jitter_kernel(fwhm, 32e-12);
    CHECK(k.size() % 2 == 1);
    CHECK(std::abs(std::accumulate(k.begin(), k.end(), 0.0) - 1.0) < 1e-12);
    for (std::size_t i = 0; i < k.size() / 2; ++i) CHECK(k[i] == k[k.size() - 1 - i]);
  }
  CHECK(jitter_kernel(0.0, 32e-12) == std::vector<double>{1.0});
  // FWHM 4 bins: sigma = 4 / 2.3548, half width ceil(4 sigma) = 7.
  CHECK(jitter_kernel(128e-12, 32e-12).size() == 15);
}

TEST_CASE("zero FWHM jitter is the identity") {
  const auto v = testutil::random_volume(testutil::small_geometry(4, 32), 2);
  NoiseParams p;
  p.jitter_fwhm = 0.0;
  CHECK(apply_jitter(v, p).data() == v.data());
}

TEST_CASE("jitter preserves an interior impulse's mass") {
  auto v = constant_volume(1, 256, 0.0);
  v.at(0, 0, 100) = 1.0;
  NoiseParams p;
  p.jitter_fwhm = 64e-12;  // two bins
  const auto out = apply_jitter(v, p);
  CHECK(std::abs(std::accumulate(out.data().begin(), out.data().end(), 0.0) - 1.0) < 1e-9);
  CHECK(out.at(0, 0, 100) == *std::max_element(out.data().begin(), out.data().end()));
  CHECK(out.at(0, 0, 99) == doctest::Approx(out.at(0, 0, 101)).epsilon(1e-15));
}

TEST_CASE("jitter leaves a uniform histogram unchanged in the interior") {
  const auto v = constant_volume(2, 128, 0.37);
  NoiseParams p;
  const auto out = apply_jitter(v, p);
  const std::size_t half = jitter_kernel(p.jitter_fwhm, 32e-12).size() / 2;
  for (std::size_t t = half; t + half < 128; ++t) CHECK(std::abs(out.at(1, 1, t) - 0.37) < 1e-9);
  CHECK(out.at(0, 0, 0) < 0.37);  // zero padding at the edge
}

TEST_CASE("jitter matches a direct convolution oracle") {
  const auto v = testutil::random_volume(testutil::small_geometry(2, 40), 17);
  NoiseParams p;
  p.jitter_fwhm = 80e-12;
  const double sigma = 80e-12 / 2.3548 / 32e-12;
  const int half = static_cast<int>(std::ceil(4 * sigma));
  std::vector<double> k;
  for (int i = -half; i <= half; ++i) k.push_back(std::exp(-0.5 * i * i / (sigma * sigma)));
  const double ks = std::accumulate(k.begin(), k.end(), 0.0);
  const auto out = apply_jitter(v, p);
  for (std::size_t s = 0; s < 4; ++s) {
    for (int t = 0; t < 40; ++t) {
      double acc = 0.0;
      for (int j = -half; j <= half; ++j)
        if (t - j >= 0 && t - j < 40) acc += k[static_cast<std::size_t>(j + half)] / ks * v.histogram(s)[static_cast<std::size_t>(t - j)];
      CHECK(out.histogram(s)[static_cast<std::size_t>(t)] == doctest::Approx(acc).epsilon(1e-12));
    }
  }
}

TEST_CASE("bias-only Poisson mean") {
  const auto v = constant_volume(10, 1000, 0.0);  // 1e5 elements
  NoiseParams p;
  p.bias = 5.0;
  p.seed = 11;
  const auto out = apply_spad_noise(v, p);
  const auto m = moments(out.data());
  CHECK(std::abs(m.mean - 5.0) <= 3.0 * std::sqrt(5.0 / 1e5));
  for (double x : out.data()) REQUIRE(x == std::floor(x));
}

TEST_CASE("Poisson moments across intensity levels") {
  const double n = 1e5;
  for (double lambda : {0.5, 5.0, 50.0}) {
    NoiseParams p;
    p.jitter_fwhm = 0.0;
    p.photon_scale = 1.0;
    p.seed = 1;
    const auto out = apply_spad_noise(constant_volume(10, 1000, lambda), p);
    const auto m = moments(out.data());
    INFO("lambda " << lambda << " mean " << m.mean << " var " << m.var);
    CHECK(std::abs(m.mean - lambda) <= 4.0 * std::sqrt(lambda / n));
    // Four standard errors of the sample variance of a Poisson variable.
    CHECK(std::abs(m.var - lambda) <= 4.0 * std::sqrt((lambda + 2.0 * lambda * lambda) / n));
  }
}

TEST_CASE("sample_poisson direct moments at large lambda") {
  CounterRng rng(3, 0);
  std::vector<double> x(50000);
  for (double& v : x) v = static_cast<double>(sample_poisson(200.0, rng));
  const auto m = moments(x);
  CHECK(std::abs(m.mean - 200.0) < 4.0 * std::sqrt(200.0 / 5e4));
  CHECK(std::abs(m.var - 200.0) < 4.0 * std::sqrt((200.0 + 2 * 200.0 * 200.0) / 5e4));
}

TEST_CASE("zero rate gives zero counts") {
  NoiseParams p;
  CHECK(std::all_of(apply_spad_noise(constant_volume(4, 64, 0.0), p).data().begin(),
                    apply_spad_noise(constant_volume(4, 64, 0.0), p).data().end(), [](double x) { return x == 0.0; }));
}

TEST_CASE("noise is deterministic per seed") {
  const auto v = testutil::random_volume(testutil::small_geometry(6, 64), 4);
  NoiseParams p;
  p.bias = 2.0;
  p.seed = 123;
  const auto a = apply_spad_noise(v, p);
  const auto b = apply_spad_noise(v, p);
  CHECK(a.data() == b.data());
  p.seed = 124;
  CHECK(apply_spad_noise(v, p).data() != a.data());
}

TEST_CASE("noise input validation") {
  auto v = constant_volume(2, 8, 0.0);
  v.at(0, 1, 3) = -0.1;
  CHECK_THROWS_AS(apply_spad_noise(v, NoiseParams{}), ValidationError);
  NoiseParams bad;
  bad.bias = -1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = {};
  bad.photon_scale = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = {};
  bad.jitter_fwhm = -1e-12;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}
