#include <cmath>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "nlos/masking.hpp"

using namespace nlos;

TEST_CASE("random mask counts follow the floor rule") {
  const auto m = make_random_mask(64, 64, 0.95, 7);
  CHECK(static_cast<std::size_t>(std::floor(0.95 * 4096)) == 3891);
  CHECK(m.masked_count() == 3891);
  CHECK(m.unmasked_count() == 205);
  CHECK(make_random_mask(64, 64, 0.0, 1).masked_count() == 0);
  CHECK(make_random_mask(64, 64, 1.0, 1).masked_count() == 4096);
  for (double r : {0.5, 0.8, 0.9}) CHECK(make_random_mask(64, 64, r, 3).masked_count() == masked_count_for(r, 4096));
  CHECK(masked_count_for(0.8, 4096) == 3276);
  CHECK(masked_count_for(0.9, 4096) == 3686);
  CHECK_THROWS_AS(make_random_mask(4, 4, 1.01, 0), ValidationError);
  CHECK_THROWS_AS(make_random_mask(4, 4, -0.1, 0), ValidationError);
}

TEST_CASE("random masks are deterministic and seed dependent") {
  const auto a = make_random_mask(16, 16, 0.5, 9);
  CHECK(a.masked == make_random_mask(16, 16, 0.5, 9).masked);
  CHECK(a.masked != make_random_mask(16, 16, 0.5, 10).masked);
}

TEST_CASE("random masks are roughly uniform over positions") {
  std::vector<int> hits(64, 0);
  for (std::uint64_t s = 0; s < 2000; ++s) {
    const auto m = make_random_mask(8, 8, 0.25, s);
    for (std::size_t i = 0; i < 64; ++i) hits[i] += m.masked[i];
  }
  // Each slot is masked with probability 16/64; 2000 trials.
  for (int h : hits) CHECK(std::abs(h - 500) < 5 * std::sqrt(2000 * 0.25 * 0.75));
}

TEST_CASE("regular masks") {
  CHECK(make_regular_mask(64, 64, 1).masked_count() == 0);
  CHECK(make_regular_mask(64, 64, 4).unmasked_count() == 256);
  const auto one = make_regular_mask(64, 64, 64);
  CHECK(one.unmasked_count() == 1);
  CHECK_FALSE(one.is_masked(0));
  CHECK_THROWS_AS(make_regular_mask(4, 4, 0), ValidationError);
}

TEST_CASE("partition invariant") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto m = make_random_mask(7, 9, 0.37, s);
    const auto u = m.unmasked_indices(), k = m.masked_indices();
    CHECK(u.size() + k.size() == 63);
    std::set<std::size_t> all(u.begin(), u.end());
    all.insert(k.begin(), k.end());
    CHECK(all.size() == 63);
  }
}

TEST_CASE("gather and scatter") {
  const auto g = testutil::small_geometry(4, 6);
  const auto v = testutil::random_volume(g, 1);
  const auto all = gather_unmasked(v, make_random_mask(4, 4, 0.0, 0));
  REQUIRE(all.size() == 16);
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(all[i].index == i);
    CHECK(std::equal(all[i].values.begin(), all[i].values.end(), v.histogram(i).begin()));
  }

  std::vector<std::uint8_t> bits(16, 1);
  bits[7] = 0;
  const auto only7 = gather_unmasked(v, make_custom_mask(4, 4, bits));
  REQUIRE(only7.size() == 1);
  CHECK(only7[0].index == 7);

  const auto m = make_random_mask(4, 4, 0.5, 3);
  const auto items = gather_unmasked(v, m);
  TransientVolume rebuilt(g);
  for (auto i : m.masked_indices())
    std::copy(v.histogram(i).begin(), v.histogram(i).end(), rebuilt.histogram(i).begin());
  scatter(rebuilt, items);
  CHECK(rebuilt.data() == v.data());

  CHECK_THROWS_AS(gather_unmasked(v, make_random_mask(4, 5, 0.5, 0)), ValidationError);
}

TEST_CASE("combine_predictions") {
  const auto g = testutil::small_geometry(5, 4);
  const auto orig = testutil::random_volume(g, 1);
  const auto pred = testutil::random_volume(g, 2);
  CHECK(combine_predictions(orig, pred, make_random_mask(5, 5, 0.0, 0)).data() == orig.data());
  CHECK(combine_predictions(orig, pred, make_random_mask(5, 5, 1.0, 0)).data() == pred.data());
  const auto m = make_random_mask(5, 5, 0.6, 4);
  const auto c = combine_predictions(orig, pred, m);
  for (std::size_t i = 0; i < 25; ++i) {
    const auto& src = m.is_masked(i) ? pred : orig;
    CHECK(std::equal(c.histogram(i).begin(), c.histogram(i).end(), src.histogram(i).begin()));
  }
  CHECK(combine_predictions(orig, orig, m).data() == orig.data());
  CHECK_THROWS_AS(combine_predictions(orig, TransientVolume(testutil::small_geometry(5, 3)), m), ValidationError);
}

TEST_CASE("fill_masked") {
  const auto g = testutil::small_geometry(3, 2);
  const auto v = testutil::random_volume(g, 5);
  // Only the center (index 4) and the corner (index 0) are measured.
  std::vector<std::uint8_t> bits(9, 1);
  bits[0] = bits[4] = 0;
  const auto m = make_custom_mask(3, 3, bits);
  const auto z = fill_masked(v, m, FillMode::Zero);
  const auto n = fill_masked(v, m, FillMode::Nearest);
  for (std::size_t i = 0; i < 9; ++i) {
    if (!m.is_masked(i)) {
      CHECK(z.histogram(i)[0] == v.histogram(i)[0]);
      CHECK(n.histogram(i)[1] == v.histogram(i)[1]);
    } else {
      CHECK(z.histogram(i)[0] == 0.0);
    }
  }
  // Index 1 is one step from both 0 and 4: tie goes to the lower index.
  CHECK(n.histogram(1)[0] == v.histogram(0)[0]);
  CHECK(n.histogram(8)[0] == v.histogram(4)[0]);
  CHECK(n.histogram(5)[1] == v.histogram(4)[1]);
  CHECK_THROWS_AS(fill_masked(v, make_random_mask(3, 3, 1.0, 0), FillMode::Nearest), ValidationError);
}
