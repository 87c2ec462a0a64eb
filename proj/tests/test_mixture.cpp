#include <doctest.h>

#include "gdm/mixture.hpp"

#include <cstring>
#include <random>
#include <set>

using namespace gdm;
using Vec = Eigen::VectorXd;

namespace {

std::vector<Vec> random_weights(const std::vector<int>& supports, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  std::vector<Vec> out;
  for (int q : supports) {
    Vec w(q);
    for (int i = 0; i < q; ++i) w(i) = unif(gen);
    out.push_back(w / w.sum());
  }
  return out;
}

std::vector<BoostSet> boost_on(const MixtureStructure& mix, std::vector<std::vector<Eigen::Index>> members) {
  std::vector<BoostSet> out;
  for (std::size_t r = 0; r < members.size(); ++r) {
    BoostSet b{"r" + std::to_string(r), std::vector<bool>(static_cast<std::size_t>(mix.n_mixtures()), false)};
    for (auto m : members[r]) b.members[static_cast<std::size_t>(m)] = true;
    out.push_back(b);
  }
  return out;
}

}  // namespace

TEST_CASE("build_lambda sizes") {
  CHECK(build_lambda(std::vector<int>(6, 2)).n_mixtures() == 64);
  CHECK(build_lambda(std::vector<int>(8, 2)).n_mixtures() == 256);
  CHECK(build_lambda(std::vector<int>(13, 2)).n_mixtures() == 8192);
  const auto single = build_lambda(std::vector<int>{3});
  CHECK(single.lambda.rows() == 1);
  CHECK(single.lambda(0, 0) == 1);
  CHECK(single.lambda(0, 1) == 2);
  CHECK(single.lambda(0, 2) == 3);
  CHECK(build_lambda(std::vector<int>{}).n_mixtures() == 1);
}

TEST_CASE("lambda is lexicographic with block 1 slowest and covers every combination once") {
  const auto mix = build_lambda(std::vector<int>{2, 3, 2});
  REQUIRE(mix.n_mixtures() == 12);
  for (Eigen::Index m = 0; m < 6; ++m) CHECK(mix.lambda(0, m) == 1);
  for (Eigen::Index m = 6; m < 12; ++m) CHECK(mix.lambda(0, m) == 2);
  CHECK(mix.lambda(2, 0) == 1);
  CHECK(mix.lambda(2, 1) == 2);
  CHECK(mix.lambda(1, 2) == 2);
  std::set<std::vector<int>> seen;
  for (Eigen::Index m = 0; m < 12; ++m) seen.insert({mix.lambda(0, m), mix.lambda(1, m), mix.lambda(2, m)});
  CHECK(seen.size() == 12);
}

TEST_CASE("mixture cap") {
  CHECK_THROWS_AS(build_lambda(std::vector<int>(17, 2)), MixtureCapError);
  CHECK_THROWS_AS(build_lambda(std::vector<int>{4, 4}, 15), MixtureCapError);
  CHECK_THROWS_AS(build_lambda(std::vector<int>{0}), std::invalid_argument);
}

TEST_CASE("dm_shares examples") {
  const auto mix2 = build_lambda(std::vector<int>{2, 2});
  const Vec uniform = dm_shares<double>({Vec::Constant(2, 0.5), Vec::Constant(2, 0.5)}, mix2);
  for (int m = 0; m < 4; ++m) CHECK(uniform(m) == doctest::Approx(0.25).epsilon(1e-14));

  Vec a(2), b(2);
  a << 0.7, 0.3;
  b << 0.6, 0.4;
  const Vec pi = dm_shares<double>({a, b}, mix2);
  CHECK(pi(0) == doctest::Approx(0.42).epsilon(1e-14));
  CHECK(pi(1) == doctest::Approx(0.28).epsilon(1e-14));
  CHECK(pi(2) == doctest::Approx(0.18).epsilon(1e-14));
  CHECK(pi(3) == doctest::Approx(0.12).epsilon(1e-14));

  Vec w(3);
  w << 0.2, 0.3, 0.5;
  const Vec one = dm_shares<double>({w}, build_lambda(std::vector<int>{3}));
  for (int q = 0; q < 3; ++q) CHECK(one(q) == doctest::Approx(w(q)).epsilon(1e-14));
}

TEST_CASE("gdm_shares examples") {
  auto mix = build_lambda(std::vector<int>{2, 2});
  const std::vector<Vec> uniform{Vec::Constant(2, 0.5), Vec::Constant(2, 0.5)};

  mix.boost_sets = boost_on(mix, {{0}});
  const double ln2 = std::log(2.0);
  const Vec one = gdm_shares<double>(uniform, mix, std::span<const double>(&ln2, 1));
  CHECK(one(0) == doctest::Approx(0.4).epsilon(1e-14));
  for (int m = 1; m < 4; ++m) CHECK(one(m) == doctest::Approx(0.2).epsilon(1e-14));

  mix.boost_sets = boost_on(mix, {{0}, {3}});
  const std::vector<double> big{30.0, 30.0};
  const Vec diag = gdm_shares<double>(uniform, mix, big);
  CHECK(std::abs(diag(0) - 0.5) < 1e-10);
  CHECK(std::abs(diag(3) - 0.5) < 1e-10);
  CHECK(diag(1) < 1e-10);
  CHECK(diag(2) < 1e-10);
}

TEST_CASE("zero boosts reproduce dm_shares bitwise") {
  std::mt19937_64 gen(3);
  for (const auto& supports : std::vector<std::vector<int>>{{2, 2}, {3, 2, 4}, {5}, {2, 2, 2, 2, 2, 2}}) {
    auto mix = build_lambda(supports);
    mix.boost_sets = boost_on(mix, {{0}, {1, 2}});
    for (int rep = 0; rep < 20; ++rep) {
      const auto w = random_weights(supports, gen);
      const std::vector<double> zeros(2, 0.0);
      const Vec g = gdm_shares<double>(w, mix, zeros);
      const Vec d = dm_shares<double>(w, mix);
      CHECK(std::memcmp(g.data(), d.data(), sizeof(double) * static_cast<std::size_t>(g.size())) == 0);
    }
  }
}

TEST_CASE("shares sum to one and the renormalized form equals the plain product") {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> boost(-3.0, 3.0);
  for (const auto& supports : std::vector<std::vector<int>>{{2, 2}, {3, 3, 2}, {4, 2, 2, 2}, {7}}) {
    auto mix = build_lambda(supports);
    mix.boost_sets = boost_on(mix, {{0, 3}, {1}});
    for (int rep = 0; rep < 50; ++rep) {
      const auto w = random_weights(supports, gen);
      const Vec dm = dm_shares<double>(w, mix);
      const Vec prod = product_shares<double>(w, mix);
      CHECK(std::abs(dm.sum() - 1.0) < 1e-12);
      CHECK((dm - prod).cwiseAbs().maxCoeff() < 1e-12);
      const std::vector<double> deltas{boost(gen), boost(gen)};
      const Vec g = gdm_shares<double>(w, mix, deltas);
      CHECK(std::abs(g.sum() - 1.0) < 1e-12);
      CHECK(g.minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("zero weights stay zero under boosts") {
  auto mix = build_lambda(std::vector<int>{2, 2});
  mix.boost_sets = boost_on(mix, {{0}});
  Vec a(2), b(2);
  a << 1.0, 0.0;
  b << 0.5, 0.5;
  const double d = 5.0;
  const Vec g = gdm_shares<double>({a, b}, mix, std::span<const double>(&d, 1));
  CHECK(g(2) == 0.0);
  CHECK(g(3) == 0.0);
  CHECK(std::abs(g.sum() - 1.0) < 1e-12);
}

TEST_CASE("relabeling supports permutes shares") {
  std::mt19937_64 gen(17);
  const std::vector<int> supports{3, 2};
  auto mix = build_lambda(supports);
  auto w = random_weights(supports, gen);
  const Vec pi = dm_shares<double>(w, mix);
  // Swap supports 1 and 3 of block 0.
  auto w2 = w;
  std::swap(w2[0](0), w2[0](2));
  const Vec pi2 = dm_shares<double>(w2, mix);
  for (Eigen::Index m = 0; m < mix.n_mixtures(); ++m) {
    const int q = mix.lambda(0, m);
    const int swapped = q == 1 ? 3 : q == 3 ? 1 : 2;
    for (Eigen::Index m2 = 0; m2 < mix.n_mixtures(); ++m2)
      if (mix.lambda(0, m2) == swapped && mix.lambda(1, m2) == mix.lambda(1, m)) CHECK(pi2(m2) == doctest::Approx(pi(m)));
  }
}

TEST_CASE("raising a boost raises the boosted mass") {
  std::mt19937_64 gen(23);
  const std::vector<int> supports{2, 3};
  auto mix = build_lambda(supports);
  mix.boost_sets = boost_on(mix, {{0, 4}});
  const auto w = random_weights(supports, gen);
  double previous = -1.0;
  for (double d = -4.0; d <= 4.0; d += 0.5) {
    const Vec g = gdm_shares<double>(w, mix, std::span<const double>(&d, 1));
    const double mass = g(0) + g(4);
    CHECK(mass > previous);
    previous = mass;
  }
}

TEST_CASE("softmax allocation") {
  Vec c(2);
  c << 0.0, std::log(3.0);
  const Vec l = log_softmax_allocation<double>(Vec(), c, Eigen::MatrixXd());
  CHECK(std::exp(l(0)) == doctest::Approx(0.25));
  CHECK(std::exp(l(1)) == doctest::Approx(0.75));
}
