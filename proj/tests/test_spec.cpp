#include <doctest.h>

#include "gdm/spec.hpp"
#include "fixtures.hpp"

using namespace gdm;

namespace {

ChoiceDataset wide_design(int n_attributes, std::vector<std::string> socios = {}) {
  std::vector<std::string> names;
  for (int a = 1; a <= n_attributes; ++a) names.push_back("x" + std::to_string(a));
  return make_regular_dataset(4, 2, 3, names, std::move(socios));
}

UtilitySpec linear_utility(int n) {
  UtilitySpec u;
  for (int a = 1; a <= n; ++a) u.terms.push_back({"b" + std::to_string(a), "x" + std::to_string(a)});
  return u;
}

HeterogeneitySpec one_block_each(int n, Family family = Family::DM) {
  HeterogeneitySpec h;
  h.family = family;
  for (int a = 1; a <= n; ++a) h.blocks.push_back({"k" + std::to_string(a), {"b" + std::to_string(a)}, 2});
  return h;
}

}  // namespace

TEST_CASE("MNL with 12 coefficients") {
  const Model m = compile_spec(linear_utility(12), {}, wide_design(12));
  CHECK(m.n_mixtures() == 1);
  CHECK(m.initial.n_free() == 12);
  CHECK(m.initial.names.front() == "b1");
}

TEST_CASE("block counts give the mixture count") {
  const auto ds = wide_design(13);
  HeterogeneitySpec five;
  five.family = Family::DM;
  for (int g = 0; g < 5; ++g) {
    Block b{"g" + std::to_string(g), {}, 2};
    for (int a = g + 1; a <= 13; a += 5) b.coefficients.push_back("b" + std::to_string(a));
    five.blocks.push_back(b);
  }
  CHECK(compile_spec(linear_utility(13), five, ds).n_mixtures() == 32);
  CHECK(compile_spec(linear_utility(13), one_block_each(13), ds).n_mixtures() == 8192);
}

TEST_CASE("LC parameter arithmetic") {
  const auto ds = wide_design(4);
  for (int M : {2, 3, 5}) {
    HeterogeneitySpec h;
    h.family = Family::LC;
    h.blocks = {{"class", {"b1", "b2", "b3"}, M}};
    const Model m = compile_spec(linear_utility(4), h, ds);
    CHECK(m.initial.n_free() == 3 * M + 1 + (M - 1));
    CHECK(m.n_mixtures() == M);
  }
}

TEST_CASE("documented parameter order") {
  auto ds = wide_design(3, {"z"});
  HeterogeneitySpec h;
  h.family = Family::GDM;
  h.blocks = {{"A", {"b1"}, 2}, {"B", {"b2"}, 2}};
  h.boosts = {{"d", BoostPredicate::parse("A=2 & B=2")}};
  h.socio_links = {"z"};
  const Model m = compile_spec(linear_utility(3), h, ds);
  const std::vector<std::string> expected{
      "b3",          "b1[1]",     "b1[2]",       "b2[1]",          "b2[2]",          "delta[A,1]",
      "zeta[z,A,1]", "delta[A,2]", "zeta[z,A,2]", "delta[B,1]",     "zeta[z,B,1]",    "delta[B,2]",
      "zeta[z,B,2]", "d"};
  CHECK(m.initial.names == expected);
  CHECK_FALSE(m.initial.free[5]);
  CHECK_FALSE(m.initial.free[6]);
  CHECK(m.initial.free[7]);
  CHECK(m.initial["b1[2]"] == doctest::Approx(0.1));
  CHECK(m.initial["b1[1]"] == 0.0);
  CHECK(compile_spec(linear_utility(3), h, ds).initial.names == m.initial.names);
}

TEST_CASE("allocation mask and coefficient matrix") {
  auto ds = wide_design(2);
  HeterogeneitySpec h;
  h.family = Family::DM;
  h.blocks = {{"A", {"b1"}, 2}, {"B", {"b2"}, 3}};
  const Model m = compile_spec(linear_utility(2), h, ds);
  Eigen::VectorXd theta = m.initial.values;
  theta(m.initial.index("b1[1]")) = -1;
  theta(m.initial.index("b1[2]")) = 1;
  theta(m.initial.index("b2[3]")) = 7;
  const Eigen::MatrixXd B = m.coefficient_matrix(theta);
  REQUIRE(B.cols() == 6);
  CHECK(B(0, 0) == -1);
  CHECK(B(0, 3) == 1);
  CHECK(B(1, 2) == 7);
  CHECK(B(1, 5) == 7);
  const auto mask = m.allocation_mask();
  CHECK_FALSE(mask[m.initial.index("b2[3]")]);
  CHECK(mask[m.initial.index("delta[B,3]")]);
}

TEST_CASE("fixes are applied") {
  auto ds = wide_design(2);
  HeterogeneitySpec h;
  h.fixes = {{"b2", 0.5}};
  const Model m = compile_spec(linear_utility(2), h, ds);
  CHECK(m.initial["b2"] == 0.5);
  CHECK(m.initial.n_free() == 1);
  h.fixes.push_back({"b1", 0.0});
  CHECK_THROWS_AS(compile_spec(linear_utility(2), h, ds), SpecError);
}

TEST_CASE("specification errors") {
  auto ds = wide_design(3, {"z"});
  UtilitySpec bad_attr = linear_utility(2);
  bad_attr.terms.push_back({"b9", "nope"});
  CHECK_THROWS_AS(compile_spec(bad_attr, {}, ds), SpecError);

  UtilitySpec dup = linear_utility(2);
  dup.terms.push_back({"b1", "x3"});
  CHECK_THROWS_AS(compile_spec(dup, {}, ds), SpecError);

  HeterogeneitySpec twice = one_block_each(2);
  twice.blocks.push_back({"again", {"b1"}, 2});
  CHECK_THROWS_AS(compile_spec(linear_utility(3), twice, ds), SpecError);

  HeterogeneitySpec unknown_coef;
  unknown_coef.family = Family::DM;
  unknown_coef.blocks = {{"A", {"zz"}, 2}};
  CHECK_THROWS_AS(compile_spec(linear_utility(3), unknown_coef, ds), SpecError);

  HeterogeneitySpec lc_two_blocks = one_block_each(2, Family::LC);
  CHECK_THROWS_AS(compile_spec(linear_utility(3), lc_two_blocks, ds), SpecError);

  HeterogeneitySpec dm_boost = one_block_each(2);
  dm_boost.boosts = {{"d", BoostPredicate::parse("k1=2")}};
  CHECK_THROWS_AS(compile_spec(linear_utility(3), dm_boost, ds), SpecError);

  HeterogeneitySpec gdm_bad_block = one_block_each(2, Family::GDM);
  gdm_bad_block.boosts = {{"d", BoostPredicate::parse("nope=2")}};
  CHECK_THROWS_AS(compile_spec(linear_utility(3), gdm_bad_block, ds), SpecError);

  HeterogeneitySpec gdm_bad_support = one_block_each(2, Family::GDM);
  gdm_bad_support.boosts = {{"d", BoostPredicate::parse("k1=3")}};
  CHECK_THROWS_AS(compile_spec(linear_utility(3), gdm_bad_support, ds), SpecError);

  HeterogeneitySpec bad_socio = one_block_each(2);
  bad_socio.socio_links = {"income"};
  CHECK_THROWS_AS(compile_spec(linear_utility(3), bad_socio, ds), SpecError);

  CHECK_THROWS_AS(compile_spec(linear_utility(13), one_block_each(13), wide_design(13), 4096), MixtureCapError);
}

TEST_CASE("boost predicate text") {
  const auto p = BoostPredicate::parse(" cost = 1 &quality=2 ");
  REQUIRE(p.terms.size() == 2);
  CHECK(p.terms[0].block == "cost");
  CHECK(p.terms[1].support == 2);
  CHECK(BoostPredicate::parse(p.to_string()).to_string() == p.to_string());
  CHECK(BoostPredicate::parse("*=2").terms[0].block == "*");
  CHECK_THROWS_AS(BoostPredicate::parse("cost"), SpecError);
  CHECK_THROWS_AS(BoostPredicate::parse("cost=0"), SpecError);
}

TEST_CASE("family names") {
  for (Family f : {Family::MNL, Family::LC, Family::DM, Family::GDM}) CHECK(parse_family(to_string(f)) == f);
  CHECK(parse_family("gdm") == Family::GDM);
  CHECK_THROWS_AS(parse_family("probit"), SpecError);
}
