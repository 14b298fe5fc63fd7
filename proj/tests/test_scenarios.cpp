#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "foliage/errors.hpp"
#include "foliage/scenarios.hpp"

using namespace foliage;

namespace {

int count_rows(const ScenarioResult& res, const std::string& suite, const std::string& fragment) {
  int matched = 0;
  for (const auto& row : res.rows)
    if (row.suite == suite && row.check.find(fragment) != std::string::npos) ++matched;
  return matched;
}

ScenarioResult run_named(const std::string& name, std::vector<std::string> suites = {},
                         RunOptions opt = {}) {
  const Scenario& s = find_scenario(name);
  return s.run(suites.empty() ? s.suites : suites, opt);
}

}  // namespace

TEST_CASE("catalog names are unique and resolvable") {
  const auto& cat = scenario_catalog();
  CHECK(cat.size() == 9);
  std::set<std::string> names;
  for (const auto& s : cat) {
    CHECK(!s.summary.empty());
    CHECK(!s.suites.empty());
    names.insert(s.name);
    CHECK(&find_scenario(s.name) == &s);
  }
  CHECK(names.size() == cat.size());
  CHECK_THROWS_AS(find_scenario("no-such-scenario"), ConfigError);
}

TEST_CASE("grid sizes scale by powers of two inside the supported band") {
  CHECK(scaled_grid_size(8, 1) == 8);
  CHECK(scaled_grid_size(16, 2) == 32);
  CHECK(scaled_grid_size(32, 4) == 128);
  CHECK_THROWS_AS(scaled_grid_size(16, 3), ConfigError);
  CHECK_THROWS_AS(scaled_grid_size(16, 0), ConfigError);
  CHECK_THROWS_AS(scaled_grid_size(512, 2), ConfigError);
}

TEST_CASE("every shipped scenario passes its own contract") {
  for (const auto& s : scenario_catalog()) {
    CAPTURE(s.name);
    auto res = s.run(s.suites, RunOptions{});
    CHECK(!res.rows.empty());
    for (const auto& row : res.rows) {
      CAPTURE(row.check);
      CAPTURE(row.value);
      CHECK((row.pass || !row.contracted));
    }
    CHECK(res.all_contracts_pass());
  }
}

TEST_CASE("product leaves carry the pinned curvature rows") {
  auto res = run_named("cylinder-rminimal", {"identities"});
  CHECK(count_rows(res, "identities", "next curvature vanishes") == 18);
  CHECK(count_rows(res, "identities", "top curvature pinned at R^-r") == 18);
  CHECK(res.all_contracts_pass());
}

TEST_CASE("the diagonal-warp sweep samples twenty stations per profile") {
  auto res = run_named("warped-diagonal", {"identities"});
  CHECK(count_rows(res, "identities", "ladder matches the profile at 20 stations") == 4);
  CHECK(res.all_contracts_pass());
}

TEST_CASE("boxed slab checks the dilation and inversion components") {
  auto res = run_named("exp-warped-box", {"fields"});
  CHECK(count_rows(res, "fields", "dilation component is jacobi") == 2);
  CHECK(count_rows(res, "fields", "inversion(1) component is jacobi") == 2);
  CHECK(count_rows(res, "fields", "inversion(2) component is jacobi") == 2);
  CHECK(res.all_contracts_pass());
}

TEST_CASE("the perturbed control fails the sign pairing on purpose") {
  auto res = run_named("warped-perturbed", {"stability"});
  CHECK(count_rows(res, "stability", "sign pairing fails by design") == 2);
  CHECK(res.all_contracts_pass());
}

TEST_CASE("suites not requested produce no rows") {
  auto res = run_named("warped-diagonal", {"stability"});
  CHECK(res.rows.empty());
}

TEST_CASE("dump tables appear only on request") {
  RunOptions opt;
  CHECK(run_named("exp-warped", {"identities"}, opt).dumps.empty());
  opt.dump_fields = true;
  auto res = run_named("exp-warped", {"identities"}, opt);
  REQUIRE(res.dumps.size() == 1);
  CHECK(res.dumps[0].name == "curvature-ladder");
  CHECK(res.dumps[0].table.rows() == 8);
  CHECK(!res.dumps[0].header.empty());
}
