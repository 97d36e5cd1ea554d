#include <doctest.h>

#include <stdexcept>

#include <algorithm>

#include "hemb/rng.hpp"
#include "hemb/taxonomy.hpp"

using namespace hemb;

TEST_CASE("small leaves merge into their parent") {
  auto tax = Taxonomy::build({{"A/B", 5}, {"A/C", 100}}, 10);
  REQUIRE(tax.size() == 3);  // root, A, A/C
  const NodeId a = tax.resolve("A");
  const NodeId ac = tax.resolve("A/C");
  CHECK(tax.resolve("A/B") == a);  // merged path remaps to the parent
  CHECK(tax.node(a).sentence_count == 5);
  CHECK(tax.node(ac).sentence_count == 100);
  CHECK(tax.total_count() == 105);
  CHECK(tax.node(ac).parent == a);
  CHECK(tax.node(a).parent == tax.root());
}

TEST_CASE("min_node_size 0 keeps the full prefix tree") {
  auto tax = Taxonomy::build({{"A/B", 1}, {"A/C", 2}, {"D", 3}}, 0);
  CHECK(tax.size() == 5);  // root, A, D, A/B, A/C
  CHECK(tax.node(tax.resolve("A")).sentence_count == 0);
  CHECK(tax.total_count() == 6);
}

TEST_CASE("a node meeting the threshold is retained") {
  auto tax = Taxonomy::build({{"Books", 40000}}, 30000);
  CHECK(tax.can_resolve("Books"));
  CHECK(tax.node(tax.resolve("Books")).sentence_count == 40000);
  CHECK(tax.size() == 2);
}

TEST_CASE("merging cascades upward until nodes meet the threshold") {
  // Both leaves are small; after they merge, A itself is a small leaf and
  // merges into the root.
  auto tax = Taxonomy::build({{"A/B", 2}, {"A/C", 3}}, 10);
  CHECK(tax.size() == 1);
  CHECK(tax.resolve("A/B") == tax.root());
  CHECK(tax.resolve("A/C") == tax.root());
  CHECK(tax.node(tax.root()).sentence_count == 5);
}

TEST_CASE("an undersized interior node survives while its child holds data") {
  auto tax = Taxonomy::build({{"A", 3}, {"A/C", 100}}, 10);
  CHECK(tax.can_resolve("A/C"));
  const NodeId a = tax.resolve("A");
  CHECK(tax.node(a).sentence_count == 3);
  CHECK(tax.node(a).children.size() == 1);
}

TEST_CASE("resolve") {
  auto tax = Taxonomy::build({{"A/B", 5}, {"A/C", 100}}, 10);
  CHECK(tax.resolve("A/C") == tax.node(tax.resolve("A/C")).id);
  CHECK(tax.resolve("Global") == tax.root());
  CHECK_THROWS_AS(tax.resolve(""), std::runtime_error);
  CHECK_THROWS_AS(tax.resolve("nope"), std::runtime_error);
}

TEST_CASE("empty path segments are rejected at build time") {
  CHECK_THROWS_AS(Taxonomy::build({{"A//B", 1}}, 0), std::invalid_argument);
  CHECK_THROWS_AS(Taxonomy::build({{"", 1}}, 0), std::invalid_argument);
}

TEST_CASE("flatten") {
  auto tax = Taxonomy::build({{"A/B", 5}, {"A/C", 7}, {"D/E", 11}}, 0);
  REQUIRE(tax.height() == 2);

  SUBCASE("at full height is the identity") {
    auto flat = tax.flatten(2);
    CHECK(flat.size() == tax.size());
    for (NodeId n = 0; n < tax.size(); ++n) {
      CHECK(flat.node(n).path == tax.node(n).path);
      CHECK(flat.node(n).sentence_count == tax.node(n).sentence_count);
    }
  }
  SUBCASE("to depth 0 leaves a single node holding everything") {
    auto flat = tax.flatten(0);
    CHECK(flat.size() == 1);
    CHECK(flat.node(0).sentence_count == 23);
    CHECK(flat.resolve("A/B") == 0);
  }
  SUBCASE("to depth 1 reassigns level-2 data to level-1 parents") {
    auto flat = tax.flatten(1);
    CHECK(flat.size() == 3);  // root, A, D
    CHECK(flat.node(flat.resolve("A")).sentence_count == 12);
    CHECK(flat.node(flat.resolve("D")).sentence_count == 11);
    CHECK(flat.resolve("A/B") == flat.resolve("A"));
    CHECK(flat.resolve("D/E") == flat.resolve("D"));
  }
  SUBCASE("deeper than the height is an error") {
    CHECK_THROWS_AS(tax.flatten(3), std::invalid_argument);
    CHECK_THROWS_AS(tax.flatten(-1), std::invalid_argument);
  }
}

namespace {

Taxonomy random_tax(uint64_t seed, uint64_t min_size) {
  Rng rng(seed);
  const char* level1[] = {"electronics", "books", "home", "sports"};
  const char* level2[] = {"one", "two", "three"};
  const char* level3[] = {"x", "y"};
  std::vector<std::pair<std::string, uint64_t>> paths;
  for (const char* a : level1) {
    if (rng.uniform01() < 0.3) continue;
    paths.emplace_back(a, rng.uniform_below(40));
    for (const char* b : level2) {
      if (rng.uniform01() < 0.4) continue;
      paths.emplace_back(std::string(a) + "/" + b, rng.uniform_below(40));
      for (const char* c : level3) {
        if (rng.uniform01() < 0.5) continue;
        paths.emplace_back(std::string(a) + "/" + b + "/" + c, rng.uniform_below(40));
      }
    }
  }
  if (paths.empty()) paths.emplace_back("electronics", 5);
  return Taxonomy::build(paths, min_size);
}

bool same_structure(const Taxonomy& a, const Taxonomy& b) {
  if (a.size() != b.size()) return false;
  for (NodeId n = 0; n < a.size(); ++n) {
    if (a.node(n).path != b.node(n).path) return false;
    if (a.node(n).sentence_count != b.node(n).sentence_count) return false;
    if (a.node(n).parent != b.node(n).parent) return false;
  }
  return a.path_index() == b.path_index();
}

}  // namespace

TEST_CASE("total count is invariant under merging and flattening") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed * 77);
    auto tax = random_tax(seed, rng.uniform_below(60));
    const uint64_t total = tax.total_count();
    for (int depth = 0; depth <= tax.height(); ++depth) {
      CHECK(tax.flatten(depth).total_count() == total);
    }
  }
}

TEST_CASE("flatten composes: flatten(flatten(t,a),b) == flatten(t,min(a,b))") {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    auto tax = random_tax(seed, 0);
    const int h = tax.height();
    for (int a = 0; a <= h; ++a) {
      for (int b = 0; b <= a; ++b) {
        auto lhs = tax.flatten(a).flatten(b);
        auto rhs = tax.flatten(std::min(a, b));
        CHECK(same_structure(lhs, rhs));
      }
    }
  }
}

TEST_CASE("parent levels are exactly one less") {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    auto tax = random_tax(seed, 15);
    for (const auto& node : tax.nodes()) {
      if (node.parent == kNoNode) {
        CHECK(node.level == 0);
      } else {
        CHECK(tax.node(node.parent).level == node.level - 1);
      }
    }
  }
}

TEST_CASE("build is independent of input path order") {
  std::vector<std::pair<std::string, uint64_t>> paths{
      {"A/B", 5}, {"A/C", 25}, {"D", 40}, {"D/E", 3}};
  auto tax1 = Taxonomy::build(paths, 10);
  std::reverse(paths.begin(), paths.end());
  auto tax2 = Taxonomy::build(paths, 10);
  CHECK(same_structure(tax1, tax2));
}

TEST_CASE("duplicate paths aggregate their counts") {
  auto tax = Taxonomy::build({{"A", 5}, {"A", 7}}, 0);
  CHECK(tax.node(tax.resolve("A")).sentence_count == 12);
}
