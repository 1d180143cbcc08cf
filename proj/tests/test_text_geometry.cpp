#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "raider/geometry.hpp"
#include "raider/text.hpp"
#include "raider/tools.hpp"

using namespace raider;

namespace {

std::size_t naive_levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
  return d[a.size()][b.size()];
}

double point_rect(Vec2 p, Vec2 lo, Vec2 hi) {
  const double dx = std::max({lo.x - p.x, 0.0, p.x - hi.x});
  const double dy = std::max({lo.y - p.y, 0.0, p.y - hi.y});
  return std::hypot(dx, dy);
}

}  // namespace

TEST_CASE("py_repr quoting follows python") {
  CHECK(text::py_repr("plant") == "'plant'");
  CHECK(text::py_repr("user's") == "\"user's\"");
  CHECK(text::py_repr("say \"hi\" it's") == "'say \"hi\" it\\'s'");
  CHECK(text::py_repr("a\\b") == "'a\\\\b'");
  const std::vector<std::string> items = {"medicine1", "plant"};
  CHECK(text::py_list(items) == "['medicine1', 'plant']");
  CHECK(text::py_list(std::vector<std::string>{}) == "[]");
  CHECK(text::py_bool(true) == "True");
  CHECK(text::py_bool(false) == "False");
}

TEST_CASE("format_length prints rounded python floats") {
  CHECK(text::format_length(0.6) == "0.6");
  CHECK(text::format_length(0.6000000001) == "0.6");
  CHECK(text::format_length(2.5) == "2.5");
  CHECK(text::format_length(0.0) == "0.0");
  CHECK(text::format_length(3.0) == "3.0");
  CHECK(text::format_length(0.678) == "0.68");
  CHECK(text::format_length(12.345678) == "12.35");
  CHECK(text::format_length(0.099) == "0.1");
}

TEST_CASE("fold_name collapses case and separators") {
  CHECK(text::fold_name("Adrianas_Medicine") == "adrianas medicine");
  CHECK(text::fold_name("  red--mug__ ") == "red mug");
  CHECK(text::fold_name("") == "");
}

TEST_CASE("levenshtein agrees with the dynamic-programming oracle") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> len(0, 9), ch(0, 3);
  for (int i = 0; i < 300; ++i) {
    std::string a, b;
    for (int k = len(rng); k > 0; --k) a += static_cast<char>('a' + ch(rng));
    for (int k = len(rng); k > 0; --k) b += static_cast<char>('a' + ch(rng));
    REQUIRE(text::levenshtein(a, b) == naive_levenshtein(a, b));
    const double sim = text::edit_similarity(a, b);
    const double expected =
        a.empty() && b.empty()
            ? 1.0
            : 1.0 - static_cast<double>(naive_levenshtein(a, b)) /
                        static_cast<double>(std::max(a.size(), b.size()));
    CHECK(sim == doctest::Approx(expected));
  }
}

TEST_CASE("token_cosine matches a bag-of-words oracle") {
  auto oracle = [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::map<std::string, double> ca, cb;
    for (const auto& t : a) ca[t] += 1;
    for (const auto& t : b) cb[t] += 1;
    double dot = 0, na = 0, nb = 0;
    for (const auto& [t, v] : ca) {
      na += v * v;
      if (cb.count(t)) dot += v * cb[t];
    }
    for (const auto& [t, v] : cb) nb += v * v;
    return na == 0 || nb == 0 ? 0.0 : dot / std::sqrt(na * nb);
  };
  CHECK(text::tokenize("The user's favorite, beverage!") ==
        std::vector<std::string>{"the", "users", "favorite", "beverage"});
  const std::string q = "favorite beverage of the user";
  for (const auto& s : default_user_corpus())
    CHECK(text::token_cosine(q, s) ==
          doctest::Approx(oracle(text::tokenize(q), text::tokenize(s))));
}

TEST_CASE("retrieval picks the favorite beverage entry") {
  const auto& corpus = default_user_corpus();
  CHECK(retrieve_user_information("favorite beverage", corpus) ==
        "The user's favorite beverage is coke.");
  CHECK(retrieve_user_information("preferred book", corpus) ==
        "The user's preferred book is 'Don Quixote.'");
  CHECK_THROWS(retrieve_user_information("x", std::vector<std::string>{}));
  const std::vector<std::string> two = {"alpha", "beta"};
  auto constant = [](std::string_view, std::string_view) { return 0.5; };
  CHECK(retrieve_user_information("beta", two, constant) == "alpha");
}

TEST_CASE("interval overlap and gap") {
  Interval a{0.0, 1.0}, b{0.5, 2.0}, c{3.0, 4.0};
  CHECK(a.overlap(b) == doctest::Approx(0.5));
  CHECK(a.overlap(c) == 0.0);
  CHECK(a.gap(c) == doctest::Approx(2.0));
  CHECK(a.gap(b) == 0.0);
}

TEST_CASE("box distances") {
  const Aabb box{{1, 0, 0}, {0.5, 0.5, 0.5}};
  CHECK(box.distance_to(Vec3{0, 0, 0}) == doctest::Approx(0.5));
  CHECK(box.distance_to(Vec3{1, 0, 0}) == 0.0);
  CHECK(box.distance_to(Vec3{2.5, 1.5, 0}) == doctest::Approx(std::sqrt(2.0)));
  const Aabb other{{3, 0, 0}, {0.5, 0.5, 0.5}};
  CHECK(box.distance_to(other) == doctest::Approx(1.0));
  CHECK(box.intersection_volume(box) == doctest::Approx(box.volume()));
  CHECK(box.footprint_overlap(other) == 0.0);
}

TEST_CASE("segment_rect_distance matches dense sampling") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0), w(0.05, 1.0);
  constexpr int kSamples = 4000;
  for (int i = 0; i < 300; ++i) {
    const Vec2 a{u(rng), u(rng)}, b{u(rng), u(rng)};
    const Vec2 lo{u(rng), u(rng)};
    const Vec2 hi{lo.x + w(rng), lo.y + w(rng)};
    double sampled = 1e9;
    for (int k = 0; k <= kSamples; ++k) {
      const double t = static_cast<double>(k) / kSamples;
      sampled = std::min(sampled, point_rect({a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t}, lo, hi));
    }
    const double seg = std::hypot(b.x - a.x, b.y - a.y);
    const double d = segment_rect_distance(a, b, lo, hi);
    CHECK(d <= sampled + 1e-9);
    CHECK(sampled - d <= seg / kSamples + 1e-9);
  }
}
