#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "hcmgnn/eval/metrics.hpp"

using namespace hcmgnn;
using num::Tensor;

namespace {

// Reference rank: sort candidate ids by (score desc, id asc).
std::size_t sorted_rank(const std::vector<double>& s, std::size_t positive) {
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  return static_cast<std::size_t>(std::find(order.begin(), order.end(), positive) - order.begin()) + 1;
}

double reference_silhouette(const Tensor& x, const std::vector<int>& labels) {
  const std::size_t n = x.rows();
  auto dist = [&](std::size_t i, std::size_t j) {
    double s = 0;
    for (std::size_t k = 0; k < x.cols(); ++k) s += (x(i, k) - x(j, k)) * (x(i, k) - x(j, k));
    return std::sqrt(s);
  };
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double in = 0, out = 0;
    int nin = 0, nout = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (labels[j] == labels[i]) {
        in += dist(i, j);
        ++nin;
      } else {
        out += dist(i, j);
        ++nout;
      }
    }
    if (nin == 0) continue;
    const double a = in / nin, b = out / nout;
    if (std::max(a, b) > 0) total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(n);
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("rank resolution examples") {
  CHECK(resolve_rank(std::vector<double>{0.9, 0.1, 0.5}, 0) == 1);
  CHECK(resolve_rank(std::vector<double>{0.9, 0.1, 0.5}, 2) == 2);
  CHECK(resolve_rank(std::vector<double>{0.9, 0.1, 0.5}, 1) == 3);
  // Ties favour the lower candidate id.
  CHECK(resolve_rank(std::vector<double>{0.5, 0.5, 0.5}, 0) == 1);
  CHECK(resolve_rank(std::vector<double>{0.5, 0.5, 0.5}, 2) == 3);
  CHECK(resolve_rank(std::vector<double>{0.7, 0.5, 0.5}, 1) == 2);
  CHECK_THROWS_AS(resolve_rank(std::vector<double>{0.5}, 1), std::out_of_range);
  RankedCase c = make_case("x", {0.2, 0.3}, 0);
  CHECK(c.rank == 2);
}

TEST_CASE("rank resolution agrees with a stable sort") {
  std::mt19937 rng(4);
  std::uniform_int_distribution<int> coarse(0, 5);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> s(1 + rng() % 31);
    for (double& v : s) v = coarse(rng) / 5.0;  // plenty of ties
    const std::size_t pos = rng() % s.size();
    const std::size_t r = resolve_rank(s, pos);
    CHECK(r == sorted_rank(s, pos));
    CHECK(r >= 1);
    CHECK(r <= s.size());
  }
}

TEST_CASE("metric examples") {
  const std::vector<std::size_t> ranks = {1, 2, 4, 10};
  RankMetrics m = rank_metrics(ranks);
  CHECK(m.cases == 4);
  CHECK(m.hit1 == doctest::Approx(0.25));
  CHECK(m.hit3 == doctest::Approx(0.5));
  CHECK(m.hit5 == doctest::Approx(0.75));
  CHECK(m.ndcg1 == doctest::Approx(0.25));
  CHECK(m.ndcg3 == doctest::Approx((1.0 + 1.0 / std::log2(3.0)) / 4.0));
  CHECK(m.ndcg5 == doctest::Approx((1.0 + 1.0 / std::log2(3.0) + 1.0 / std::log2(5.0)) / 4.0));
  CHECK(m.mrr == doctest::Approx((1.0 + 0.5 + 0.25 + 0.1) / 4.0));
  CHECK_THROWS_AS(rank_metrics(std::vector<std::size_t>{}), std::invalid_argument);
  CHECK_THROWS_AS(rank_metrics(std::vector<std::size_t>{0}), std::invalid_argument);

  auto j = to_json(m);
  CHECK(j["mrr"] == m.mrr);
  CHECK(j["cases"] == 4);

  const std::array<RankMetrics, 2> two = {rank_metrics(std::vector<std::size_t>{1}),
                                          rank_metrics(std::vector<std::size_t>{2, 2, 2})};
  RankMetrics avg = mean_metrics(two);
  CHECK(avg.hit1 == doctest::Approx(0.5));
  CHECK(avg.mrr == doctest::Approx(0.75));
  CHECK(avg.cases == 4);
}

TEST_CASE("metric invariants") {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::size_t> ranks(1 + rng() % 40);
    for (auto& r : ranks) r = 1 + rng() % 31;
    RankMetrics m = rank_metrics(ranks);
    CHECK(m.ndcg1 == m.hit1);
    CHECK(m.hit1 <= m.hit3);
    CHECK(m.hit3 <= m.hit5);
    CHECK(m.ndcg3 <= m.hit3);
    CHECK(m.ndcg5 <= m.hit5);
    CHECK(m.ndcg3 <= m.ndcg5);
    CHECK(m.mrr >= m.hit1);
    CHECK(m.mrr <= 1.0);
    for (double v : {m.hit1, m.hit3, m.hit5, m.ndcg1, m.ndcg3, m.ndcg5, m.mrr}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("ranks are invariant under strictly increasing transforms") {
  std::mt19937 rng(12);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s(31);
    for (double& v : s) v = n(rng);
    const std::size_t pos = rng() % 31;
    std::vector<double> t = s;
    for (double& v : t) v = 1.0 / (1.0 + std::exp(-3.0 * v)) + 7.0;
    CHECK(resolve_rank(s, pos) == resolve_rank(t, pos));
  }
}

TEST_CASE("a random scorer matches the analytic expectations") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::size_t> ranks;
  for (int trial = 0; trial < 20000; ++trial) {
    std::vector<double> s(31);
    for (double& v : s) v = u(rng);
    ranks.push_back(resolve_rank(s, trial % 31));
  }
  RankMetrics m = rank_metrics(ranks);
  double h31 = 0;
  for (int k = 1; k <= 31; ++k) h31 += 1.0 / k;
  CHECK(m.hit1 == doctest::Approx(1.0 / 31.0).epsilon(0.15));
  CHECK(m.hit5 == doctest::Approx(5.0 / 31.0).epsilon(0.06));
  CHECK(m.mrr == doctest::Approx(h31 / 31.0).epsilon(0.04));
}

TEST_CASE("degree strata") {
  const std::vector<double> deg = {1.0, 2.0, 2.5, 4.0, 0.0};
  const std::vector<std::size_t> ranks = {1, 3, 1, 1, 1};

  SUBCASE("cumulative counts and Hit@1") {
    const std::vector<double> th = {0.5, 2.0, 3.0, 10.0};
    auto s = stratify_by_degree(deg, ranks, th);
    REQUIRE(s.size() == 4);
    CHECK(s[0].count == 0);
    CHECK_FALSE(s[0].hit1.has_value());
    CHECK(s[1].count == 2);
    CHECK(*s[1].hit1 == doctest::Approx(0.5));
    CHECK(s[2].count == 3);
    CHECK(*s[2].hit1 == doctest::Approx(2.0 / 3.0));
    // Degree zero never counts.
    CHECK(s[3].count == 4);
    CHECK(*s[3].hit1 == doctest::Approx(0.75));
  }

  SUBCASE("counts never decrease") {
    std::mt19937 rng(3);
    std::vector<double> d(100);
    std::vector<std::size_t> r(100);
    for (std::size_t i = 0; i < 100; ++i) {
      d[i] = 1 + rng() % 50;
      r[i] = 1 + rng() % 5;
    }
    auto th = default_thresholds(d, 12);
    REQUIRE(th.size() == 12);
    CHECK(std::adjacent_find(th.begin(), th.end(), std::greater_equal<>()) == th.end());
    CHECK(th.back() == *std::max_element(d.begin(), d.end()));
    auto s = stratify_by_degree(d, r, th);
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i].count >= s[i - 1].count);
    CHECK(s.back().count == 100);
  }

  SUBCASE("degenerate degrees fall back to even spacing") {
    const std::vector<double> same(20, 3.0);
    auto th = default_thresholds(same, 12);
    REQUIRE(th.size() == 12);
    CHECK(th.back() == 3.0);
    CHECK(std::adjacent_find(th.begin(), th.end(), std::greater_equal<>()) == th.end());
  }

  SUBCASE("errors") {
    const std::vector<double> bad = {2.0, 2.0};
    CHECK_THROWS_AS(stratify_by_degree(deg, ranks, bad), std::invalid_argument);
    CHECK_THROWS_AS(stratify_by_degree(deg, std::vector<std::size_t>{1}, bad), std::invalid_argument);
    CHECK_THROWS_AS(default_thresholds(std::vector<double>{}, 12), std::invalid_argument);
  }

  SUBCASE("TSV output") {
    const std::vector<double> th = {0.5, 2.0};
    auto s = stratify_by_degree(deg, ranks, th);
    auto path = std::filesystem::temp_directory_path() / "hcmgnn_test_strata.tsv";
    write_strata_tsv(path, s);
    CHECK(read_text(path) == "N\tcount\thit1\n0.5\t0\tnull\n2\t2\t0.5\n");
    std::filesystem::remove(path);
  }
}

TEST_CASE("silhouette") {
  std::mt19937 rng(6);
  std::normal_distribution<double> n(0.0, 0.05);

  SUBCASE("tight, separated clusters score near one") {
    Tensor x(40, 3);
    std::vector<int> labels(40);
    for (std::size_t i = 0; i < 40; ++i) {
      labels[i] = i < 20 ? 0 : 1;
      for (std::size_t k = 0; k < 3; ++k) x(i, k) = (labels[i] ? 5.0 : 0.0) + n(rng);
    }
    auto r = silhouette(x, labels);
    CHECK(r.score > 0.9);
    CHECK(r.warnings.empty());
    CHECK(r.score == doctest::Approx(reference_silhouette(x, labels)).epsilon(1e-12));

    // Labels unrelated to the geometry score near zero.
    std::vector<int> shuffled(40);
    for (std::size_t i = 0; i < 40; ++i) shuffled[i] = static_cast<int>(i % 2);
    auto s = silhouette(x, shuffled);
    CHECK(std::abs(s.score) < 0.1);
    CHECK(s.score == doctest::Approx(reference_silhouette(x, shuffled)).epsilon(1e-12));
  }

  SUBCASE("duplicated points score zero") {
    Tensor x(6, 2, 1.0);
    auto r = silhouette(x, std::vector<int>{0, 0, 0, 1, 1, 1});
    CHECK(r.score == 0.0);
  }

  SUBCASE("a singleton class contributes zero with a warning") {
    Tensor x = Tensor::from_rows({{0, 0}, {0, 1}, {10, 10}});
    auto r = silhouette(x, std::vector<int>{0, 0, 1});
    CHECK(r.warnings.size() == 1);
    CHECK(r.score == doctest::Approx(reference_silhouette(x, {0, 0, 1})));
  }

  SUBCASE("errors") {
    Tensor x(3, 2);
    CHECK_THROWS_AS(silhouette(x, std::vector<int>{0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(silhouette(x, std::vector<int>{0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(silhouette(x, std::vector<int>{0, 2, 1}), std::invalid_argument);
  }
}

TEST_CASE("embedding export round trip") {
  EmbeddingTable t;
  t.ids = {"g1|m1|d1", "g2|m1|d3"};
  t.labels = {1, 0};
  t.vectors = Tensor::from_rows({{0.1, -2.5e-7, 3.0}, {1.0 / 3.0, 0.0, -1e300}});
  auto dir = std::filesystem::temp_directory_path() / "hcmgnn_test_export";
  std::filesystem::remove_all(dir);
  auto path = dir / "sub" / "e.tsv";
  export_embeddings(path, t);
  EmbeddingTable back = load_embeddings(path);
  CHECK(back.ids == t.ids);
  CHECK(back.labels == t.labels);
  CHECK(back.vectors == t.vectors);

  std::ofstream(dir / "bad.tsv") << "a\t1\t0.5\nb\t0\t0.5\t0.7\n";
  CHECK_THROWS_WITH_AS(load_embeddings(dir / "bad.tsv"), doctest::Contains(":2"), std::runtime_error);
  t.labels.pop_back();
  CHECK_THROWS_AS(export_embeddings(path, t), std::invalid_argument);
  std::filesystem::remove_all(dir);
}
