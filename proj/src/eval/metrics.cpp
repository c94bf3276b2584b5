#include "hcmgnn/eval/metrics.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hcmgnn {
namespace {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("cannot format value");
  return std::string(buf, end);
}

double parse_double(std::string_view s, const std::filesystem::path& path, std::size_t line) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": bad number '" +
                             std::string(s) + "'");
  }
  return v;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

std::size_t resolve_rank(std::span<const double> scores, std::size_t positive) {
  if (positive >= scores.size()) throw std::out_of_range("resolve_rank: positive index out of range");
  const double s = scores[positive];
  std::size_t rank = 1;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (scores[j] > s || (scores[j] == s && j < positive)) ++rank;
  }
  return rank;
}

RankedCase make_case(std::string positive_id, std::vector<double> scores, std::size_t positive) {
  RankedCase c{std::move(positive_id), std::move(scores), positive, 0};
  c.rank = resolve_rank(c.scores, positive);
  return c;
}

RankMetrics rank_metrics(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw std::invalid_argument("rank_metrics: no cases");
  RankMetrics m;
  for (std::size_t r : ranks) {
    if (r == 0) throw std::invalid_argument("rank_metrics: ranks are 1-based");
    const double gain = 1.0 / std::log2(static_cast<double>(r) + 1.0);
    m.hit1 += r <= 1;
    m.hit3 += r <= 3;
    m.hit5 += r <= 5;
    // Exact at rank 1 so that NDCG@1 and Hit@1 agree bit for bit.
    m.ndcg1 += r <= 1 ? 1.0 : 0.0;
    m.ndcg3 += r <= 3 ? gain : 0.0;
    m.ndcg5 += r <= 5 ? gain : 0.0;
    m.mrr += 1.0 / static_cast<double>(r);
  }
  const double n = static_cast<double>(ranks.size());
  for (double* v : {&m.hit1, &m.hit3, &m.hit5, &m.ndcg1, &m.ndcg3, &m.ndcg5, &m.mrr}) *v /= n;
  m.cases = ranks.size();
  return m;
}

RankMetrics rank_metrics(std::span<const RankedCase> cases) {
  std::vector<std::size_t> ranks;
  ranks.reserve(cases.size());
  for (const auto& c : cases) ranks.push_back(c.rank);
  return rank_metrics(ranks);
}

RankMetrics mean_metrics(std::span<const RankMetrics> metrics) {
  if (metrics.empty()) throw std::invalid_argument("mean_metrics: nothing to average");
  RankMetrics m;
  for (const auto& x : metrics) {
    m.hit1 += x.hit1;
    m.hit3 += x.hit3;
    m.hit5 += x.hit5;
    m.ndcg1 += x.ndcg1;
    m.ndcg3 += x.ndcg3;
    m.ndcg5 += x.ndcg5;
    m.mrr += x.mrr;
    m.cases += x.cases;
  }
  const double n = static_cast<double>(metrics.size());
  for (double* v : {&m.hit1, &m.hit3, &m.hit5, &m.ndcg1, &m.ndcg3, &m.ndcg5, &m.mrr}) *v /= n;
  return m;
}

nlohmann::json to_json(const RankMetrics& m) {
  return {{"hit1", m.hit1},   {"hit3", m.hit3},   {"hit5", m.hit5}, {"ndcg1", m.ndcg1},
          {"ndcg3", m.ndcg3}, {"ndcg5", m.ndcg5}, {"mrr", m.mrr},   {"cases", m.cases}};
}

std::vector<StratumReport> stratify_by_degree(std::span<const double> degrees,
                                              std::span<const std::size_t> ranks,
                                              std::span<const double> thresholds) {
  if (degrees.size() != ranks.size()) {
    throw std::invalid_argument("stratify_by_degree: degrees and ranks differ in length");
  }
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > thresholds[i - 1])) {
      throw std::invalid_argument("stratify_by_degree: thresholds must be strictly increasing");
    }
  }
  std::vector<StratumReport> out;
  for (double n : thresholds) {
    StratumReport s{n, 0, std::nullopt};
    std::size_t hits = 0;
    for (std::size_t i = 0; i < degrees.size(); ++i) {
      if (degrees[i] > 0 && degrees[i] <= n) {
        ++s.count;
        hits += ranks[i] == 1;
      }
    }
    if (s.count > 0) s.hit1 = static_cast<double>(hits) / static_cast<double>(s.count);
    out.push_back(s);
  }
  return out;
}

std::vector<double> default_thresholds(std::span<const double> degrees, std::size_t count) {
  if (degrees.empty() || count == 0) throw std::invalid_argument("default_thresholds: no degrees");
  std::vector<double> sorted(degrees.begin(), degrees.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> q;
  for (std::size_t i = 1; i <= count; ++i) {
    const auto k = static_cast<std::size_t>(
        std::ceil(static_cast<double>(i) * static_cast<double>(sorted.size()) / static_cast<double>(count)));
    q.push_back(sorted[std::max<std::size_t>(k, 1) - 1]);
  }
  if (std::adjacent_find(q.begin(), q.end()) == q.end()) return q;
  const double hi = sorted.back();
  const double lo = sorted.front() < hi ? sorted.front() : 0.0;
  std::vector<double> even;
  for (std::size_t i = 1; i <= count; ++i) {
    even.push_back(i == count ? hi
                              : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count));
  }
  if (hi <= 0) {
    for (std::size_t i = 0; i < count; ++i) even[i] = static_cast<double>(i + 1);
  }
  return even;
}

void write_strata_tsv(const std::filesystem::path& path, std::span<const StratumReport> strata) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "N\tcount\thit1\n";
  for (const auto& s : strata) {
    out << format_double(s.threshold) << '\t' << s.count << '\t'
        << (s.hit1 ? format_double(*s.hit1) : "null") << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

SilhouetteResult silhouette(const num::Tensor& points, std::span<const int> labels) {
  const std::size_t n = points.rows();
  if (labels.size() != n) throw std::invalid_argument("silhouette: label count mismatch");
  std::array<std::size_t, 2> size{};
  for (int l : labels) {
    if (l != 0 && l != 1) throw std::invalid_argument("silhouette: labels must be 0 or 1");
    ++size[static_cast<std::size_t>(l)];
  }
  if (size[0] == 0 || size[1] == 0) {
    throw std::invalid_argument("silhouette: both classes need at least one point");
  }
  SilhouetteResult result;
  for (int c = 0; c < 2; ++c) {
    if (size[static_cast<std::size_t>(c)] == 1) {
      result.warnings.push_back("class " + std::to_string(c) + " has a single point; its silhouette is 0");
    }
  }
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto own = static_cast<std::size_t>(labels[i]);
    if (size[own] == 1) continue;
    std::array<double, 2> sum{};
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sum[static_cast<std::size_t>(labels[j])] += distance(points.row(i), points.row(j));
    }
    const double a = sum[own] / static_cast<double>(size[own] - 1);
    const double b = sum[1 - own] / static_cast<double>(size[1 - own]);
    const double denom = std::max(a, b);
    total += denom > 0 ? (b - a) / denom : 0.0;
  }
  result.score = total / static_cast<double>(n);
  return result;
}

void export_embeddings(const std::filesystem::path& path, const EmbeddingTable& t) {
  if (t.ids.size() != t.vectors.rows() || t.labels.size() != t.vectors.rows()) {
    throw std::invalid_argument("export_embeddings: ids, labels and vectors differ in length");
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < t.ids.size(); ++i) {
    out << t.ids[i] << '\t' << t.labels[i];
    for (double v : t.vectors.row(i)) out << '\t' << format_double(v);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  EmbeddingTable t;
  std::vector<double> values;
  std::size_t width = 0;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest = line;
    for (std::size_t tab; (tab = rest.find('\t')) != std::string_view::npos; rest.remove_prefix(tab + 1)) {
      fields.push_back(rest.substr(0, tab));
    }
    fields.push_back(rest);
    if (fields.size() < 3) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": too few columns");
    }
    if (width == 0) width = fields.size() - 2;
    if (fields.size() - 2 != width) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": inconsistent width");
    }
    t.ids.emplace_back(fields[0]);
    t.labels.push_back(static_cast<int>(parse_double(fields[1], path, lineno)));
    for (std::size_t k = 2; k < fields.size(); ++k) values.push_back(parse_double(fields[k], path, lineno));
  }
  t.vectors = num::Tensor(t.ids.size(), width, std::move(values));
  return t;
}

}  // namespace hcmgnn
