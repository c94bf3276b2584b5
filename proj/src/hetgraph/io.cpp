#include "hcmgnn/hetgraph/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace hcmgnn {
namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t") == std::string::npos;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw DataError("cannot format value");
  return std::string(buf, end);
}

void write_edges(const std::filesystem::path& path, const std::vector<IdPair>& edges) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& [a, b] : edges) out << a << '\t' << b << '\n';
  if (!out) throw DataError("write failed for " + path.string());
}

void write_features(const std::filesystem::path& path, const FeatureTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "id";
  for (std::size_t j = 0; j < table.values.cols(); ++j) out << ",f" << (j + 1);
  out << '\n';
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    out << table.ids[i];
    for (double v : table.values.row(i)) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace

std::vector<IdPair> read_edge_file(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<IdPair> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (is_blank(line)) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected two tab-separated ids");
    }
    edges.emplace_back(std::move(fields[0]), std::move(fields[1]));
  }
  return edges;
}

FeatureTable read_feature_file(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": missing header");
  strip_cr(line);
  const auto header = split(line, ',');
  if (header.empty() || header[0] != "id" || header.size() < 2) {
    throw DataError(path.string() + ":1: header must be id,f1,...,fk");
  }
  const std::size_t k = header.size() - 1;
  FeatureTable table;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (is_blank(line)) continue;
    const auto fields = split(line, ',');
    if (fields.size() != k + 1) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(k) + " features, found " +
                      std::to_string(fields.size() - 1));
    }
    if (fields[0].empty()) throw DataError(path.string() + ":" + std::to_string(line_no) + ": empty id");
    table.ids.push_back(fields[0]);
    for (std::size_t j = 1; j <= k; ++j) {
      double v = 0.0;
      const std::string& f = fields[j];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || ptr != f.data() + f.size()) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad value '" + f + "'");
      }
      values.push_back(v);
    }
  }
  table.values = num::Tensor(table.ids.size(), k, std::move(values));
  return table;
}

RawDataset read_dataset(const DatasetPaths& paths) {
  RawDataset raw;
  raw.gene_microbe = read_edge_file(paths.gene_microbe);
  raw.gene_disease = read_edge_file(paths.gene_disease);
  raw.microbe_disease = read_edge_file(paths.microbe_disease);
  for (std::size_t t = 0; t < 3; ++t) {
    if (paths.features[t]) raw.features[t] = read_feature_file(*paths.features[t]);
  }
  return raw;
}

LoadedGraph build_graph(const RawDataset& raw) {
  LoadReport report;
  std::array<NodeRegistry, 3> registries;
  std::vector<HetGraph::Association> associations;

  struct Source {
    const std::vector<IdPair>* pairs;
    EntityType a;
    EntityType b;
    const char* label;
  };
  const std::array<Source, 3> sources = {{
      {&raw.gene_microbe, EntityType::kGene, EntityType::kMicrobe, "gene-microbe"},
      {&raw.gene_disease, EntityType::kGene, EntityType::kDisease, "gene-disease"},
      {&raw.microbe_disease, EntityType::kMicrobe, EntityType::kDisease, "microbe-disease"},
  }};
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const Source& src = sources[s];
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    for (const auto& [ida, idb] : *src.pairs) {
      const std::uint32_t ia = registries[index_of(src.a)].intern(ida);
      const std::uint32_t ib = registries[index_of(src.b)].intern(idb);
      if (!seen.emplace(ia, ib).second) {
        ++report.duplicate_edges[s];
        continue;
      }
      associations.push_back({src.a, ia, src.b, ib});
    }
    if (report.duplicate_edges[s] > 0) {
      report.warnings.push_back(std::string(src.label) + ": removed " +
                                std::to_string(report.duplicate_edges[s]) + " duplicate edges");
    }
  }

  std::array<num::Tensor, 3> features;
  for (EntityType t : kEntityTypes) {
    const std::size_t ti = index_of(t);
    const NodeRegistry& reg = registries[ti];
    const auto& table = raw.features[ti];
    bool complete = table.has_value();
    if (table) {
      std::vector<std::optional<std::size_t>> row_of(reg.size());
      for (std::size_t r = 0; r < table->ids.size(); ++r) {
        auto idx = reg.find(table->ids[r]);
        if (!idx) {
          report.ignored_feature_ids[ti].push_back(table->ids[r]);
          continue;
        }
        row_of[*idx] = r;
      }
      if (!report.ignored_feature_ids[ti].empty()) {
        report.warnings.push_back(std::string(type_name(t)) + " features: ignored " +
                                  std::to_string(report.ignored_feature_ids[ti].size()) +
                                  " ids absent from the edge files");
      }
      complete = std::all_of(row_of.begin(), row_of.end(), [](const auto& r) { return r.has_value(); });
      if (complete) {
        num::Tensor x(reg.size(), table->values.cols());
        for (std::size_t i = 0; i < reg.size(); ++i) {
          auto src = table->values.row(*row_of[i]);
          std::copy(src.begin(), src.end(), x.row(i).begin());
        }
        features[ti] = std::move(x);
      } else {
        report.warnings.push_back(std::string(type_name(t)) +
                                  " features: some nodes lack rows; using one-hot features");
      }
    }
    if (!complete) {
      report.one_hot_fallback[ti] = true;
      features[ti] = num::Tensor::identity(reg.size());
    }
  }

  HetGraph graph(std::move(registries), associations, std::move(features));
  return LoadedGraph{std::move(graph), std::move(report)};
}

LoadedGraph load_edges(const DatasetPaths& paths) { return build_graph(read_dataset(paths)); }

DatasetPaths write_dataset(const RawDataset& raw, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  DatasetPaths paths;
  paths.gene_microbe = dir / "gene_microbe.tsv";
  paths.gene_disease = dir / "gene_disease.tsv";
  paths.microbe_disease = dir / "microbe_disease.tsv";
  write_edges(paths.gene_microbe, raw.gene_microbe);
  write_edges(paths.gene_disease, raw.gene_disease);
  write_edges(paths.microbe_disease, raw.microbe_disease);
  for (EntityType t : kEntityTypes) {
    const auto& table = raw.features[index_of(t)];
    if (!table) continue;
    auto path = dir / (std::string(type_name(t)) + "_features.csv");
    write_features(path, *table);
    paths.features[index_of(t)] = path;
  }
  return paths;
}

}  // namespace hcmgnn
