//
// Copyright 2026 The caseembed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "caseembed/graphout.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "caseembed/error.hpp"
#include "csv.hpp"

namespace caseembed {

namespace {

double norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::DimensionMismatch, "cosine of unequal lengths");
  double dot = 0.0, sa = 0.0, sb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    sa += a[k] * a[k];
    sb += b[k] * b[k];
  }
  if (sa == 0.0 || sb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(sa * sb), -1.0, 1.0);
}

SimilarityGraph build_graph(const EmbeddingMatrix& embeddings, const ReturnsPanel& panel,
                            double threshold) {
  require(threshold > -1.0 && threshold <= 1.0, "graph threshold must lie in (-1, 1]");
  const std::size_t n = panel.num_assets();
  if (embeddings.size() != n) {
    fail(ErrorCode::DimensionMismatch, "embedding rows differ from panel assets");
  }
  SimilarityGraph g;
  g.threshold = threshold;
  for (std::size_t i = 0; i < n; ++i) g.nodes.push_back({panel.asset(i).ticker, panel.sector(i)});

  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    norms[i] = norm(embeddings.vectors.row(i));
    if (norms[i] == 0.0) g.zero_norm_nodes.push_back(i);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (norms[i] == 0.0) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (norms[j] == 0.0) continue;
      const double s = cosine_similarity(embeddings.vectors.row(i), embeddings.vectors.row(j));
      if (s >= threshold) g.edges.push_back({i, j, s});
    }
  }
  return g;
}

PurityTable cluster_purity(const SimilarityGraph& graph, double outlier_cutoff) {
  require(!graph.nodes.empty(), "purity of an empty graph");
  const std::size_t n = graph.nodes.size();
  std::vector<std::size_t> same(n, 0);
  std::vector<std::map<std::string, std::size_t>> seen(n);
  PurityTable t;
  t.nodes.resize(n);
  for (const auto& e : graph.edges) {
    ++t.nodes[e.source].degree;
    ++t.nodes[e.target].degree;
    ++seen[e.source][graph.nodes[e.target].sector];
    ++seen[e.target][graph.nodes[e.source].sector];
    if (graph.nodes[e.source].sector == graph.nodes[e.target].sector) {
      ++same[e.source];
      ++same[e.target];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (const auto& [sector, count] : seen[i]) {
      if (count > best) {
        best = count;
        t.nodes[i].dominant_neighbor_sector = sector;
      }
    }
  }
  std::map<std::string, std::pair<double, std::size_t>> acc;
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& sector = graph.nodes[i].sector;
    auto& node = t.nodes[i];
    if (node.degree == 0) {
      ++t.isolated;
      ++t.sector_isolated[sector];
      continue;
    }
    node.purity = static_cast<double>(same[i]) / static_cast<double>(node.degree);
    acc[sector].first += node.purity;
    ++acc[sector].second;
    total += node.purity;
    ++counted;
    if (node.purity < outlier_cutoff) t.outliers.push_back(i);
  }
  for (const auto& [sector, sum] : acc) {
    t.sector_mean[sector] = sum.first / static_cast<double>(sum.second);
  }
  t.overall = counted ? total / static_cast<double>(counted) : 0.0;
  std::stable_sort(t.outliers.begin(), t.outliers.end(), [&](std::size_t a, std::size_t b) {
    return t.nodes[a].purity < t.nodes[b].purity;
  });
  return t;
}

void write_edge_csv(const SimilarityGraph& g, const std::filesystem::path& path) {
  auto out = detail::open_out(path.string());
  out << "source_ticker,target_ticker,similarity\n";
  for (const auto& e : g.edges) {
    out << detail::csv_field(g.nodes[e.source].ticker) << ','
        << detail::csv_field(g.nodes[e.target].ticker) << ','
        << detail::format_double(e.similarity) << '\n';
  }
  if (!out) fail(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

void write_node_csv(const SimilarityGraph& g, const PurityTable& p,
                    const std::filesystem::path& path) {
  require(p.nodes.size() == g.nodes.size(), "purity table does not match graph");
  auto out = detail::open_out(path.string());
  out << "ticker,sector,degree,purity\n";
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    out << detail::csv_field(g.nodes[i].ticker) << ',' << detail::csv_field(g.nodes[i].sector)
        << ',' << p.nodes[i].degree << ',';
    if (p.nodes[i].degree > 0) out << detail::format_double(p.nodes[i].purity);
    out << '\n';
  }
  if (!out) fail(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

void write_outlier_csv(const SimilarityGraph& g, const PurityTable& p,
                       const std::filesystem::path& path) {
  auto out = detail::open_out(path.string());
  out << "ticker,sector,degree,purity,dominant_neighbor_sector\n";
  for (std::size_t i : p.outliers) {
    out << detail::csv_field(g.nodes[i].ticker) << ',' << detail::csv_field(g.nodes[i].sector)
        << ',' << p.nodes[i].degree << ',' << detail::format_double(p.nodes[i].purity) << ','
        << detail::csv_field(p.nodes[i].dominant_neighbor_sector) << '\n';
  }
  if (!out) fail(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

void write_gexf(const SimilarityGraph& g, const std::filesystem::path& path) {
  auto out = detail::open_out(path.string());
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<gexf xmlns=\"http://gexf.net/1.2\" version=\"1.2\">\n"
      << "  <meta>\n    <creator>caseembed</creator>\n"
      << "    <description>embedding cosine similarity graph, threshold "
      << detail::format_double(g.threshold) << "</description>\n  </meta>\n"
      << "  <graph mode=\"static\" defaultedgetype=\"undirected\">\n"
      << "    <attributes class=\"node\">\n"
      << "      <attribute id=\"0\" title=\"sector\" type=\"string\"/>\n"
      << "    </attributes>\n    <nodes>\n";
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    out << "      <node id=\"" << i << "\" label=\"" << xml_escape(g.nodes[i].ticker)
        << "\">\n        <attvalues><attvalue for=\"0\" value=\""
        << xml_escape(g.nodes[i].sector) << "\"/></attvalues>\n      </node>\n";
  }
  out << "    </nodes>\n    <edges>\n";
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& edge = g.edges[e];
    out << "      <edge id=\"" << e << "\" source=\"" << edge.source << "\" target=\""
        << edge.target << "\" weight=\"" << detail::format_double(edge.similarity)
        << "\"/>\n";
  }
  out << "    </edges>\n  </graph>\n</gexf>\n";
  if (!out) fail(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

}  // namespace caseembed
