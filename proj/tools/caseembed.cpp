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

// Command-line front end. Talks to the library exclusively through the C API.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "caseembed/caseembed.h"

namespace fs = std::filesystem;

namespace {

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(ce_status s, const std::string& what) {
  if (s != CE_OK) {
    throw CliError(what + ": " + ce_status_name(s) + ": " + ce_last_error());
  }
}

struct PanelFree {
  void operator()(ce_panel* p) const { ce_panel_free(p); }
};
struct CountmatFree {
  void operator()(ce_countmat* c) const { ce_countmat_free(c); }
};
struct EmbeddingFree {
  void operator()(ce_embedding* e) const { ce_embedding_free(e); }
};
using Panel = std::unique_ptr<ce_panel, PanelFree>;
using Countmat = std::unique_ptr<ce_countmat, CountmatFree>;
using Embedding = std::unique_ptr<ce_embedding, EmbeddingFree>;

std::string sha256(const std::string& path) {
  char hex[65];
  check(ce_file_sha256(path.c_str(), hex), "hashing " + path);
  return hex;
}

int parse_enum(ce_status (*parser)(const char*, int*), const std::string& text,
               const std::string& what) {
  int v = 0;
  check(parser(text.c_str(), &v), what);
  return v;
}

ce_metric parse_metric(const std::string& text) {
  ce_metric m{};
  check(ce_metric_parse(text.c_str(), &m), "--metric");
  return m;
}

// Input panel options shared by most subcommands.
struct PanelArgs {
  std::string returns;
  std::string meta;
  std::string input_granularity = "daily";

  void add(CLI::App* sub) {
    sub->add_option("--returns", returns, "long CSV: date,ticker,return")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--meta", meta, "CSV: ticker,sector[,industry]")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--input-granularity", input_granularity,
                    "granularity of the returns file");
  }

  // Loads the panel and aggregates to `target` when it is coarser.
  Panel load(const std::string& target) const {
    const int in_gran = parse_enum(ce_granularity_parse, input_granularity, "--input-granularity");
    ce_panel* raw = nullptr;
    check(ce_panel_load(returns.c_str(), meta.c_str(), in_gran, &raw), "loading panel");
    Panel p(raw);
    const int want = parse_enum(ce_granularity_parse, target, "--granularity");
    if (want == in_gran) return p;
    ce_panel* agg = nullptr;
    check(ce_panel_aggregate(p.get(), want, CE_AGG_COMPOUND, &agg), "aggregating panel");
    return Panel(agg);
  }

  void record(std::map<std::string, std::string>& inputs) const {
    inputs["returns"] = returns;
    inputs["meta"] = meta;
  }
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// key=value manifest next to the primary artifact. Only `timestamp` varies
// between identical reruns.
void write_manifest(const std::string& artifact, const CLI::App* sub,
                    const std::map<std::string, std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  std::map<std::string, std::string> config;
  for (const CLI::App* app : {sub->get_parent(), sub}) {
    for (const CLI::Option* opt : app->get_options()) {
      if (opt->get_name() == "--help" || opt->get_name() == "--config" ||
          opt->get_name() == "--threads" || opt->get_name() == "--version") {
        continue;
      }
      std::string value;
      if (opt->count() > 0) {
        for (const auto& r : opt->results()) value += (value.empty() ? "" : " ") + r;
      } else {
        value = opt->get_default_str();
      }
      config[opt->get_name()] = value;
    }
  }
  std::ofstream out(artifact + ".manifest", std::ios::binary | std::ios::trunc);
  if (!out) throw CliError("cannot write manifest for " + artifact);
  out << "tool=caseembed\n"
      << "version=" << ce_version() << '\n'
      << "command=" << sub->get_name() << '\n'
      << "timestamp=" << utc_timestamp() << '\n';
  for (const auto& [k, v] : config) out << "config." << k.substr(2) << '=' << v << '\n';
  for (const auto& [k, path] : inputs) {
    out << "input." << k << '=' << path << '\n'
        << "input." << k << ".sha256=" << sha256(path) << '\n';
  }
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    out << "output." << i << '=' << outputs[i] << '\n'
        << "output." << i << ".sha256=" << sha256(outputs[i]) << '\n';
  }
}

void require_absent(const CLI::App* sub, const char* option, const std::string& why) {
  if (sub->get_option(option)->count() > 0) {
    throw CliError(std::string("config contradiction: ") + option + " " + why);
  }
}

std::string hex_key(const std::string& text) {
  char hex[65];
  check(ce_sha256(text.data(), text.size(), hex), "hashing cache key");
  return hex;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Embedding-based case representations for financial returns"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; command-line flags take precedence");
  app.allow_config_extras(false);

  unsigned threads = 0;
  std::uint64_t seed = 0;
  app.add_option("--threads", threads, "worker threads (0 = auto)");
  app.add_option("--seed", seed, "random seed");
  app.add_flag_function(
      "--version", [](std::int64_t) {
        std::cout << "caseembed " << ce_version() << '\n';
        std::exit(0);
      },
      "print the version and exit");

  // ---- ingest ----
  auto* ingest = app.add_subcommand("ingest", "validate a returns panel and write it normalised");
  PanelArgs ingest_panel;
  std::string ingest_out, ingest_meta_out;
  ingest_panel.add(ingest);
  ingest->add_option("--out", ingest_out, "normalised long CSV")->required();
  ingest->add_option("--out-meta", ingest_meta_out, "normalised meta CSV");

  // ---- aggregate ----
  auto* aggregate = app.add_subcommand("aggregate", "aggregate a daily panel to weekly/monthly");
  PanelArgs agg_panel;
  std::string agg_to = "weekly", agg_mode = "compound", agg_out, agg_meta_out;
  agg_panel.add(aggregate);
  aggregate->add_option("--to", agg_to, "weekly | monthly");
  aggregate->add_option("--mode", agg_mode, "compound | sum")
      ->check(CLI::IsMember({"compound", "sum"}));
  aggregate->add_option("--out", agg_out, "aggregated long CSV")->required();
  aggregate->add_option("--out-meta", agg_meta_out, "meta CSV for the aggregated panel");

  // ---- countmat ----
  auto* countmat = app.add_subcommand("countmat", "accumulate the top-k similarity count matrix");
  PanelArgs cm_panel;
  std::string cm_gran = "daily", cm_metric = "hybrid", cm_out, cm_cache;
  std::size_t cm_lookback = 5, cm_k = 50;
  cm_panel.add(countmat);
  countmat->add_option("--granularity", cm_gran, "daily | weekly | monthly");
  countmat->add_option("--lookback", cm_lookback, "window length n")->check(CLI::Range(2, 1 << 20));
  countmat->add_option("--k", cm_k, "top-k neighbours counted per time point")
      ->check(CLI::PositiveNumber);
  countmat->add_option("--metric", cm_metric, "euclidean | pearson | hybrid[@w]");
  countmat->add_option("--out", cm_out, "count-matrix file")->required();
  countmat->add_option("--cache-dir", cm_cache, "reuse count matrices keyed by content digest");

  // ---- embed ----
  auto* embed = app.add_subcommand("embed", "learn embeddings from a count matrix");
  PanelArgs emb_panel;
  std::string emb_countmat, emb_out, emb_meta_out;
  ce_factorize_config fc = ce_factorize_default_config();
  std::size_t fc_d = fc.d, fc_epochs = fc.epochs;
  emb_panel.add(embed);
  embed->add_option("--countmat", emb_countmat, "count-matrix file")
      ->required()
      ->check(CLI::ExistingFile);
  embed->add_option("--d", fc_d, "embedding dimensionality")->check(CLI::PositiveNumber);
  embed->add_option("--lambda", fc.lambda, "regularisation rate");
  embed->add_option("--learning-rate", fc.learning_rate, "initial gradient-descent step");
  embed->add_option("--epochs", fc_epochs, "maximum epochs")->check(CLI::NonNegativeNumber);
  embed->add_option("--tolerance", fc.tolerance, "early stop on relative loss change");
  embed->add_option("--out", emb_out, "embedding CSV")->required();
  embed->add_option("--out-meta", emb_meta_out, "training metadata (default <out>.meta)");

  // ---- classify / explain ----
  struct ClassifyArgs {
    PanelArgs panel;
    std::string granularity = "daily", representation = "embedding", knn_metric = "euclidean";
    std::string embeddings, out;
    std::size_t knn_k = 5;
    std::vector<std::string> queries;
  };
  ClassifyArgs cls, expl;
  expl.knn_k = 3;
  auto add_classify = [](CLI::App* sub, ClassifyArgs& a, bool out_required) {
    a.panel.add(sub);
    sub->add_option("--granularity", a.granularity, "daily | weekly | monthly");
    sub->add_option("--representation", a.representation, "summary | raw | embedding");
    sub->add_option("--embeddings", a.embeddings, "embedding CSV (Embedding representation)")
        ->check(CLI::ExistingFile);
    sub->add_option("--knn-metric", a.knn_metric, "euclidean | pearson");
    sub->add_option("--knn-k", a.knn_k, "neighbours per query")->check(CLI::PositiveNumber);
    sub->add_option("--query", a.queries, "query ticker(s); default all assets");
    auto* o = sub->add_option("--out", a.out, "neighbour-explanation CSV");
    if (out_required) o->required();
  };
  auto* classify = app.add_subcommand("classify", "leave-one-out kNN sector prediction");
  add_classify(classify, cls, true);
  auto* explain = app.add_subcommand("explain", "list nearest neighbours for query assets");
  add_classify(explain, expl, false);

  // ---- evaluate / grid ----
  struct EvalArgs {
    PanelArgs panel;
    std::string representation = "embedding", countmat_metric = "hybrid",
                knn_metric = "euclidean", granularity = "daily";
    std::size_t lookback = 5, k = 50, knn_k = 5, folds = 5, d = 15, epochs = 2000;
    double lambda = 0.1, learning_rate = 0.05, tolerance = 1e-7;
    bool no_stratify = false;
    std::string cache_dir;
  };
  EvalArgs ev, gr;
  auto add_eval_common = [](CLI::App* sub, EvalArgs& a) {
    a.panel.add(sub);
    sub->add_option("--k", a.k, "count-matrix top-k")->check(CLI::PositiveNumber);
    sub->add_option("--knn-k", a.knn_k, "kNN neighbours")->check(CLI::PositiveNumber);
    sub->add_option("--folds", a.folds, "cross-validation folds")->check(CLI::Range(2, 1 << 20));
    sub->add_option("--d", a.d, "embedding dimensionality")->check(CLI::PositiveNumber);
    sub->add_option("--lambda", a.lambda, "regularisation rate");
    sub->add_option("--learning-rate", a.learning_rate, "initial gradient-descent step");
    sub->add_option("--epochs", a.epochs, "maximum epochs")->check(CLI::NonNegativeNumber);
    sub->add_option("--tolerance", a.tolerance, "early stop on relative loss change");
    sub->add_flag("--no-stratify", a.no_stratify, "plain shuffled folds");
    sub->add_option("--cache-dir", a.cache_dir, "artifact cache directory");
  };
  auto* evaluate = app.add_subcommand("evaluate", "cross-validated evaluation of one configuration");
  std::string ev_report, ev_results;
  add_eval_common(evaluate, ev);
  evaluate->add_option("--representation", ev.representation, "summary | raw | embedding");
  evaluate->add_option("--countmat-metric", ev.countmat_metric, "E | P | H (Embedding only)");
  evaluate->add_option("--knn-metric", ev.knn_metric, "euclidean | pearson");
  evaluate->add_option("--granularity", ev.granularity, "daily | weekly | monthly");
  evaluate->add_option("--lookback", ev.lookback, "window length (Embedding only)");
  evaluate->add_option("--report", ev_report, "per-run JSON report")->required();
  evaluate->add_option("--results", ev_results, "one-row results CSV");

  auto* grid = app.add_subcommand("grid", "evaluate a grid of configurations");
  bool paper_table1 = false;
  std::string grid_configs, grid_out;
  add_eval_common(grid, gr);
  grid->add_flag("--paper-table1", paper_table1, "the 27 reference configurations");
  grid->add_option("--configs", grid_configs,
                   "CSV: representation,countmat_metric,knn_metric,granularity,lookback")
      ->check(CLI::ExistingFile);
  grid->add_option("--out", grid_out, "results CSV")->required();

  // ---- export-graph ----
  auto* graph = app.add_subcommand("export-graph", "thresholded embedding similarity graph");
  PanelArgs g_panel;
  std::string g_embeddings, g_edges, g_nodes, g_gexf, g_outliers;
  double g_threshold = 0.75;
  g_panel.add(graph);
  graph->add_option("--embeddings", g_embeddings, "embedding CSV")
      ->required()
      ->check(CLI::ExistingFile);
  graph->add_option("--threshold", g_threshold, "minimum cosine similarity for an edge");
  graph->add_option("--edges", g_edges, "edge list CSV")->required();
  graph->add_option("--nodes", g_nodes, "node list CSV");
  graph->add_option("--gexf", g_gexf, "GEXF graph file");
  graph->add_option("--outliers", g_outliers, "low-purity node report CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    std::map<std::string, std::string> inputs;
    std::vector<std::string> outputs;
    const CLI::App* sub = app.get_subcommands().front();
    std::string artifact;

    if (ingest->parsed()) {
      Panel p = ingest_panel.load(ingest_panel.input_granularity);
      check(ce_panel_write(p.get(), ingest_out.c_str(),
                           ingest_meta_out.empty() ? nullptr : ingest_meta_out.c_str()),
            "writing panel");
      std::cerr << "panel: N=" << ce_panel_num_assets(p.get())
                << " T=" << ce_panel_num_periods(p.get())
                << " classes=" << ce_panel_num_classes(p.get()) << '\n';
      ingest_panel.record(inputs);
      artifact = ingest_out;
      outputs.push_back(ingest_out);
      if (!ingest_meta_out.empty()) outputs.push_back(ingest_meta_out);
    } else if (aggregate->parsed()) {
      Panel p = agg_panel.load(agg_panel.input_granularity);
      ce_panel* raw = nullptr;
      check(ce_panel_aggregate(p.get(), parse_enum(ce_granularity_parse, agg_to, "--to"),
                               agg_mode == "sum" ? CE_AGG_SUM : CE_AGG_COMPOUND, &raw),
            "aggregating");
      Panel out(raw);
      check(ce_panel_write(out.get(), agg_out.c_str(),
                           agg_meta_out.empty() ? nullptr : agg_meta_out.c_str()),
            "writing panel");
      agg_panel.record(inputs);
      artifact = agg_out;
      outputs.push_back(agg_out);
      if (!agg_meta_out.empty()) outputs.push_back(agg_meta_out);
    } else if (countmat->parsed()) {
      Panel p = cm_panel.load(cm_gran);
      const ce_metric metric = parse_metric(cm_metric);
      std::string cached;
      if (!cm_cache.empty()) {
        char digest[65];
        check(ce_panel_digest(p.get(), digest), "digesting panel");
        std::ostringstream key;
        key << digest << "|n=" << cm_lookback << "|k=" << cm_k << "|metric=" << cm_metric;
        fs::create_directories(cm_cache);
        cached = (fs::path(cm_cache) / (hex_key(key.str()) + ".countmat")).string();
      }
      if (!cached.empty() && fs::exists(cached)) {
        fs::copy_file(cached, cm_out, fs::copy_options::overwrite_existing);
        std::cerr << "count matrix reused from cache " << cached << '\n';
      } else {
        ce_countmat* raw = nullptr;
        std::size_t flat = 0;
        check(ce_countmat_compute(p.get(), cm_lookback, cm_k, metric, threads, &raw, &flat),
              "accumulating counts");
        Countmat cm(raw);
        check(ce_countmat_write(cm.get(), cm_out.c_str()), "writing count matrix");
        if (!cached.empty()) fs::copy_file(cm_out, cached, fs::copy_options::overwrite_existing);
        std::cerr << "count matrix: N=" << ce_countmat_size(cm.get())
                  << " tvalid=" << ce_countmat_tvalid(cm.get())
                  << " zero-variance comparisons=" << flat << '\n';
      }
      cm_panel.record(inputs);
      artifact = cm_out;
      outputs.push_back(cm_out);
    } else if (embed->parsed()) {
      Panel p = emb_panel.load(emb_panel.input_granularity);
      ce_countmat* raw = nullptr;
      check(ce_countmat_read(emb_countmat.c_str(), &raw), "reading count matrix");
      Countmat cm(raw);
      if (ce_countmat_size(cm.get()) != ce_panel_num_assets(p.get())) {
        throw CliError("count matrix size does not match the panel's asset count");
      }
      fc.d = static_cast<std::uint32_t>(fc_d);
      fc.epochs = static_cast<std::uint32_t>(fc_epochs);
      fc.seed = seed;
      ce_embedding* e = nullptr;
      check(ce_embed_train(cm.get(), &fc, &e), "training embeddings");
      Embedding emb(e);
      if (emb_meta_out.empty()) emb_meta_out = emb_out + ".meta";
      check(ce_embedding_write(emb.get(), p.get(), emb_out.c_str(), emb_meta_out.c_str()),
            "writing embeddings");
      std::cerr << "embeddings: N=" << ce_embedding_size(emb.get())
                << " d=" << ce_embedding_dim(emb.get())
                << " epochs=" << ce_embedding_epochs_run(emb.get())
                << " final_loss=" << ce_embedding_final_loss(emb.get()) << '\n';
      emb_panel.record(inputs);
      inputs["countmat"] = emb_countmat;
      artifact = emb_out;
      outputs = {emb_out, emb_meta_out};
    } else if (classify->parsed() || explain->parsed()) {
      const bool is_explain = explain->parsed();
      ClassifyArgs& a = is_explain ? expl : cls;
      const CLI::App* s = is_explain ? explain : classify;
      Panel p = a.panel.load(a.granularity);
      const int rep = parse_enum(ce_representation_parse, a.representation, "--representation");
      const int km = parse_enum(ce_knn_metric_parse, a.knn_metric, "--knn-metric");
      Embedding emb;
      if (rep == CE_REP_EMBEDDING) {
        if (a.embeddings.empty()) throw CliError("--embeddings is required for the Embedding representation");
        ce_embedding* e = nullptr;
        check(ce_embedding_read(a.embeddings.c_str(), nullptr, p.get(), &e), "reading embeddings");
        emb.reset(e);
        inputs["embeddings"] = a.embeddings;
      } else {
        require_absent(s, "--embeddings", "applies only to the Embedding representation");
      }
      std::vector<const char*> q;
      for (const auto& t : a.queries) q.push_back(t.c_str());
      if (is_explain) {
        char* text = nullptr;
        check(ce_explain(p.get(), rep, emb.get(), km, a.knn_k, q.data(), q.size(), &text),
              "explaining");
        std::cout << text;
        ce_string_free(text);
      }
      if (!a.out.empty()) {
        double acc = 0.0;
        check(ce_classify(p.get(), rep, emb.get(), km, a.knn_k, q.data(), q.size(),
                          a.out.c_str(), &acc),
              "classifying");
        if (!is_explain) std::cerr << "leave-one-out accuracy: " << acc << '\n';
        artifact = a.out;
        outputs.push_back(a.out);
      }
      a.panel.record(inputs);
    } else if (evaluate->parsed()) {
      ce_experiment_config cfg = ce_experiment_default_config();
      cfg.representation = parse_enum(ce_representation_parse, ev.representation, "--representation");
      if (cfg.representation != CE_REP_EMBEDDING) {
        require_absent(evaluate, "--lookback", "applies only to the Embedding representation");
        require_absent(evaluate, "--countmat-metric", "applies only to the Embedding representation");
        cfg.lookback = 0;
      } else {
        cfg.lookback = static_cast<std::uint32_t>(ev.lookback);
      }
      cfg.countmat_metric = parse_metric(ev.countmat_metric);
      cfg.knn_metric = parse_enum(ce_knn_metric_parse, ev.knn_metric, "--knn-metric");
      cfg.granularity = parse_enum(ce_granularity_parse, ev.granularity, "--granularity");
      cfg.k_count = static_cast<std::uint32_t>(ev.k);
      cfg.knn_k = static_cast<std::uint32_t>(ev.knn_k);
      cfg.folds = static_cast<std::uint32_t>(ev.folds);
      cfg.seed = seed;
      cfg.stratified = ev.no_stratify ? 0 : 1;
      cfg.factorize.d = static_cast<std::uint32_t>(ev.d);
      cfg.factorize.lambda = ev.lambda;
      cfg.factorize.learning_rate = ev.learning_rate;
      cfg.factorize.epochs = static_cast<std::uint32_t>(ev.epochs);
      cfg.factorize.tolerance = ev.tolerance;
      Panel p = ev.panel.load(ev.panel.input_granularity);
      double prf[3];
      check(ce_evaluate(p.get(), &cfg, ev.cache_dir.empty() ? nullptr : ev.cache_dir.c_str(),
                        threads, ev_report.c_str(),
                        ev_results.empty() ? nullptr : ev_results.c_str(), prf),
            "evaluating");
      std::printf("weighted precision=%.4f recall=%.4f f1=%.4f\n", prf[0], prf[1], prf[2]);
      ev.panel.record(inputs);
      artifact = ev_report;
      outputs.push_back(ev_report);
      if (!ev_results.empty()) outputs.push_back(ev_results);
    } else if (grid->parsed()) {
      if (paper_table1 == !grid_configs.empty()) {
        throw CliError("give exactly one of --paper-table1 or --configs");
      }
      ce_experiment_config base = ce_experiment_default_config();
      base.k_count = static_cast<std::uint32_t>(gr.k);
      base.knn_k = static_cast<std::uint32_t>(gr.knn_k);
      base.folds = static_cast<std::uint32_t>(gr.folds);
      base.seed = seed;
      base.stratified = gr.no_stratify ? 0 : 1;
      base.factorize.d = static_cast<std::uint32_t>(gr.d);
      base.factorize.lambda = gr.lambda;
      base.factorize.learning_rate = gr.learning_rate;
      base.factorize.epochs = static_cast<std::uint32_t>(gr.epochs);
      base.factorize.tolerance = gr.tolerance;
      std::vector<ce_experiment_config> configs;
      if (paper_table1) {
        configs.resize(ce_reference_grid(&base, nullptr, 0));
        ce_reference_grid(&base, configs.data(), configs.size());
      } else {
        std::ifstream in(grid_configs);
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
          if (line.empty()) continue;
          std::vector<std::string> f;
          std::stringstream ss(line);
          for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
          if (f.size() != 5) throw CliError("bad --configs line: " + line);
          ce_experiment_config c = base;
          c.representation = parse_enum(ce_representation_parse, f[0], "representation");
          if (c.representation == CE_REP_EMBEDDING) c.countmat_metric = parse_metric(f[1]);
          c.knn_metric = parse_enum(ce_knn_metric_parse, f[2], "knn_metric");
          c.granularity = parse_enum(ce_granularity_parse, f[3], "granularity");
          c.lookback = f[4] == "-" || f[4].empty() ? 0 : static_cast<std::uint32_t>(std::stoul(f[4]));
          configs.push_back(c);
        }
      }
      Panel p = gr.panel.load(gr.panel.input_granularity);
      const std::string errors_csv = grid_out + ".errors.csv";
      std::size_t rows = 0, errors = 0;
      check(ce_grid(p.get(), configs.data(), configs.size(),
                    gr.cache_dir.empty() ? nullptr : gr.cache_dir.c_str(), threads,
                    grid_out.c_str(), errors_csv.c_str(), &rows, &errors),
            "running grid");
      std::cerr << "grid: " << rows << " rows, " << errors << " errors\n";
      gr.panel.record(inputs);
      if (!grid_configs.empty()) inputs["configs"] = grid_configs;
      artifact = grid_out;
      outputs = {grid_out, errors_csv};
    } else if (graph->parsed()) {
      Panel p = g_panel.load(g_panel.input_granularity);
      ce_embedding* e = nullptr;
      check(ce_embedding_read(g_embeddings.c_str(), nullptr, p.get(), &e), "reading embeddings");
      Embedding emb(e);
      std::size_t edges = 0;
      double purity = 0.0;
      auto opt = [](const std::string& s) { return s.empty() ? nullptr : s.c_str(); };
      check(ce_export_graph(emb.get(), p.get(), g_threshold, g_edges.c_str(), opt(g_nodes),
                            opt(g_gexf), opt(g_outliers), &edges, &purity),
            "exporting graph");
      std::cerr << "graph: " << edges << " edges, mean purity " << purity << '\n';
      g_panel.record(inputs);
      inputs["embeddings"] = g_embeddings;
      artifact = g_edges;
      for (const auto& s : {g_edges, g_nodes, g_gexf, g_outliers}) {
        if (!s.empty()) outputs.push_back(s);
      }
    }

    if (!artifact.empty()) write_manifest(artifact, sub, inputs, outputs);
  } catch (const std::exception& e) {
    std::cerr << "caseembed: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
