// Command-line front end: cluster, merge, train, tag, eval, oov-report and
// experiment subcommands.

#include <omp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "nerclust/clustering.hpp"
#include "nerclust/corpus.hpp"
#include "nerclust/crf.hpp"
#include "nerclust/error.hpp"
#include "nerclust/eval.hpp"
#include "nerclust/experiment.hpp"
#include "nerclust/merge.hpp"

namespace fs = std::filesystem;
using namespace nerclust;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

struct ColumnOptions {
  std::string format = "conll2003";
  std::string columns;
  std::string separator = "space";

  void add(CLI::App* cmd) {
    cmd->add_option("--format", format,
                    "Column layout: conll2003, conll2002, conll2002-pos");
    cmd->add_option("--columns", columns,
                    "Explicit layout, e.g. word=0,pos=1,ne=2 (overrides --format)");
    cmd->add_option("--separator", separator, "space or tab")
        ->check(CLI::IsMember({"space", "tab"}));
  }

  ColumnSpec spec() const {
    ColumnSpec s = columns.empty() ? ColumnSpec::named(format)
                                   : ColumnSpec::parse(columns);
    s.separator = separator == "tab" ? '\t' : ' ';
    return s;
  }
};

ClusterSet load_cluster_args(const std::vector<std::string>& args) {
  ClusterSet set;
  for (const auto& a : args) {
    auto [id, path] = split_assignment(a);
    set.add(id, load_clustering(path, id));
  }
  return set;
}

void set_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Word clusters as features for CRF named-entity tagging"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)");

  // cluster
  auto* cluster = app.add_subcommand("cluster", "Induce word clusters");
  std::string c_input, c_output, c_lang, c_vocab;
  ClusterTrainingConfig c_cfg;
  cluster->add_option("--input", c_input, "Plain corpus, one sentence per line")
      ->required();
  cluster->add_option("--k", c_cfg.k, "Number of clusters")->capture_default_str();
  cluster->add_option("--min-count", c_cfg.min_count, "Rare-word threshold")
      ->capture_default_str();
  cluster->add_option("--max-passes", c_cfg.max_passes, "Exchange passes")
      ->capture_default_str();
  cluster->add_option("--seed", c_cfg.seed, "Seed")->capture_default_str();
  cluster->add_option("--lang", c_lang, "Language tag written to the file");
  cluster->add_flag("--suffix-context", c_cfg.exchange.suffix_context,
                    "Add word suffixes as extra context");
  cluster->add_option("--vocab-dump", c_vocab, "Write word<TAB>count here");
  cluster->add_option("--output", c_output, "Cluster file")->required();

  // merge
  auto* merge = app.add_subcommand("merge", "Merge clusterings across languages");
  std::string m_target, m_output, m_report;
  std::vector<std::string> m_sources;
  merge->add_option("--target", m_target, "Target-language clusters")->required();
  merge->add_option("--source", m_sources, "Secondary clusters, in priority order");
  merge->add_option("--output", m_output, "Merged cluster file")->required();
  merge->add_option("--report", m_report, "Import report TSV");

  // train
  auto* train = app.add_subcommand("train", "Train a CRF tagger");
  std::string t_train, t_model, t_scheme = "bio2";
  std::vector<std::string> t_clusters, t_config;
  ColumnOptions t_cols;
  train->add_option("--train", t_train, "Labeled CoNLL file")->required();
  train->add_option("--clusters", t_clusters, "id=file, repeatable");
  train->add_option("--config", t_config, "key=value settings, repeatable");
  train->add_option("--scheme", t_scheme, "Input tag scheme: bio2 or iob1");
  t_cols.add(train);
  train->add_option("--model", t_model, "Output model file")->required();

  // tag
  auto* tag = app.add_subcommand("tag", "Tag a CoNLL file");
  std::string g_model, g_input, g_output;
  ColumnOptions g_cols;
  tag->add_option("--model", g_model, "Model file")->required();
  tag->add_option("--input", g_input, "CoNLL input")->required();
  tag->add_option("--output", g_output, "CoNLL output with predictions appended")
      ->required();
  g_cols.add(tag);

  // eval
  auto* eval = app.add_subcommand("eval", "Phrase-level evaluation");
  std::string e_gold, e_pred, e_pred_b, e_report, e_unit = "token",
                                                   e_scheme = "bio2";
  ColumnOptions e_cols;
  eval->add_option("--gold", e_gold, "Gold CoNLL file")->required();
  eval->add_option("--pred", e_pred, "Predictions (last column)")->required();
  eval->add_option("--pred-b", e_pred_b, "Second system's predictions");
  eval->add_option("--mcnemar", e_unit, "token or entity")
      ->check(CLI::IsMember({"token", "entity"}));
  eval->add_option("--scheme", e_scheme, "Gold tag scheme: bio2 or iob1");
  e_cols.add(eval);
  eval->add_option("--report", e_report, "Report TSV (default stdout)");

  // oov-report
  auto* oov = app.add_subcommand("oov-report", "Test OOV words covered by clusters");
  std::string o_train, o_test, o_output;
  std::vector<std::string> o_clusters;
  std::size_t o_top = 20;
  ColumnOptions o_cols;
  oov->add_option("--train", o_train, "Training CoNLL file")->required();
  oov->add_option("--test", o_test, "Test CoNLL file")->required();
  oov->add_option("--clusters", o_clusters, "id=file, repeatable")->required();
  oov->add_option("--top", o_top, "Rows to print")->capture_default_str();
  o_cols.add(oov);
  oov->add_option("--output", o_output, "Output TSV (default stdout)");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run a declarative experiment");
  std::string x_spec;
  exp->add_option("spec", x_spec, "Run file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    set_threads(threads);
    if (*cluster) {
      auto in = open_in(c_input);
      const PlainCorpus corpus = tokenize_plain(in);
      c_cfg.language = c_lang;
      const Vocabulary vocab =
          build_vocabulary(corpus, c_cfg.min_count, c_cfg.boundary);
      if (!c_vocab.empty()) {
        auto out = open_out(c_vocab);
        vocab.write_tsv(out);
      }
      ClusterTrainingLog log;
      const Clustering c = train_clusters(vocab, c_cfg, &log);
      auto out = open_out(c_output);
      write_clusters(c, out);
      std::fprintf(stderr, "%zu words, %zu passes, AMI %.6f bits\n", vocab.size(),
                   log.moves_per_pass.size(), log.objective_per_pass.back());
    } else if (*merge) {
      const Clustering target = load_clustering(m_target, "target");
      std::vector<Clustering> sources;
      for (std::size_t i = 0; i < m_sources.size(); ++i)
        sources.push_back(
            load_clustering(m_sources[i], "source" + std::to_string(i + 1)));
      auto [merged, report] = merge_clusterings(target, sources);
      auto out = open_out(m_output);
      write_clusters(merged, out);
      if (!m_report.empty()) {
        auto rep = open_out(m_report);
        write_merge_report(report, rep);
      }
      std::fprintf(stderr, "imported %zu words, skipped %zu\n",
                   report.imported.size(), report.skipped.size());
    } else if (*train) {
      const LabeledCorpus corpus =
          load_labeled(t_train, t_cols.spec(), parse_tag_scheme(t_scheme));
      const ClusterSet clusters = load_cluster_args(t_clusters);
      FeatureConfig features;
      TrainConfig tc;
      for (const auto& kv : t_config) {
        auto [k, v] = split_assignment(kv);
        apply_setting(k, v, features, tc);
      }
      if (features.cluster_sources.empty()) features.cluster_sources = clusters.ids();
      const CrfModel model = train_crf(corpus, features, tc, clusters);
      auto out = open_out(t_model);
      model.save(out);
      std::fprintf(stderr, "%zu attributes, %zu iterations, objective %.6f\n",
                   model.num_attributes(), model.summary().iterations,
                   model.summary().objective);
    } else if (*tag) {
      auto min = open_in(g_model);
      const CrfModel model = CrfModel::load(min);
      auto in = open_in(g_input);
      const LabeledCorpus corpus = read_conll(in, g_cols.spec());
      const auto predictions = tag_corpus(model, corpus);
      auto out = open_out(g_output);
      write_conll(corpus, out, &predictions);
    } else if (*eval) {
      const LabeledCorpus gold =
          load_labeled(e_gold, e_cols.spec(), parse_tag_scheme(e_scheme));
      auto pin = open_in(e_pred);
      const LabelSequences pa = read_label_column(pin);
      const EvalReport ra = score(gold, pa);
      std::ofstream file;
      std::ostream* out = &std::cout;
      if (!e_report.empty()) {
        file = open_out(e_report);
        out = &file;
      }
      if (e_pred_b.empty()) {
        write_eval_report(ra, *out);
      } else {
        auto bin = open_in(e_pred_b);
        const LabelSequences pb = read_label_column(bin);
        const EvalReport rb = score(gold, pb);
        const McNemarResult m =
            mcnemar(gold_labels(gold), pa, pb, parse_mcnemar_unit(e_unit));
        *out << "# system A: " << e_pred << "\n";
        write_eval_report(ra, *out);
        *out << "# system B: " << e_pred_b << " (dF1 = B - A)\n";
        write_eval_report(rb, *out, &ra);
        char p[64];
        std::snprintf(p, sizeof p, "%.6g", m.p_value);
        *out << "# mcnemar\tunit=" << to_string(m.unit) << "\tb=" << m.b
             << "\tc=" << m.c << "\tp=" << p
             << "\tsignificant_05=" << (m.significant_05 ? 1 : 0)
             << "\tsignificant_01=" << (m.significant_01 ? 1 : 0) << '\n';
      }
    } else if (*oov) {
      const ColumnSpec cols = o_cols.spec();
      auto trin = open_in(o_train);
      const LabeledCorpus tr = read_conll(trin, cols);
      auto tein = open_in(o_test);
      const LabeledCorpus te = read_conll(tein, cols);
      const ClusterSet clusters = load_cluster_args(o_clusters);
      const auto rows = oov_report(tr, te, clusters);
      std::ofstream file;
      std::ostream* out = &std::cout;
      if (!o_output.empty()) {
        file = open_out(o_output);
        out = &file;
      }
      write_oov_table(rows, o_top, *out);
    } else if (*exp) {
      const ExperimentSpec spec = ExperimentSpec::load(x_spec);
      const ExperimentResult r = run_experiment(spec);
      write_grid(spec, r, std::cout);
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kUsage;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumerical;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  }
  return kOk;
}
