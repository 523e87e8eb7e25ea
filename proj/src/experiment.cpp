#include "nerclust/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "nerclust/error.hpp"
#include "nerclust/merge.hpp"

namespace nerclust {
namespace fs = std::filesystem;
namespace {

constexpr std::string_view kFeatureKeys[] = {
    "context_window", "cluster_window", "use_shape",       "use_prefix_suffix",
    "use_pos",        "use_lemma",      "use_bigrams",     "transition_mask",
    "cluster_sources"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

// Runs one stage, prefixing errors with its name while keeping the category.
template <typename F>
auto stage(std::string_view name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const UsageError& e) {
    throw UsageError(std::string(name) + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(name) + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(std::string(name) + ": " + e.what());
  } catch (const fs::filesystem_error& e) {
    throw DataError(std::string(name) + ": " + e.what());
  }
}

std::string stars(const McNemarResult& r) {
  if (r.significant_01) return "**";
  if (r.significant_05) return "*";
  return "";
}

}  // namespace

void apply_setting(std::string_view key, std::string_view value,
                   FeatureConfig& features, TrainConfig& train) {
  if (std::find(std::begin(kFeatureKeys), std::end(kFeatureKeys), key) !=
      std::end(kFeatureKeys))
    features.set(key, value);
  else
    train.set(key, value);
}

std::pair<std::string, std::string> split_assignment(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0 || eq + 1 == text.size())
    throw UsageError("expected id=value, got '" + std::string(text) + "'");
  return {std::string(trim(text.substr(0, eq))),
          std::string(trim(text.substr(eq + 1)))};
}

Clustering load_clustering(const fs::path& path, const std::string& id) {
  auto in = open_in(path);
  Clustering c = [&] {
    try {
      return read_clusters(in);
    } catch (const DataError& e) {
      throw DataError(path.string() + ": " + e.what());
    }
  }();
  if (c.language().empty()) c.set_language(id);
  return c;
}

LabeledCorpus load_labeled(const fs::path& path, const ColumnSpec& columns,
                           TagScheme scheme) {
  auto in = open_in(path);
  try {
    return normalize_tag_scheme(read_conll(in, columns), scheme);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

ExperimentSpec ExperimentSpec::parse(std::istream& in, const fs::path& base) {
  ExperimentSpec spec;
  auto resolve = [&](std::string_view p) {
    fs::path path{std::string(p)};
    return path.is_absolute() ? path : base / path;
  };
  std::string raw;
  std::size_t line_no = 0;
  std::optional<char> separator;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw UsageError("run file line " + std::to_string(line_no) +
                       ": expected key = value");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    try {
      if (key == "name") {
        spec.name = value;
      } else if (key == "train") {
        spec.train = resolve(value);
      } else if (key == "test") {
        spec.test = resolve(value);
      } else if (key == "format") {
        spec.train_columns = spec.test_columns = ColumnSpec::named(value);
      } else if (key == "columns") {
        spec.train_columns = spec.test_columns = ColumnSpec::parse(value);
      } else if (key == "train_columns") {
        spec.train_columns = ColumnSpec::parse(value);
      } else if (key == "test_columns") {
        spec.test_columns = ColumnSpec::parse(value);
      } else if (key == "separator") {
        if (value == "tab")
          separator = '\t';
        else if (value == "space")
          separator = ' ';
        else
          throw UsageError("separator must be tab or space");
      } else if (key == "scheme") {
        spec.scheme = parse_tag_scheme(value);
      } else if (key == "clusters") {
        auto [id, path] = split_assignment(value);
        spec.clusterings.push_back({id, resolve(path)});
      } else if (key == "merge") {
        auto [id, rhs] = split_assignment(value);
        Merge m{id, {}, {}};
        std::size_t start = 0;
        std::vector<std::string> parts;
        while (start <= rhs.size()) {
          auto plus = rhs.find('+', start);
          parts.emplace_back(trim(std::string_view(rhs).substr(start, plus - start)));
          if (plus == std::string::npos) break;
          start = plus + 1;
        }
        if (parts.size() < 2)
          throw UsageError("merge needs target+source[+source...]");
        m.target = parts.front();
        m.sources.assign(parts.begin() + 1, parts.end());
        spec.merges.push_back(std::move(m));
      } else if (key == "output") {
        spec.output = resolve(value);
      } else if (key == "mcnemar") {
        spec.unit = parse_mcnemar_unit(value);
      } else if (key == "oov_top") {
        spec.oov_top = std::stoul(std::string(value));
      } else {
        apply_setting(key, value, spec.features, spec.training);
      }
    } catch (const UsageError& e) {
      throw UsageError("run file line " + std::to_string(line_no) + ": " +
                       e.what());
    } catch (const std::logic_error&) {
      throw UsageError("run file line " + std::to_string(line_no) +
                       ": bad value '" + std::string(value) + "'");
    }
  }
  if (separator) {
    spec.train_columns.separator = *separator;
    spec.test_columns.separator = *separator;
  }
  spec.validate();
  return spec;
}

ExperimentSpec ExperimentSpec::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw UsageError("cannot open run file " + file.string());
  return parse(in, file.parent_path());
}

void ExperimentSpec::validate() const {
  if (train.empty() || test.empty())
    throw UsageError("run file needs train and test");
  if (output.empty()) throw UsageError("run file needs output");
  if (fs::path(train).lexically_normal() == fs::path(test).lexically_normal())
    throw UsageError("train and test must be different files");
  std::set<std::string> ids{"baseline"};
  for (const auto& c : clusterings)
    if (!ids.insert(c.id).second)
      throw UsageError("duplicate or reserved clustering id '" + c.id + "'");
  std::set<std::string> plain(ids);
  for (const auto& m : merges) {
    if (!ids.insert(m.id).second)
      throw UsageError("duplicate or reserved clustering id '" + m.id + "'");
    for (const auto& part : m.sources)
      if (!plain.count(part) || part == "baseline")
        throw UsageError("merge '" + m.id + "' refers to unknown clustering '" +
                         part + "'");
    if (!plain.count(m.target) || m.target == "baseline")
      throw UsageError("merge '" + m.id + "' refers to unknown clustering '" +
                       m.target + "'");
  }
  if (!features.cluster_sources.empty())
    throw UsageError("cluster_sources is set per system by the experiment");
  training.validate();
  features.validate();
}

// ---------------------------------------------------------------------------

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const fs::path out_dir = spec.output;
  stage("output", [&] { fs::create_directories(out_dir); });

  const LabeledCorpus train = stage("read train", [&] {
    return load_labeled(spec.train, spec.train_columns, spec.scheme);
  });
  const LabeledCorpus test = stage("read test", [&] {
    return load_labeled(spec.test, spec.test_columns, spec.scheme);
  });
  if (train.sentences.empty()) throw DataError("read train: no sentences");
  if (test.sentences.empty()) throw DataError("read test: no sentences");

  std::vector<std::pair<std::string, Clustering>> clusterings;
  for (const auto& src : spec.clusterings)
    clusterings.emplace_back(src.id, stage("read clusters " + src.id, [&] {
                               return load_clustering(src.path, src.id);
                             }));
  auto find_clustering = [&](const std::string& id) -> const Clustering& {
    for (const auto& [cid, c] : clusterings)
      if (cid == id) return c;
    throw UsageError("unknown clustering '" + id + "'");
  };
  for (const auto& m : spec.merges) {
    auto merged = stage("merge " + m.id, [&] {
      std::vector<Clustering> sources;
      for (const auto& s : m.sources) sources.push_back(find_clustering(s));
      auto [c, report] = merge_clusterings(find_clustering(m.target), sources);
      auto out = open_out(out_dir / "clusters" / (m.id + ".tsv"));
      write_clusters(c, out);
      auto rep = open_out(out_dir / "merge" / (m.id + ".report.tsv"));
      write_merge_report(report, rep);
      return c;
    });
    clusterings.emplace_back(m.id, std::move(merged));
  }

  ClusterSet all;
  for (const auto& [id, c] : clusterings) all.add(id, c);

  ExperimentResult result;
  std::vector<std::string> systems{"baseline"};
  for (const auto& [id, c] : clusterings) systems.push_back(id);
  const LabelSequences gold = gold_labels(test);

  for (const auto& id : systems) {
    SystemResult sys;
    sys.id = id;
    FeatureConfig features = spec.features;
    if (id != "baseline") features.cluster_sources = {id};
    const CrfModel model = stage("train " + id, [&] {
      return train_crf(train, features, spec.training, all);
    });
    stage("write model " + id, [&] {
      auto out = open_out(out_dir / "models" / (id + ".model"));
      model.save(out);
    });
    sys.predictions = stage("tag " + id, [&] { return tag_corpus(model, test); });
    stage("write predictions " + id, [&] {
      auto out = open_out(out_dir / "predictions" / (id + ".conll"));
      write_conll(test, out, &sys.predictions);
    });
    sys.report = stage("eval " + id, [&] { return score(gold, sys.predictions); });
    if (id != "baseline")
      sys.versus_baseline = mcnemar(gold, result.systems.front().predictions,
                                    sys.predictions, spec.unit);
    stage("write report " + id, [&] {
      auto out = open_out(out_dir / "eval" / (id + ".tsv"));
      write_eval_report(sys.report, out,
                        id == "baseline" ? nullptr : &result.systems.front().report);
    });
    result.systems.push_back(std::move(sys));
  }

  result.oov = oov_report(train, test, all);

  stage("write tables", [&] {
    auto grid = open_out(out_dir / "grid.tsv");
    write_grid(spec, result, grid);
    auto sig = open_out(out_dir / "significance.tsv");
    sig << "system\tunit\tb\tc\tp_value\n";
    for (const auto& s : result.systems) {
      if (!s.versus_baseline) continue;
      const auto& m = *s.versus_baseline;
      char p[64];
      std::snprintf(p, sizeof p, "%.6g", m.p_value);
      sig << s.id << '\t' << to_string(m.unit) << '\t' << m.b << '\t' << m.c
          << '\t' << p << '\n';
    }
    auto delta = open_out(out_dir / "delta.tsv");
    write_delta_table(result, delta);
    auto oov = open_out(out_dir / "oov.tsv");
    write_oov_table(result.oov, spec.oov_top, oov);
  });
  return result;
}

void write_grid(const ExperimentSpec& spec, const ExperimentResult& result,
                std::ostream& out) {
  out << "# F1; ** -> (p<0.01), * -> (p<0.05); McNemar, "
      << to_string(spec.unit) << " unit, against Baseline (None)\n";
  out << "Word Clusters\t" << spec.name << '\n';
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : result.systems) {
    const double f1 = 100.0 * s.report.overall.f1();
    if (s.id == "baseline") {
      out << "Baseline (None)\t" << fixed(f1, 2) << '\n';
      continue;
    }
    out << s.id << '\t' << fixed(f1, 2) << stars(*s.versus_baseline) << '\n';
    sum += f1;
    ++n;
  }
  if (n > 0) out << "Average\t" << fixed(sum / double(n), 2) << '\n';
}

void write_delta_table(const ExperimentResult& result, std::ostream& out) {
  const auto& base = result.systems.front().report;
  std::vector<std::pair<std::string, std::map<std::string, double>>> cols;
  for (const auto& s : result.systems)
    if (s.id != "baseline") cols.emplace_back(s.id, delta_report(base, s.report));
  out << "NEs";
  for (const auto& [id, d] : cols) out << '\t' << id;
  if (!cols.empty()) out << "\tAvg.";
  out << '\n';
  for (auto t : kEntityTypes) {
    const std::string type(t);
    out << type;
    double sum = 0.0;
    for (const auto& [id, d] : cols) {
      out << '\t' << fixed(d.at(type), 2);
      sum += d.at(type);
    }
    if (!cols.empty()) out << '\t' << fixed(sum / double(cols.size()), 2);
    out << '\n';
  }
}

void write_oov_table(const std::vector<OovEntry>& oov, std::size_t top,
                     std::ostream& out) {
  out << "word\ttest_frequency\tclusterings\n";
  for (std::size_t i = 0; i < oov.size() && i < top; ++i) {
    out << oov[i].word << '\t' << oov[i].test_frequency << '\t';
    for (std::size_t j = 0; j < oov[i].covering.size(); ++j)
      out << (j ? "," : "") << oov[i].covering[j];
    out << '\n';
  }
}

}  // namespace nerclust
