#include "nerclust/crf.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_set>

#include "nerclust/error.hpp"
#include "nerclust/lbfgs.hpp"

namespace nerclust {
namespace {

constexpr std::string_view kModelMagic = "nerclust-crf";
constexpr int kModelVersion = 1;

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw DataError("model file: bad number '" + std::string(s) + "'");
  return v;
}

std::size_t parse_count(std::string_view s) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw DataError("model file: bad count '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_bool(std::string_view v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw UsageError("expected a boolean, got '" + std::string(v) + "'");
}

std::string_view entity_type(std::string_view label) {
  return label.size() > 2 ? label.substr(2) : std::string_view{};
}

}  // namespace

void TrainConfig::set(std::string_view key, std::string_view value) {
  const std::string v(value);
  try {
    if (key == "l2_sigma") {
      l2_sigma = std::stod(v);
    } else if (key == "lbfgs_history") {
      lbfgs_history = std::stoul(v);
    } else if (key == "tolerance") {
      tolerance = std::stod(v);
    } else if (key == "max_iterations") {
      max_iterations = std::stoul(v);
    } else if (key == "seed") {
      seed = std::stoull(v);
    } else if (key == "parallel") {
      parallel = parse_bool(value);
    } else {
      throw UsageError("unknown training setting '" + std::string(key) + "'");
    }
  } catch (const std::logic_error&) {
    throw UsageError("bad value '" + v + "' for " + std::string(key));
  }
}

void TrainConfig::validate() const {
  if (!(l2_sigma > 0.0)) throw UsageError("l2_sigma must be positive");
  if (lbfgs_history == 0) throw UsageError("lbfgs_history must be positive");
}

std::vector<std::string> make_label_set(const std::set<std::string>& types) {
  std::vector<std::string> labels{"O"};
  for (const auto& t : types) {
    labels.push_back("B-" + t);
    labels.push_back("I-" + t);
  }
  return labels;
}

CrfModel::CrfModel(std::vector<std::string> labels,
                   std::vector<std::string> attributes, FeatureConfig config,
                   ClusterSet clusters, double l2_sigma)
    : labels_(std::move(labels)),
      attributes_(std::move(attributes)),
      config_(std::move(config)),
      clusters_(std::move(clusters)),
      l2_sigma_(l2_sigma) {
  if (labels_.empty() || labels_.front() != "O")
    throw DataError("label list must start with O");
  for (const auto& l : labels_)
    if (!is_valid_label(l)) throw DataError("invalid label '" + l + "'");
  config_.validate();
  for (const auto& src : config_.cluster_sources) clusters_.lookup(src);
  attribute_index_.reserve(attributes_.size());
  for (std::uint32_t i = 0; i < attributes_.size(); ++i)
    if (!attribute_index_.emplace(attributes_[i], i).second)
      throw DataError("duplicate attribute '" + attributes_[i] + "'");
  weights_.assign(kernels::chain_weight_count(labels_.size(), attributes_.size()),
                  0.0);
  build_masks();
}

void CrfModel::build_masks() {
  const std::size_t L = labels_.size();
  allowed_.assign(L * L, 1);
  allowed_start_.assign(L, 1);
  if (!config_.transition_mask) return;
  for (std::size_t c = 0; c < L; ++c) {
    if (labels_[c][0] != 'I') continue;
    allowed_start_[c] = 0;
    for (std::size_t p = 0; p < L; ++p)
      allowed_[p * L + c] = labels_[p] != "O" &&
                            entity_type(labels_[p]) == entity_type(labels_[c]);
  }
}

std::optional<int> CrfModel::label_id(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return int(it - labels_.begin());
}

std::optional<std::uint32_t> CrfModel::attribute_id(std::string_view attr) const {
  auto it = attribute_index_.find(std::string(attr));
  if (it == attribute_index_.end()) return std::nullopt;
  return it->second;
}

bool CrfModel::allowed(std::size_t prev, std::size_t cur) const {
  return allowed_[prev * labels_.size() + cur] != 0;
}

bool CrfModel::allowed_start(std::size_t label) const {
  return allowed_start_[label] != 0;
}

std::vector<std::vector<std::uint32_t>> CrfModel::sentence_attributes(
    const Sentence& sentence) const {
  std::vector<std::vector<std::uint32_t>> out(sentence.size());
  for (std::size_t t = 0; t < sentence.size(); ++t) {
    for (const auto& f : extract_features(sentence, t, config_, clusters_))
      if (auto id = attribute_id(f)) out[t].push_back(*id);
  }
  return out;
}

kernels::ChainData CrfModel::compile(std::span<const Sentence> sentences,
                                     bool with_gold) const {
  kernels::ChainData data;
  data.num_labels = labels_.size();
  data.num_attributes = attributes_.size();
  std::vector<int> gold;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const Sentence& sent = sentences[s];
    if (sent.tokens.empty()) throw DataError("empty sentence " + std::to_string(s));
    if (with_gold) {
      gold.clear();
      for (const auto& tok : sent.tokens) {
        const std::string label = tok.ne_label.value_or("O");
        auto id = label_id(label);
        if (!id)
          throw DataError("sentence " + std::to_string(s) + ": label '" + label +
                          "' is not in the model label set");
        gold.push_back(*id);
      }
    }
    data.add_sentence(sentence_attributes(sent), with_gold ? &gold : nullptr);
  }
  data.finalize();
  return data;
}

kernels::ChainParams CrfModel::params(std::span<const double> weights) const {
  kernels::ChainParams p;
  p.num_labels = labels_.size();
  p.num_attributes = attributes_.size();
  p.weights = weights;
  p.allowed = allowed_;
  p.allowed_start = allowed_start_;
  return p;
}

kernels::ChainParams CrfModel::params() const { return params(weights_); }

double log_partition(const CrfModel& model, const Sentence& sentence) {
  const auto data = model.compile(std::span(&sentence, 1), false);
  return kernels::chain_log_partition(data, model.params(), 0);
}

std::vector<double> label_marginals(const CrfModel& model,
                                    const Sentence& sentence) {
  const auto data = model.compile(std::span(&sentence, 1), false);
  return kernels::chain_marginals(data, model.params(), 0);
}

std::vector<std::string> viterbi_decode(const CrfModel& model,
                                        const Sentence& sentence) {
  const auto data = model.compile(std::span(&sentence, 1), false);
  std::vector<int> ids(data.tokens());
  kernels::chain_decode_serial(data, model.params(), ids);
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int y : ids) out.push_back(model.labels()[std::size_t(y)]);
  return out;
}

std::vector<std::vector<std::string>> tag_corpus(const CrfModel& model,
                                                 const LabeledCorpus& corpus,
                                                 bool parallel) {
  std::vector<std::vector<std::string>> out;
  if (corpus.sentences.empty()) return out;
  const auto data = model.compile(corpus.sentences, false);
  std::vector<int> ids(data.tokens());
  if (parallel)
    kernels::chain_decode_omp(data, model.params(), ids);
  else
    kernels::chain_decode_serial(data, model.params(), ids);
  out.resize(corpus.sentences.size());
  for (std::size_t s = 0; s < out.size(); ++s)
    for (std::size_t t = data.sentence_start[s]; t < data.sentence_start[s + 1]; ++t)
      out[s].push_back(model.labels()[std::size_t(ids[t])]);
  return out;
}

namespace {

double regularized(const kernels::ChainData& data, const CrfModel& model,
                   std::span<const double> w, std::span<double> grad,
                   double sigma, bool parallel) {
  const auto p = model.params(w);
  const double loglik = parallel ? kernels::chain_loglik_omp(data, p, grad)
                                 : kernels::chain_loglik_serial(data, p, grad);
  const double inv_var = 1.0 / (sigma * sigma);
  double norm = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    norm += w[i] * w[i];
    grad[i] -= w[i] * inv_var;
  }
  return loglik - 0.5 * norm * inv_var;
}

}  // namespace

ObjectiveValue objective_and_gradient(const CrfModel& model,
                                      std::span<const Sentence> sentences,
                                      double l2_sigma, bool parallel) {
  if (sentences.empty()) throw DataError("empty corpus");
  if (!(l2_sigma > 0.0)) throw UsageError("l2_sigma must be positive");
  const auto data = model.compile(sentences, true);
  ObjectiveValue out;
  out.gradient.assign(model.weights().size(), 0.0);
  out.value = regularized(data, model, model.weights(), out.gradient, l2_sigma,
                          parallel);
  return out;
}

CrfModel train_crf(const LabeledCorpus& corpus, const FeatureConfig& features,
                   const TrainConfig& train, const ClusterSet& clusters) {
  if (corpus.sentences.empty()) throw DataError("empty training corpus");
  train.validate();
  features.validate();

  std::set<std::string> types(corpus.label_set.begin(), corpus.label_set.end());
  for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
    const auto labels = corpus.sentences[s].labels();
    try {
      to_bio2(labels, TagScheme::BIO2);
    } catch (const DataError& e) {
      throw DataError("training sentence " + std::to_string(s) + ", " + e.what());
    }
    for (const auto& l : labels)
      if (l != "O") types.emplace(entity_type(l));
  }

  ClusterSet used;
  for (const auto& src : features.cluster_sources) {
    const auto& lookup = clusters.lookup(src);
    used.add(src, lookup);
  }

  std::unordered_set<std::string> seen;
  for (const auto& sent : corpus.sentences)
    for (std::size_t t = 0; t < sent.size(); ++t)
      for (auto& f : extract_features(sent, t, features, used))
        seen.insert(std::move(f));
  std::vector<std::string> attributes(seen.begin(), seen.end());
  std::sort(attributes.begin(), attributes.end());

  CrfModel model(make_label_set(types), std::move(attributes), features,
                 std::move(used), train.l2_sigma);
  const auto data = model.compile(corpus.sentences, true);

  const double sigma = train.l2_sigma;
  const bool parallel = train.parallel;
  Objective negated = [&](std::span<const double> w, std::span<double> g) {
    const double v = regularized(data, model, w, g, sigma, parallel);
    for (double& x : g) x = -x;
    return -v;
  };
  LbfgsOptions opts;
  opts.history = train.lbfgs_history;
  opts.tolerance = train.tolerance;
  opts.max_iterations = train.max_iterations;
  std::vector<double> w = model.weights();
  const LbfgsResult r = lbfgs_minimize(negated, w, opts);
  model.weights() = std::move(w);

  TrainingSummary summary;
  summary.iterations = r.iterations;
  summary.converged = r.converged;
  summary.objective = -r.value;
  for (double v : r.values) summary.objective_history.push_back(-v);
  model.set_summary(std::move(summary));
  return model;
}

// ---------------------------------------------------------------------------
// Model file

void CrfModel::save(std::ostream& out) const {
  out << kModelMagic << '\t' << kModelVersion << '\n';
  out << "labels";
  for (const auto& l : labels_) out << '\t' << l;
  out << '\n';
  out << "l2_sigma\t" << format_double(l2_sigma_) << '\n';
  for (const auto& [k, v] : config_.to_pairs())
    out << "config\t" << k << '\t' << v << '\n';
  out << "summary\t" << summary_.iterations << '\t'
      << (summary_.converged ? 1 : 0) << '\t'
      << format_double(summary_.objective) << '\n';
  for (const auto& id : clusters_.ids()) {
    const auto& lookup = clusters_.lookup(id);
    std::vector<std::pair<std::string_view, int>> rows(lookup.begin(),
                                                       lookup.end());
    std::sort(rows.begin(), rows.end());
    out << "clusters\t" << id << '\t' << rows.size() << '\n';
    for (const auto& [w, c] : rows) out << w << '\t' << c << '\n';
  }
  const std::size_t L = labels_.size();
  out << "attributes\t" << attributes_.size() << '\n';
  for (std::size_t a = 0; a < attributes_.size(); ++a) {
    out << attributes_[a];
    for (std::size_t y = 0; y < L; ++y)
      out << '\t' << format_double(weights_[a * L + y]);
    out << '\n';
  }
  const std::size_t trans = attributes_.size() * L;
  out << "transitions\n";
  for (std::size_t p = 0; p < L; ++p) {
    for (std::size_t c = 0; c < L; ++c)
      out << (c ? "\t" : "") << format_double(weights_[trans + p * L + c]);
    out << '\n';
  }
  out << "start";
  for (std::size_t y = 0; y < L; ++y)
    out << '\t' << format_double(weights_[trans + L * L + y]);
  out << "\nend\n";
}

CrfModel CrfModel::load(std::istream& in) {
  std::string line;
  auto next = [&](std::string_view what) -> std::vector<std::string_view> {
    if (!std::getline(in, line))
      throw DataError("model file truncated before " + std::string(what));
    return split_tabs(line);
  };
  auto head = next("header");
  if (head.size() != 2 || head[0] != kModelMagic)
    throw DataError("not a nerclust model file");
  if (parse_count(head[1]) != std::size_t(kModelVersion))
    throw DataError("unsupported model version " + std::string(head[1]));

  auto f = next("labels");
  if (f.empty() || f[0] != "labels") throw DataError("model file: expected labels");
  std::vector<std::string> labels(f.begin() + 1, f.end());

  f = next("l2_sigma");
  if (f.size() != 2 || f[0] != "l2_sigma")
    throw DataError("model file: expected l2_sigma");
  const double sigma = parse_double(f[1]);

  FeatureConfig config;
  ClusterSet clusters;
  TrainingSummary summary;
  std::vector<std::string> attributes;
  std::vector<double> emission;
  while (true) {
    f = next("attributes");
    if (f[0] == "config" && f.size() == 3) {
      config.set(f[1], f[2]);
    } else if (f[0] == "summary" && f.size() == 4) {
      summary.iterations = parse_count(f[1]);
      summary.converged = f[2] == "1";
      summary.objective = parse_double(f[3]);
    } else if (f[0] == "clusters" && f.size() == 3) {
      const std::string id(f[1]);
      const std::size_t n = parse_count(f[2]);
      std::unordered_map<std::string, int> lookup;
      lookup.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        auto row = next("cluster rows");
        if (row.size() != 2) throw DataError("model file: bad cluster row");
        lookup.emplace(std::string(row[0]), int(parse_count(row[1])));
      }
      clusters.add(id, std::move(lookup));
    } else if (f[0] == "attributes" && f.size() == 2) {
      const std::size_t n = parse_count(f[1]);
      attributes.reserve(n);
      emission.reserve(n * labels.size());
      for (std::size_t i = 0; i < n; ++i) {
        auto row = next("attribute rows");
        if (row.size() != labels.size() + 1)
          throw DataError("model file: bad attribute row");
        attributes.emplace_back(row[0]);
        for (std::size_t y = 0; y < labels.size(); ++y)
          emission.push_back(parse_double(row[y + 1]));
      }
      break;
    } else {
      throw DataError("model file: unexpected line '" + line + "'");
    }
  }

  CrfModel model(std::move(labels), std::move(attributes), std::move(config),
                 std::move(clusters), sigma);
  model.set_summary(std::move(summary));
  const std::size_t L = model.num_labels();
  std::copy(emission.begin(), emission.end(), model.weights_.begin());
  f = next("transitions");
  if (f.size() != 1 || f[0] != "transitions")
    throw DataError("model file: expected transitions");
  const std::size_t trans = model.num_attributes() * L;
  for (std::size_t p = 0; p < L; ++p) {
    auto row = next("transition rows");
    if (row.size() != L) throw DataError("model file: bad transition row");
    for (std::size_t c = 0; c < L; ++c)
      model.weights_[trans + p * L + c] = parse_double(row[c]);
  }
  f = next("start");
  if (f.size() != L + 1 || f[0] != "start")
    throw DataError("model file: expected start row");
  for (std::size_t y = 0; y < L; ++y)
    model.weights_[trans + L * L + y] = parse_double(f[y + 1]);
  f = next("end");
  if (f.size() != 1 || f[0] != "end") throw DataError("model file: missing end");
  return model;
}

}  // namespace nerclust
