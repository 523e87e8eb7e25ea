#include "nerclust/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "nerclust/error.hpp"

namespace nerclust {
namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void check_shape(const LabelSequences& gold, const LabelSequences& pred,
                 std::string_view what) {
  if (gold.size() != pred.size())
    throw DataError(std::string(what) + ": " + std::to_string(pred.size()) +
                    " sentences, gold has " + std::to_string(gold.size()));
  for (std::size_t s = 0; s < gold.size(); ++s)
    if (gold[s].size() != pred[s].size())
      throw DataError(std::string(what) + ": sentence " + std::to_string(s) +
                      " has " + std::to_string(pred[s].size()) +
                      " labels, gold has " + std::to_string(gold[s].size()));
}

}  // namespace

std::vector<EntitySpan> extract_entities(const std::vector<std::string>& labels,
                                         std::size_t sentence) {
  std::vector<EntitySpan> out;
  bool open = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string& l = labels[i];
    if (!is_valid_label(l))
      throw DataError("unknown label '" + l + "' at position " +
                      std::to_string(i));
    if (l == "O") {
      open = false;
      continue;
    }
    const std::string type = l.substr(2);
    if (l[0] == 'I' && open && out.back().type == type) {
      out.back().end = i;
      continue;
    }
    out.push_back({type, sentence, i, i});
    open = true;
  }
  return out;
}

double PRF::precision() const {
  return tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp);
}

double PRF::recall() const {
  return tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn);
}

double PRF::f1() const {
  const double p = precision(), r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

LabelSequences gold_labels(const LabeledCorpus& corpus) {
  LabelSequences out;
  out.reserve(corpus.sentences.size());
  for (const auto& s : corpus.sentences) out.push_back(s.labels());
  return out;
}

EvalReport score(const LabelSequences& gold, const LabelSequences& predicted) {
  check_shape(gold, predicted, "predictions");
  EvalReport report;
  for (auto t : kEntityTypes) report.per_category[std::string(t)];
  for (std::size_t s = 0; s < gold.size(); ++s) {
    auto g = extract_entities(gold[s], s);
    auto p = extract_entities(predicted[s], s);
    std::set<EntitySpan> gset(g.begin(), g.end());
    std::set<EntitySpan> pset(p.begin(), p.end());
    for (const auto& e : pset) {
      if (gset.count(e))
        ++report.per_category[e.type].tp;
      else
        ++report.per_category[e.type].fp;
    }
    for (const auto& e : gset)
      if (!pset.count(e)) ++report.per_category[e.type].fn;
  }
  for (const auto& [type, prf] : report.per_category) {
    report.overall.tp += prf.tp;
    report.overall.fp += prf.fp;
    report.overall.fn += prf.fn;
  }
  return report;
}

EvalReport score(const LabeledCorpus& gold, const LabelSequences& predicted) {
  return score(gold_labels(gold), predicted);
}

McNemarUnit parse_mcnemar_unit(std::string_view name) {
  if (name == "token") return McNemarUnit::Token;
  if (name == "entity") return McNemarUnit::Entity;
  throw UsageError("McNemar unit must be token or entity, got '" +
                   std::string(name) + "'");
}

std::string_view to_string(McNemarUnit unit) {
  return unit == McNemarUnit::Token ? "token" : "entity";
}

double mcnemar_exact_p(std::size_t b, std::size_t c) {
  const std::size_t n = b + c;
  if (n == 0) return 1.0;
  const std::size_t m = std::min(b, c);
  // log pmf(k) of Binomial(n, 1/2), summed in log space.
  double log_pmf = -double(n) * std::log(2.0);
  std::vector<double> terms;
  terms.reserve(m + 1);
  for (std::size_t k = 0; k <= m; ++k) {
    terms.push_back(log_pmf);
    log_pmf += std::log(double(n - k)) - std::log(double(k + 1));
  }
  const double top = *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - top);
  const double p = 2.0 * std::exp(top) * sum;
  return std::min(1.0, p);
}

McNemarResult mcnemar(const LabelSequences& gold, const LabelSequences& a,
                      const LabelSequences& b, McNemarUnit unit) {
  check_shape(gold, a, "system A");
  check_shape(gold, b, "system B");
  McNemarResult r;
  r.unit = unit;
  if (unit == McNemarUnit::Token) {
    for (std::size_t s = 0; s < gold.size(); ++s)
      for (std::size_t i = 0; i < gold[s].size(); ++i) {
        const bool ok_a = a[s][i] == gold[s][i];
        const bool ok_b = b[s][i] == gold[s][i];
        if (ok_a && !ok_b) ++r.b;
        if (!ok_a && ok_b) ++r.c;
      }
  } else {
    for (std::size_t s = 0; s < gold.size(); ++s) {
      const auto ea = extract_entities(a[s], s);
      const auto eb = extract_entities(b[s], s);
      const std::set<EntitySpan> sa(ea.begin(), ea.end());
      const std::set<EntitySpan> sb(eb.begin(), eb.end());
      for (const auto& e : extract_entities(gold[s], s)) {
        const bool ok_a = sa.count(e) > 0;
        const bool ok_b = sb.count(e) > 0;
        if (ok_a && !ok_b) ++r.b;
        if (!ok_a && ok_b) ++r.c;
      }
    }
  }
  r.p_value = mcnemar_exact_p(r.b, r.c);
  r.significant_01 = r.p_value < 0.01;
  r.significant_05 = r.p_value < 0.05;
  return r;
}

std::map<std::string, double> delta_report(const EvalReport& baseline,
                                           const EvalReport& system) {
  std::map<std::string, double> out;
  for (auto t : kEntityTypes) {
    const std::string type(t);
    const double base = baseline.per_category.count(type)
                            ? baseline.per_category.at(type).f1()
                            : 0.0;
    const double sys = system.per_category.count(type)
                           ? system.per_category.at(type).f1()
                           : 0.0;
    out[type] = 100.0 * (sys - base);
  }
  return out;
}

std::vector<OovEntry> oov_report(const LabeledCorpus& train,
                                 const LabeledCorpus& test,
                                 const ClusterSet& clusterings) {
  std::unordered_set<std::string> known;
  for (const auto& s : train.sentences)
    for (const auto& t : s.tokens) known.insert(t.surface);
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& s : test.sentences)
    for (const auto& t : s.tokens)
      if (!known.count(t.surface)) ++freq[t.surface];

  std::vector<OovEntry> out;
  for (const auto& [word, n] : freq) {
    OovEntry e{word, n, {}};
    for (const auto& id : clusterings.ids())
      if (clusterings.lookup(id).count(word)) e.covering.push_back(id);
    if (!e.covering.empty()) out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), [](const OovEntry& a, const OovEntry& b) {
    if (a.test_frequency != b.test_frequency)
      return a.test_frequency > b.test_frequency;
    return a.word < b.word;
  });
  return out;
}

void write_eval_report(const EvalReport& report, std::ostream& out,
                       const EvalReport* baseline) {
  out << "category\tP\tR\tF1\ttp\tfp\tfn";
  if (baseline) out << "\tdF1";
  out << '\n';
  std::map<std::string, double> delta;
  if (baseline) delta = delta_report(*baseline, report);
  auto row = [&](const std::string& name, const PRF& prf, double d) {
    out << name << '\t' << fixed(100 * prf.precision(), 2) << '\t'
        << fixed(100 * prf.recall(), 2) << '\t' << fixed(100 * prf.f1(), 2)
        << '\t' << prf.tp << '\t' << prf.fp << '\t' << prf.fn;
    if (baseline) out << '\t' << fixed(d, 2);
    out << '\n';
  };
  for (const auto& [type, prf] : report.per_category)
    row(type, prf, baseline ? delta[type] : 0.0);
  row("Overall", report.overall,
      baseline ? 100.0 * (report.overall.f1() - baseline->overall.f1()) : 0.0);
}

}  // namespace nerclust
