// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "dwalign/corpus.hpp"
#include "dwalign/dwa.hpp"
#include "dwalign/eval.hpp"
#include "dwalign/fa_align.hpp"
#include "dwalign/lbl.hpp"
#include "dwalign/model_io.hpp"
#include "dwalign/transfer.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;
using namespace dwalign;
using dwalign::testkit::DictionaryCorpus;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// Shared dictionary-corpus pipeline; built once, used by several checks.
struct Pipeline {
  DictionaryCorpus data;
  ParallelCorpus corpus;
  fa::TrainResult fa;
  dwa::TrainResult dwa;
  double fa_seconds = 0.0;
  double dwa_seconds = 0.0;
};

Pipeline& pipeline() {
  static Pipeline p = [] {
    Pipeline p;
    p.data = testkit::make_dictionary_corpus();
    p.corpus = build_parallel_corpus(p.data.raw, 1, 1);
    auto t0 = Clock::now();
    fa::TrainOptions fo;
    fo.iterations = 5;
    p.fa = fa::train(p.corpus, fo);
    p.fa_seconds = seconds_since(t0);

    t0 = Clock::now();
    dwa::TrainConfig dc;
    dc.dim = 16;
    dc.context = 0;
    dc.epochs = 40;
    dc.shuffle = false;
    p.dwa = dwa::train(p.corpus, p.fa.params, dc);
    p.dwa_seconds = seconds_since(t0);
    return p;
  }();
  return p;
}

Outcome declare_scale() {
  return {true,
          "published full-scale AER and classification accuracy need large licensed "
          "corpora and are not reproduced here; the oracle and synthetic checks below "
          "stand in for them"};
}

Outcome marginalization() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> len(1, 3);
  std::uniform_real_distribution<double> lam(0.1, 20.0), p0(0.0, 0.5), u(0.01, 1.0);
  const std::size_t src_vocab = 5, tgt_vocab = 4;
  double worst = 0.0;
  std::size_t instances = 0;
  for (; instances < 1200; ++instances) {
    fa::FaParams params;
    params.lambda = lam(rng);
    params.p0 = p0(rng);
    params.ttable = fa::TranslationTable::uniform(src_vocab, tgt_vocab);
    for (WordId e = 0; e < src_vocab; ++e) {
      auto& row = params.ttable.mutable_row(e);
      row.unseen = 0.0;
      row.entries.clear();
      double sum = 0.0;
      std::vector<double> w(tgt_vocab);
      for (auto& x : w) sum += (x = u(rng));
      for (WordId f = 0; f < tgt_vocab; ++f) row.entries.emplace_back(f, w[f] / sum);
    }
    const auto pair = testkit::random_pair(rng, len(rng), len(rng), src_vocab, tgt_vocab);
    const auto oracle = testkit::enumerate_alignments(pair, params);
    worst = std::max(worst, std::abs(oracle.loglik - fa::sentence_loglik(pair, params)));
    worst = std::max(worst, (oracle.posteriors - fa::e_step(pair, params)).cwiseAbs().maxCoeff());
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 10.0,
          std::to_string(instances) + " instances, max abs diff " + fmt("%.3g", worst) +
              ", " + fmt("%.2f", secs) + " s"};
}

Outcome gradients() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  const std::size_t contexts[] = {0, 1, 3};
  std::uniform_int_distribution<std::size_t> dim(1, 4), tgt(2, 6), len(1, 3), cls(1, 3);
  std::uniform_real_distribution<double> lam(0.5, 10.0), p0(0.01, 0.3);
  std::size_t instances = 0, checked = 0, failed = 0;
  double worst = 0.0;
  std::string where;
  for (; instances < 240; ++instances) {
    lbl::ModelShape shape;
    shape.src_vocab = 6;
    shape.tgt_vocab = tgt(rng);
    shape.classes = std::min(cls(rng), shape.tgt_vocab);
    shape.dim = dim(rng);
    shape.context = contexts[instances % 3];
    dwa::Model model;
    model.params = testkit::random_params(rng, shape);
    model.classes = testkit::random_partition(rng, shape.tgt_vocab, shape.classes);
    model.lambda = lam(rng);
    model.p0 = p0(rng);
    const auto pair = testkit::random_pair(rng, len(rng), len(rng), shape.src_vocab,
                                           shape.tgt_vocab);
    const auto gamma = testkit::random_posteriors(rng, pair.src_len(), pair.tgt_len());
    const auto c = testkit::check_sentence_gradient(pair, gamma, model);
    checked += c.checked;
    failed += c.failed;
    if (c.worst > worst) {
      worst = c.worst;
      where = c.worst_where;
    }
  }
  const double secs = seconds_since(t0);
  return {failed == 0 && secs < 60.0,
          std::to_string(instances) + " instances, " + std::to_string(checked) +
              " coordinates, worst rel err " + fmt("%.3g", worst) + " (" + where + "), " +
              fmt("%.2f", secs) + " s"};
}

bool partition_invariants(const ClassPartition& p, std::span<const std::uint64_t> freqs) {
  const std::size_t n = freqs.size();
  const double total = static_cast<double>(std::accumulate(freqs.begin(), freqs.end(),
                                                           std::uint64_t{0}));
  const double threshold = total / std::sqrt(static_cast<double>(n));
  const double max_size = std::sqrt(static_cast<double>(n));
  std::vector<int> seen(n, 0);
  for (std::size_t c = 0; c < p.num_classes(); ++c) {
    const auto& m = p.members[c];
    if (m.empty()) return false;
    double cum = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
      if (++seen.at(m[k]) != 1) return false;
      if (p.class_of[m[k]] != c || p.within_index[m[k]] != k) return false;
      // a class only grows while it is under both limits
      if (k > 0 && (cum >= threshold || static_cast<double>(k) >= max_size)) return false;
      cum += static_cast<double>(freqs[m[k]]);
    }
  }
  // classes follow decreasing frequency
  std::uint64_t last = std::numeric_limits<std::uint64_t>::max();
  for (const auto& m : p.members)
    for (auto w : m) {
      if (freqs[w] > last) return false;
      last = freqs[w];
    }
  return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
}

Outcome normalization() {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<std::size_t> dim(1, 8), tgt(1, 40), len(1, 6), ctx(0, 2);
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    lbl::ModelShape shape{8, tgt(rng), 0, dim(rng), ctx(rng)};
    std::uniform_int_distribution<std::size_t> cls(1, shape.tgt_vocab);
    shape.classes = cls(rng);
    const auto params = testkit::random_params(rng, shape, 3.0);
    const auto classes = testkit::random_partition(rng, shape.tgt_vocab, shape.classes);
    const auto pair = testkit::random_pair(rng, len(rng), 1, shape.src_vocab, shape.tgt_vocab);
    for (std::size_t i = 1; i <= pair.src_len(); ++i) {
      double s = 0.0;
      for (WordId f = 0; f < shape.tgt_vocab; ++f)
        s += lbl::translation_prob(f, i, pair.src, params, classes);
      worst = std::max(worst, std::abs(s - 1.0));
    }
    double s = 0.0;
    for (WordId f = 0; f < shape.tgt_vocab; ++f) s += lbl::null_prob(f, params);
    worst = std::max(worst, std::abs(s - 1.0));
  }

  bool classes_ok = true;
  std::size_t vocabularies = 0;
  for (std::size_t n : {1, 2, 3, 4, 7, 10, 50, 100, 999, 1000, 4321, 10000}) {
    for (int rep = 0; rep < 3; ++rep, ++vocabularies) {
      std::vector<std::uint64_t> freqs(n);
      std::uniform_int_distribution<std::uint64_t> f(0, rep == 0 ? 3 : 100000);
      for (auto& x : freqs) x = f(rng);
      if (rep == 2)  // Zipf-like
        for (std::size_t k = 0; k < n; ++k) freqs[k] = 1 + 100000 / (k + 1);
      classes_ok = classes_ok && partition_invariants(build_classes(freqs), freqs);
    }
  }
  return {worst <= 1e-10 && classes_ok,
          "100 draws, max |sum-1| " + fmt("%.3g", worst) + "; class invariants on " +
              std::to_string(vocabularies) + " vocabularies up to 10000 words " +
              (classes_ok ? "hold" : "VIOLATED")};
}

double pipeline_aer(const std::function<AlignmentLinks(const SentencePair&)>& align) {
  const auto& p = pipeline();
  std::vector<AlignmentLinks> pred;
  for (const auto& pair : p.corpus.pairs()) pred.push_back(align(pair));
  return eval::corpus_aer(pred, p.data.gold);
}

Outcome recovery() {
  auto& p = pipeline();
  const double fa_aer =
      pipeline_aer([&](const SentencePair& s) { return fa::viterbi_align(s, p.fa.params); });
  const double dwa_aer =
      pipeline_aer([&](const SentencePair& s) { return dwa::viterbi_align(s, p.dwa.model); });
  const double secs = p.fa_seconds + p.dwa_seconds;
  return {p.data.gold.size() == p.corpus.size() && fa_aer <= 0.05 && dwa_aer <= 0.10 &&
              secs < 120.0,
          "FA AER " + fmt("%.4f", fa_aer) + ", DWA AER " + fmt("%.4f", dwa_aer) +
              ", training " + fmt("%.1f", secs) + " s"};
}

Outcome ascent() {
  const auto& p = pipeline();
  double fa_drop = 0.0;
  for (std::size_t t = 1; t < p.fa.loglik.size(); ++t)
    fa_drop = std::max(fa_drop, p.fa.loglik[t - 1] - p.fa.loglik[t]);
  double dwa_ratio = 0.0;  // worst drop relative to |Q|
  for (std::size_t t = 1; t < p.dwa.q.size(); ++t)
    dwa_ratio = std::max(dwa_ratio, (p.dwa.q[t - 1] - p.dwa.q[t]) / std::abs(p.dwa.q[t - 1]));
  return {p.fa.loglik.size() == 6 && fa_drop <= 1e-6 && dwa_ratio <= 1e-3,
          "FA max drop " + fmt("%.3g", fa_drop) + " over 5 iterations; DWA max relative drop " +
              fmt("%.3g", dwa_ratio) + " over " + std::to_string(p.dwa.q.size() - 1) +
              " epochs (Q " + fmt("%.1f", p.dwa.q.front()) + " -> " +
              fmt("%.1f", p.dwa.q.back()) + ")"};
}

Outcome transfer_task() {
  const auto& p = pipeline();
  const auto task = testkit::make_transfer_task();
  const auto train = transfer::featurize(
      task.train, transfer::projected_source_table(p.dwa.model, p.corpus.src_vocab()));
  const auto test =
      transfer::featurize(task.test, transfer::target_table(p.dwa.model, p.corpus.tgt_vocab()));
  transfer::PerceptronOptions opts;
  opts.epochs = 3;
  const auto model = transfer::train_perceptron(train, task.train.num_labels(), opts);
  const double acc = transfer::classify_eval(model, test);
  const double majority = transfer::majority_baseline(train, test, task.train.num_labels());
  return {train.size() == 200 && test.size() == 200 && acc >= 0.90 && majority >= 0.25 &&
              majority <= 0.47,
          "accuracy " + fmt("%.3f", acc) + " vs majority baseline " + fmt("%.3f", majority)};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  return cli::run(args, out, err);
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / ("dwalign-accept-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  testkit::DictionaryCorpusOptions o;
  o.pairs = 300;
  const auto data = testkit::make_dictionary_corpus(o);
  {
    std::ofstream c(dir / "corpus.txt");
    for (const auto& r : data.raw) {
      for (std::size_t k = 0; k < r.src.size(); ++k) c << (k ? " " : "") << r.src[k];
      c << " ||| ";
      for (std::size_t k = 0; k < r.tgt.size(); ++k) c << (k ? " " : "") << r.tgt[k];
      c << '\n';
    }
  }
  const std::string corpus = (dir / "corpus.txt").string();
  bool ok = true;
  for (const char* run : {"a", "b"}) {
    const std::string fa_out = (dir / (std::string("fa.") + run)).string();
    const std::string dwa_out = (dir / (std::string("dwa.") + run)).string();
    ok = ok && cli({"train-fa", "--corpus", corpus, "--iters", "3", "--out", fa_out}) == 0;
    ok = ok && cli({"train-dwa", "--corpus", corpus, "--fa", fa_out, "--dim", "8", "--epochs",
                    "3", "--seed", "5", "--out", dwa_out}) == 0;
  }
  const bool fa_same = ok && slurp(dir / "fa.a") == slurp(dir / "fa.b");
  const bool dwa_same = ok && slurp(dir / "dwa.a") == slurp(dir / "dwa.b");

  // load -> save reproduces the bytes, and the loaded objects compare equal
  bool round_trip = ok;
  if (ok) {
    const auto fa_file = load_fa_model((dir / "fa.a").string());
    const auto dwa_file = load_dwa_model((dir / "dwa.a").string());
    std::ostringstream fa_again, dwa_again;
    write_fa_model(fa_again, fa_file);
    write_dwa_model(dwa_again, dwa_file);
    std::istringstream fa_in(fa_again.str()), dwa_in(dwa_again.str());
    round_trip = fa_again.str() == slurp(dir / "fa.a") && dwa_again.str() == slurp(dir / "dwa.a") &&
                 read_fa_model(fa_in) == fa_file && read_dwa_model(dwa_in) == dwa_file;
  }
  fs::remove_all(dir);
  return {fa_same && dwa_same && round_trip,
          std::string("train-fa files ") + (fa_same ? "identical" : "DIFFER") +
              ", train-dwa files " + (dwa_same ? "identical" : "DIFFER") + ", round trip " +
              (round_trip ? "bit-exact" : "NOT exact")};
}

Outcome aer_units() {
  GoldAlignment g1{{{0, 0}}, {{0, 0}, {1, 1}}};
  GoldAlignment g2{{{0, 0}}, {{0, 0}}};
  const double a = eval::aer({{0, 0}, {1, 1}}, g1);
  const double b = eval::aer({{0, 1}}, g2);
  const double c = eval::aer({}, g2);
  return {a == 0.0 && b == 1.0 && c == 1.0,
          "got " + fmt("%.17g", a) + ", " + fmt("%.17g", b) + ", " + fmt("%.17g", c)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks = {
      {"full-scale results declared non-reproducible", declare_scale},
      {"FA marginalization matches exhaustive enumeration", marginalization},
      {"DWA sentence gradient matches finite differences", gradients},
      {"translation and NULL distributions normalize; class partition invariants",
       normalization},
      {"synthetic dictionary recovery (FA and DWA AER)", recovery},
      {"EM log-likelihood and DWA Q ascent", ascent},
      {"cross-lingual document classification transfer", transfer_task},
      {"deterministic training and bit-exact model round trip", determinism},
      {"AER hand-computed examples", aer_units},
  };
  int failures = 0;
  for (const auto& [name, check] : checks) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
