#include "dwalign/fa_align.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>

#include "dwalign/error.hpp"

namespace dwalign::fa {

namespace {

void check_positions(std::size_t i, std::size_t j, std::size_t src_len,
                     std::size_t tgt_len) {
  if (src_len == 0 || tgt_len == 0 || i > src_len || j == 0 || j > tgt_len)
    throw std::out_of_range("alignment position (i=" + std::to_string(i) +
                            ", j=" + std::to_string(j) + ") outside I=" +
                            std::to_string(src_len) +
                            ", J=" + std::to_string(tgt_len));
}

// Non-null prior weights exp(lambda * h) for i = 1..I, returned with their sum.
double diagonal_weights(std::size_t j, std::size_t src_len, std::size_t tgt_len,
                        double lambda, std::span<double> w) {
  double z = 0.0;
  for (std::size_t i = 1; i <= src_len; ++i) {
    w[i] = std::exp(lambda * diagonal_feature(i, j, src_len, tgt_len));
    z += w[i];
  }
  return z;
}

WordId source_word(const SentencePair& pair, std::size_t i, WordId null_word) {
  return i == 0 ? null_word : pair.src[i - 1];
}

}  // namespace

double diagonal_feature(std::size_t i, std::size_t j, std::size_t src_len,
                        std::size_t tgt_len) {
  return -std::abs(static_cast<double>(i) / static_cast<double>(src_len) -
                   static_cast<double>(j) / static_cast<double>(tgt_len));
}

double alignment_prior(std::size_t i, std::size_t j, std::size_t src_len,
                       std::size_t tgt_len, double lambda, double p0) {
  check_positions(i, j, src_len, tgt_len);
  std::vector<double> column(src_len + 1);
  prior_column(j, src_len, tgt_len, lambda, p0, column);
  return column[i];
}

void prior_column(std::size_t j, std::size_t src_len, std::size_t tgt_len,
                  double lambda, double p0, std::span<double> out) {
  check_positions(0, j, src_len, tgt_len);
  if (out.size() != src_len + 1)
    throw std::invalid_argument("prior column has the wrong size");
  const double z = diagonal_weights(j, src_len, tgt_len, lambda, out);
  const double scale = (1.0 - p0) / z;
  out[0] = p0;
  for (std::size_t i = 1; i <= src_len; ++i) out[i] *= scale;
}

double expected_feature(std::size_t j, std::size_t src_len, std::size_t tgt_len,
                        double lambda) {
  check_positions(0, j, src_len, tgt_len);
  std::vector<double> w(src_len + 1);
  const double z = diagonal_weights(j, src_len, tgt_len, lambda, w);
  double e = 0.0;
  for (std::size_t i = 1; i <= src_len; ++i)
    e += w[i] * diagonal_feature(i, j, src_len, tgt_len);
  return e / z;
}

TranslationTable TranslationTable::uniform(std::size_t src_size,
                                           std::size_t tgt_size) {
  if (tgt_size == 0) throw std::invalid_argument("empty target vocabulary");
  TranslationTable t;
  t.tgt_size_ = tgt_size;
  t.rows_.assign(src_size, Row{1.0 / static_cast<double>(tgt_size), {}});
  return t;
}

double TranslationTable::prob(WordId e, WordId f) const {
  const Row& r = rows_[e];
  auto it = std::lower_bound(
      r.entries.begin(), r.entries.end(), f,
      [](const std::pair<WordId, double>& entry, WordId id) { return entry.first < id; });
  if (it != r.entries.end() && it->first == f) return it->second;
  return r.unseen;
}

double TranslationTable::row_sum(WordId e) const {
  const Row& r = rows_.at(e);
  double s = r.unseen * static_cast<double>(tgt_size_ - r.entries.size());
  for (const auto& [f, p] : r.entries) s += p;
  return s;
}

WordId TranslationTable::best(WordId e) const {
  const Row& r = rows_.at(e);
  // Smallest id that carries the unseen mass.
  WordId first_unseen = 0;
  for (const auto& [f, p] : r.entries) {
    if (f != first_unseen) break;
    ++first_unseen;
  }
  WordId best = 0;
  double best_p = -1.0;
  if (first_unseen < tgt_size_) {
    best = first_unseen;
    best_p = r.unseen;
  }
  for (const auto& [f, p] : r.entries) {
    if (p > best_p || (p == best_p && f < best)) {
      best = f;
      best_p = p;
    }
  }
  return best;
}

FaParams FaParams::initial(const Vocab& src_vocab, const Vocab& tgt_vocab,
                           double lambda, double p0) {
  FaParams params;
  params.lambda = std::clamp(lambda, kLambdaMin, kLambdaMax);
  params.p0 = p0;
  params.null_word = src_vocab.null();
  params.ttable = TranslationTable::uniform(src_vocab.size(), tgt_vocab.size());
  return params;
}

double sentence_loglik(const SentencePair& pair, const FaParams& params) {
  const std::size_t src_len = pair.src_len();
  const std::size_t tgt_len = pair.tgt_len();
  std::vector<double> prior(src_len + 1);
  double ll = 0.0;
  for (std::size_t j = 1; j <= tgt_len; ++j) {
    prior_column(j, src_len, tgt_len, params.lambda, params.p0, prior);
    const WordId f = pair.tgt[j - 1];
    double marginal = 0.0;
    for (std::size_t i = 0; i <= src_len; ++i)
      marginal += prior[i] * params.translation(source_word(pair, i, params.null_word), f);
    ll += std::log(marginal);
  }
  return ll;
}

PosteriorTable e_step(const SentencePair& pair, const FaParams& params) {
  const std::size_t src_len = pair.src_len();
  const std::size_t tgt_len = pair.tgt_len();
  PosteriorTable gamma(tgt_len, src_len + 1);
  std::vector<double> prior(src_len + 1);
  for (std::size_t j = 1; j <= tgt_len; ++j) {
    prior_column(j, src_len, tgt_len, params.lambda, params.p0, prior);
    const WordId f = pair.tgt[j - 1];
    double z = 0.0;
    for (std::size_t i = 0; i <= src_len; ++i) {
      const double p =
          prior[i] * params.translation(source_word(pair, i, params.null_word), f);
      gamma(j - 1, i) = p;
      z += p;
    }
    gamma.row(j - 1) /= z;
  }
  return gamma;
}

void ExpectedCounts::add(const SentencePair& pair, const PosteriorTable& gamma,
                         WordId null_word) {
  const std::size_t src_len = pair.src_len();
  const std::size_t tgt_len = pair.tgt_len();
  auto& mass = length_mass_[{src_len, tgt_len}];
  if (mass.empty()) mass.assign(tgt_len, 0.0);
  for (std::size_t j = 1; j <= tgt_len; ++j) {
    const WordId f = pair.tgt[j - 1];
    double non_null = 0.0;
    for (std::size_t i = 0; i <= src_len; ++i) {
      const double g = gamma(j - 1, i);
      if (g == 0.0) continue;
      rows_[source_word(pair, i, null_word)][f] += g;
      if (i > 0) {
        non_null += g;
        empirical_feature_ += g * diagonal_feature(i, j, src_len, tgt_len);
      }
    }
    mass[j - 1] += non_null;
  }
  target_tokens_ += static_cast<double>(tgt_len);
}

void ExpectedCounts::add_count(WordId e, WordId f, double c) { rows_.at(e)[f] += c; }

void ExpectedCounts::merge(const ExpectedCounts& other) {
  if (other.rows_.size() != rows_.size())
    throw std::invalid_argument("merging counts of different vocabularies");
  for (std::size_t e = 0; e < rows_.size(); ++e)
    for (const auto& [f, c] : other.rows_[e]) rows_[e][f] += c;
  empirical_feature_ += other.empirical_feature_;
  target_tokens_ += other.target_tokens_;
  for (const auto& [key, m] : other.length_mass_) {
    auto& mine = length_mass_[key];
    if (mine.empty()) mine.assign(m.size(), 0.0);
    for (std::size_t j = 0; j < m.size(); ++j) mine[j] += m[j];
  }
}

double lambda_gradient(const ExpectedCounts& counts, double lambda) {
  if (counts.target_tokens() == 0.0) return 0.0;
  double model = 0.0;
  for (const auto& [lengths, mass] : counts.length_mass()) {
    const auto [src_len, tgt_len] = lengths;
    for (std::size_t j = 1; j <= tgt_len; ++j)
      if (mass[j - 1] != 0.0)
        model += mass[j - 1] * expected_feature(j, src_len, tgt_len, lambda);
  }
  return (counts.empirical_feature() - model) / counts.target_tokens();
}

FaParams m_step(const ExpectedCounts& counts, const FaParams& params,
                const MStepOptions& options) {
  FaParams next = params;
  const std::size_t tgt_size = params.ttable.tgt_size();
  const double floor_mass = options.floor * static_cast<double>(tgt_size);
  std::vector<std::pair<WordId, double>> entries;
  for (WordId e = 0; e < counts.src_size(); ++e) {
    const auto& row = counts.row(e);
    entries.assign(row.begin(), row.end());
    std::sort(entries.begin(), entries.end());
    double total = 0.0;
    for (const auto& [f, c] : entries) total += c;
    if (total <= 0.0) continue;
    const double denom = total + floor_mass;
    auto& out = next.ttable.mutable_row(e);
    out.unseen = options.floor / denom;
    out.entries.clear();
    out.entries.reserve(entries.size());
    for (const auto& [f, c] : entries) out.entries.emplace_back(f, (c + options.floor) / denom);
  }
  if (options.optimize_lambda) {
    for (int step = 0; step < options.lambda_steps; ++step) {
      next.lambda += options.lambda_step_size * lambda_gradient(counts, next.lambda);
      next.lambda = std::clamp(next.lambda, kLambdaMin, kLambdaMax);
    }
  }
  return next;
}

namespace {

template <class Shard>
std::vector<std::invoke_result_t<Shard, std::size_t, std::size_t>> run_sharded(
    std::size_t n, std::size_t threads, Shard&& shard) {
  using Result = std::invoke_result_t<Shard, std::size_t, std::size_t>;
  threads = std::max<std::size_t>(1, std::min(threads, n));
  std::vector<Result> out(threads);
  if (threads == 1) {
    out[0] = shard(0, n);
    return out;
  }
  std::vector<std::jthread> workers;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(n, t * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    workers.emplace_back([&out, &shard, t, begin, end] { out[t] = shard(begin, end); });
  }
  return out;
}

}  // namespace

double corpus_loglik(const ParallelCorpus& corpus, const FaParams& params,
                     std::size_t threads) {
  const auto pairs = corpus.pairs();
  const auto parts = run_sharded(pairs.size(), threads, [&](std::size_t b, std::size_t e) {
    double ll = 0.0;
    for (std::size_t n = b; n < e; ++n) ll += sentence_loglik(pairs[n], params);
    return ll;
  });
  double total = 0.0;
  for (double ll : parts) total += ll;
  return total;
}

EStepResult accumulate(const ParallelCorpus& corpus, const FaParams& params,
                       std::size_t threads) {
  const auto pairs = corpus.pairs();
  const std::size_t src_size = params.ttable.src_size();
  auto run_shard = [&](std::size_t begin, std::size_t end) {
    EStepResult r{ExpectedCounts(src_size), 0.0};
    for (std::size_t n = begin; n < end; ++n) {
      const auto gamma = e_step(pairs[n], params);
      r.counts.add(pairs[n], gamma, params.null_word);
      r.loglik += sentence_loglik(pairs[n], params);
    }
    return r;
  };

  auto shards = run_sharded(pairs.size(), threads, run_shard);
  EStepResult total{ExpectedCounts(src_size), 0.0};
  for (const auto& s : shards) {
    total.counts.merge(s.counts);
    total.loglik += s.loglik;
  }
  return total;
}

TrainResult train(const ParallelCorpus& corpus, const TrainOptions& options) {
  if (corpus.empty()) throw std::invalid_argument("cannot train on an empty corpus");
  if (options.iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  TrainResult result;
  result.params = FaParams::initial(corpus.src_vocab(), corpus.tgt_vocab(),
                                    options.lambda_init, options.p0);
  auto report = [&](int iteration, double ll) {
    if (!std::isfinite(ll))
      throw NumericalError("non-finite log-likelihood at FA iteration " +
                           std::to_string(iteration));
    result.loglik.push_back(ll);
    if (options.on_iteration) options.on_iteration(iteration, ll);
  };
  for (int it = 0; it < options.iterations; ++it) {
    auto estep = accumulate(corpus, result.params, options.threads);
    report(it, estep.loglik);
    result.params = m_step(estep.counts, result.params, options.m_step);
  }
  report(options.iterations, corpus_loglik(corpus, result.params, options.threads));
  return result;
}

AlignmentLinks viterbi_align(const SentencePair& pair, const FaParams& params) {
  return decode_viterbi(pair.src_len(), pair.tgt_len(), params.lambda, params.p0,
                        [&](std::size_t j, std::size_t i) {
                          return params.translation(source_word(pair, i, params.null_word),
                                                    pair.tgt[j - 1]);
                        });
}

}  // namespace dwalign::fa
