#pragma once

// Log-linear reparametrized IBM Model 2 ("fast_align" style): an alignment
// prior peaked on the diagonal with a single tension parameter, a NULL
// probability p0, and a multinomial translation table trained by EM.

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dwalign/alignment.hpp"
#include "dwalign/corpus.hpp"

namespace dwalign::fa {

inline constexpr double kDefaultLambda = 4.0;
inline constexpr double kDefaultP0 = 0.08;
inline constexpr double kLambdaMin = 0.1;
inline constexpr double kLambdaMax = 20.0;
inline constexpr double kSmoothingFloor = 1e-9;

// h(i, j, I, J) = -|i/I - j/J| for source position i in 1..I, target j in 1..J.
double diagonal_feature(std::size_t i, std::size_t j, std::size_t src_len,
                        std::size_t tgt_len);

// p(i | j, I, J): p0 for i = 0, otherwise (1-p0) * softmax_i(lambda * h).
// Throws std::out_of_range for positions outside 0..I / 1..J.
double alignment_prior(std::size_t i, std::size_t j, std::size_t src_len,
                       std::size_t tgt_len, double lambda, double p0);

// Writes the prior for i = 0..I into `out` (size I+1) for target position j.
void prior_column(std::size_t j, std::size_t src_len, std::size_t tgt_len,
                  double lambda, double p0, std::span<double> out);

// E[h] under the non-null part of the prior at target position j.
double expected_feature(std::size_t j, std::size_t src_len, std::size_t tgt_len,
                        double lambda);

// Sparse categorical rows t(f | e). Targets without an explicit entry share
// the row's `unseen` probability, so each row sums to one over the full
// target vocabulary.
class TranslationTable {
 public:
  struct Row {
    double unseen = 0.0;
    std::vector<std::pair<WordId, double>> entries;  // sorted by WordId
    bool operator==(const Row&) const = default;
  };

  TranslationTable() = default;
  static TranslationTable uniform(std::size_t src_size, std::size_t tgt_size);

  std::size_t src_size() const { return rows_.size(); }
  std::size_t tgt_size() const { return tgt_size_; }
  double prob(WordId e, WordId f) const;
  double row_sum(WordId e) const;
  const Row& row(WordId e) const { return rows_.at(e); }
  Row& mutable_row(WordId e) { return rows_.at(e); }
  // argmax_f t(f | e), ties to the smallest id.
  WordId best(WordId e) const;

  bool operator==(const TranslationTable&) const = default;

 private:
  std::vector<Row> rows_;
  std::size_t tgt_size_ = 0;
};

struct FaParams {
  double lambda = kDefaultLambda;
  double p0 = kDefaultP0;
  WordId null_word = 0;
  TranslationTable ttable;

  double translation(WordId e, WordId f) const { return ttable.prob(e, f); }
  bool operator==(const FaParams&) const = default;

  // Uniform rows, the given tension and null probability.
  static FaParams initial(const Vocab& src_vocab, const Vocab& tgt_vocab,
                          double lambda = kDefaultLambda, double p0 = kDefaultP0);
};

// sum_j log sum_{i=0..I} p(i|j,I,J) t(f_j|e_i). The p(J|I) term is omitted.
double sentence_loglik(const SentencePair& pair, const FaParams& params);

PosteriorTable e_step(const SentencePair& pair, const FaParams& params);

// Sufficient statistics gathered by the E-step.
class ExpectedCounts {
 public:
  explicit ExpectedCounts(std::size_t src_size = 0) : rows_(src_size) {}

  void add(const SentencePair& pair, const PosteriorTable& gamma,
           WordId null_word);
  void add_count(WordId e, WordId f, double c);
  void merge(const ExpectedCounts& other);

  std::size_t src_size() const { return rows_.size(); }
  const std::unordered_map<WordId, double>& row(WordId e) const {
    return rows_.at(e);
  }
  // sum over tokens of the posterior-weighted diagonal feature (non-null).
  double empirical_feature() const { return empirical_feature_; }
  double target_tokens() const { return target_tokens_; }
  // (I, J) -> per-j non-null posterior mass.
  const std::map<std::pair<std::size_t, std::size_t>, std::vector<double>>&
  length_mass() const {
    return length_mass_;
  }

 private:
  std::vector<std::unordered_map<WordId, double>> rows_;
  double empirical_feature_ = 0.0;
  double target_tokens_ = 0.0;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>>
      length_mass_;
};

struct MStepOptions {
  double floor = kSmoothingFloor;
  bool optimize_lambda = true;
  int lambda_steps = 8;
  double lambda_step_size = 0.5;
};

// Per-token gradient of the expected log-prior with respect to lambda.
double lambda_gradient(const ExpectedCounts& counts, double lambda);

// Normalizes the translation table from counts (rows with zero mass keep
// their previous distribution) and ascends lambda; p0 is left unchanged.
FaParams m_step(const ExpectedCounts& counts, const FaParams& params,
                const MStepOptions& options = {});

struct EStepResult {
  ExpectedCounts counts;
  double loglik = 0.0;
};

// One E-step over the corpus. With threads > 1 the corpus is split into
// contiguous shards whose buffers are merged in shard order.
EStepResult accumulate(const ParallelCorpus& corpus, const FaParams& params,
                       std::size_t threads = 1);

double corpus_loglik(const ParallelCorpus& corpus, const FaParams& params,
                     std::size_t threads = 1);

struct TrainOptions {
  int iterations = 5;
  double lambda_init = kDefaultLambda;
  double p0 = kDefaultP0;
  std::size_t threads = 1;
  MStepOptions m_step;
  // Called with (iteration, loglik) after each iteration; iteration 0 is the
  // initialization.
  std::function<void(int, double)> on_iteration;
};

struct TrainResult {
  FaParams params;
  // loglik[t] is the corpus log-likelihood after t iterations.
  std::vector<double> loglik;
};

TrainResult train(const ParallelCorpus& corpus, const TrainOptions& options = {});

// Per target position, links to argmax_{i=0..I} prior(i) * score(j, i), ties
// to the smallest i; i = 0 (NULL) emits no link. `score(j, i)` takes 1-based j
// and i in 0..I.
template <class Score>
AlignmentLinks decode_viterbi(std::size_t src_len, std::size_t tgt_len,
                              double lambda, double p0, Score&& score) {
  AlignmentLinks links;
  std::vector<double> prior(src_len + 1);
  for (std::size_t j = 1; j <= tgt_len; ++j) {
    prior_column(j, src_len, tgt_len, lambda, p0, prior);
    std::size_t best = 0;
    double best_score = prior[0] * score(j, std::size_t{0});
    for (std::size_t i = 1; i <= src_len; ++i) {
      const double s = prior[i] * score(j, i);
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    if (best != 0)
      links.push_back({static_cast<std::uint32_t>(best - 1),
                       static_cast<std::uint32_t>(j - 1)});
  }
  return links;
}

AlignmentLinks viterbi_align(const SentencePair& pair, const FaParams& params);

}  // namespace dwalign::fa
