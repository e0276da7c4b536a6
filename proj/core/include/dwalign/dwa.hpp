#pragma once

// Distributed word alignment trainer. EM in which the E-step posteriors are
// frozen to those of a trained FA model and the M-step ascends the expected
// complete-data log-likelihood of the log-bilinear translation model and of
// the diagonal alignment prior, one AdaGrad step per sentence.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dwalign/alignment.hpp"
#include "dwalign/corpus.hpp"
#include "dwalign/fa_align.hpp"
#include "dwalign/lbl.hpp"

namespace dwalign::dwa {

struct Model {
  lbl::DwaParams params;
  ClassPartition classes;
  double lambda = fa::kDefaultLambda;
  double p0 = fa::kDefaultP0;

  bool operator==(const Model&) const = default;
};

struct EpochReport {
  int epoch = 0;  // 0 is the initialization
  double q = 0.0;
  double elapsed_ms = 0.0;
};

struct TrainConfig {
  int epochs = 40;
  std::size_t dim = 100;
  std::size_t context = 0;
  lbl::AdaGradOptions adagrad;
  std::uint64_t seed = 1;
  bool shuffle = true;
  // Defaults to the FA model's trained tension.
  std::optional<double> lambda_init;
  bool init_bias_from_unigram = false;
  std::size_t threads = 1;
  std::function<void(const EpochReport&)> on_epoch;

  // Throws std::invalid_argument for epochs < 0, dim < 1, threads < 1 or
  // non-positive AdaGrad learning rate.
  void validate() const;
};

// FA's E-step posteriors; DWA never re-estimates them.
PosteriorTable frozen_posteriors(const SentencePair& pair, const fa::FaParams& fa);

// Fresh model for a corpus: classes from target frequencies, lambda and p0
// from FA (lambda overridable through the config).
Model initial_model(const ParallelCorpus& corpus, const fa::FaParams& fa,
                    const TrainConfig& config);

struct SentenceGradient {
  lbl::DwaGradient params;
  double lambda = 0.0;
};

// d/dlambda sum_j sum_{i>=1} gamma[j][i] log p(i | j, I, J; lambda).
double lambda_gradient(const SentencePair& pair, const PosteriorTable& gamma,
                       double lambda);

SentenceGradient sentence_gradient(const SentencePair& pair,
                                   const PosteriorTable& gamma, const Model& model);

// sum_j sum_i gamma[j][i] log(prior(i) * p_i(f_j)) for one pair.
double sentence_q(const SentencePair& pair, const PosteriorTable& gamma,
                  const Model& model);

// Sum of sentence_q over the corpus with FA's posteriors.
double q_objective(const ParallelCorpus& corpus, const Model& model,
                   const fa::FaParams& fa);

struct TrainResult {
  Model model;
  std::vector<double> q;  // q[e] after e epochs
};

// Throws NumericalError naming the epoch and sentence when Q or a gradient
// becomes non-finite.
TrainResult train(const ParallelCorpus& corpus, const fa::FaParams& fa,
                  const TrainConfig& config);
// Continues training from an existing model.
TrainResult train(const ParallelCorpus& corpus, const fa::FaParams& fa,
                  const TrainConfig& config, Model model);

// Per target position, argmax_{i=0..I} prior * (null or translation prob).
AlignmentLinks viterbi_align(const SentencePair& pair, const Model& model);

// Marginal log-likelihood sum_j log sum_i prior(i) p_i(f_j).
double sentence_loglik(const SentencePair& pair, const Model& model);

}  // namespace dwalign::dwa
