#include "dwalign/dwa.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "dwalign/error.hpp"

namespace dwalign::dwa {

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (dim < 1) throw std::invalid_argument("embedding dimension must be >= 1");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (!(adagrad.learning_rate > 0.0))
    throw std::invalid_argument("learning rate must be > 0");
  if (!(adagrad.epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
  if (lambda_init && !(*lambda_init > 0.0))
    throw std::invalid_argument("lambda must be > 0");
}

PosteriorTable frozen_posteriors(const SentencePair& pair, const fa::FaParams& fa) {
  return fa::e_step(pair, fa);
}

Model initial_model(const ParallelCorpus& corpus, const fa::FaParams& fa,
                    const TrainConfig& config) {
  config.validate();
  Model model;
  model.classes = build_classes(corpus.tgt_vocab());
  const lbl::ModelShape shape{corpus.src_vocab().size(), corpus.tgt_vocab().size(),
                              model.classes.num_classes(), config.dim, config.context};
  lbl::InitOptions init;
  init.seed = config.seed;
  if (config.init_bias_from_unigram) init.unigram_freqs = corpus.tgt_vocab().freqs();
  model.params = lbl::DwaParams::initial(shape, init);
  model.lambda = std::clamp(config.lambda_init.value_or(fa.lambda), fa::kLambdaMin,
                            fa::kLambdaMax);
  model.p0 = fa.p0;
  return model;
}

double lambda_gradient(const SentencePair& pair, const PosteriorTable& gamma,
                       double lambda) {
  const std::size_t src_len = pair.src_len();
  const std::size_t tgt_len = pair.tgt_len();
  double g = 0.0;
  for (std::size_t j = 1; j <= tgt_len; ++j) {
    double mass = 0.0;
    for (std::size_t i = 1; i <= src_len; ++i) {
      const double w = gamma(j - 1, i);
      if (w == 0.0) continue;
      mass += w;
      g += w * fa::diagonal_feature(i, j, src_len, tgt_len);
    }
    if (mass != 0.0) g -= mass * fa::expected_feature(j, src_len, tgt_len, lambda);
  }
  return g;
}

SentenceGradient sentence_gradient(const SentencePair& pair,
                                   const PosteriorTable& gamma, const Model& model) {
  SentenceGradient g{lbl::grad_weighted_logprob(pair, gamma, model.params, model.classes),
                     lambda_gradient(pair, gamma, model.lambda)};
  return g;
}

double sentence_q(const SentencePair& pair, const PosteriorTable& gamma,
                  const Model& model) {
  const std::size_t src_len = pair.src_len();
  const std::size_t tgt_len = pair.tgt_len();
  double q = lbl::weighted_logprob(pair, gamma, model.params, model.classes);
  std::vector<double> prior(src_len + 1);
  for (std::size_t j = 1; j <= tgt_len; ++j) {
    fa::prior_column(j, src_len, tgt_len, model.lambda, model.p0, prior);
    for (std::size_t i = 0; i <= src_len; ++i)
      if (gamma(j - 1, i) != 0.0) q += gamma(j - 1, i) * std::log(prior[i]);
  }
  return q;
}

namespace {

double checked_q(const ParallelCorpus& corpus, const Model& model,
                 const fa::FaParams& fa, int epoch) {
  double q = 0.0;
  for (std::size_t n = 0; n < corpus.size(); ++n) {
    const double term = sentence_q(corpus[n], frozen_posteriors(corpus[n], fa), model);
    if (!std::isfinite(term))
      throw NumericalError("non-finite Q at epoch " + std::to_string(epoch) +
                           ", sentence " + std::to_string(n));
    q += term;
  }
  return q;
}

void apply(Model& model, lbl::AdaGradState& state, double& lambda_sum_sq,
           const SentenceGradient& g, int epoch, std::size_t sentence) {
  try {
    if (!std::isfinite(g.lambda))
      throw NumericalError("non-finite gradient in block lambda");
    lbl::adagrad_step(model.params, g.params, state);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(e.what()) + " at epoch " + std::to_string(epoch) +
                         ", sentence " + std::to_string(sentence));
  }
  lbl::adagrad_update(model.lambda, lambda_sum_sq, g.lambda, state.options);
  model.lambda = std::clamp(model.lambda, fa::kLambdaMin, fa::kLambdaMax);
}

// Sentences per parallel batch for each worker.
constexpr std::size_t kBatchPerThread = 16;

}  // namespace

double q_objective(const ParallelCorpus& corpus, const Model& model,
                   const fa::FaParams& fa) {
  double q = 0.0;
  for (const auto& pair : corpus.pairs())
    q += sentence_q(pair, frozen_posteriors(pair, fa), model);
  return q;
}

TrainResult train(const ParallelCorpus& corpus, const fa::FaParams& fa,
                  const TrainConfig& config) {
  return train(corpus, fa, config, initial_model(corpus, fa, config));
}

TrainResult train(const ParallelCorpus& corpus, const fa::FaParams& fa,
                  const TrainConfig& config, Model model) {
  config.validate();
  if (corpus.empty()) throw std::invalid_argument("cannot train on an empty corpus");
  using Clock = std::chrono::steady_clock;

  TrainResult result;
  auto report = [&](int epoch, Clock::time_point start) {
    const double q = checked_q(corpus, model, fa, epoch);
    result.q.push_back(q);
    if (config.on_epoch) {
      const std::chrono::duration<double, std::milli> elapsed = Clock::now() - start;
      config.on_epoch({epoch, q, elapsed.count()});
    }
  };
  report(0, Clock::now());

  auto state = lbl::AdaGradState::for_params(model.params, config.adagrad);
  double lambda_sum_sq = 0.0;
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = Clock::now();
    if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);

    if (config.threads == 1) {
      for (std::size_t n : order) {
        const auto gamma = frozen_posteriors(corpus[n], fa);
        apply(model, state, lambda_sum_sq, sentence_gradient(corpus[n], gamma, model),
              epoch, n);
      }
    } else {
      const std::size_t batch = config.threads * kBatchPerThread;
      std::vector<SentenceGradient> grads(batch);
      for (std::size_t begin = 0; begin < order.size(); begin += batch) {
        const std::size_t end = std::min(order.size(), begin + batch);
        {
          std::vector<std::jthread> workers;
          for (std::size_t t = 0; t < config.threads; ++t) {
            workers.emplace_back([&, t] {
              for (std::size_t b = begin + t; b < end; b += config.threads) {
                const auto& pair = corpus[order[b]];
                grads[b - begin] =
                    sentence_gradient(pair, frozen_posteriors(pair, fa), model);
              }
            });
          }
        }
        for (std::size_t b = begin; b < end; ++b)
          apply(model, state, lambda_sum_sq, grads[b - begin], epoch, order[b]);
      }
    }
    report(epoch, start);
  }
  result.model = std::move(model);
  return result;
}

namespace {

template <class Fn>
void for_each_position_score(const SentencePair& pair, const Model& model, Fn&& fn) {
  const Eigen::VectorXd null_lp = lbl::null_log_probs(model.params);
  std::vector<lbl::TranslationScorer> scorers;
  scorers.reserve(pair.src_len());
  for (std::size_t i = 1; i <= pair.src_len(); ++i)
    scorers.emplace_back(model.params, model.classes,
                         lbl::make_context(pair.src, i, model.params));
  fn([&](std::size_t j, std::size_t i) {
    const WordId f = pair.tgt[j - 1];
    return i == 0 ? std::exp(null_lp[f]) : scorers[i - 1].prob(f);
  });
}

}  // namespace

AlignmentLinks viterbi_align(const SentencePair& pair, const Model& model) {
  AlignmentLinks links;
  for_each_position_score(pair, model, [&](auto&& score) {
    links = fa::decode_viterbi(pair.src_len(), pair.tgt_len(), model.lambda, model.p0,
                               score);
  });
  return links;
}

double sentence_loglik(const SentencePair& pair, const Model& model) {
  double ll = 0.0;
  for_each_position_score(pair, model, [&](auto&& score) {
    std::vector<double> prior(pair.src_len() + 1);
    for (std::size_t j = 1; j <= pair.tgt_len(); ++j) {
      fa::prior_column(j, pair.src_len(), pair.tgt_len(), model.lambda, model.p0, prior);
      double marginal = 0.0;
      for (std::size_t i = 0; i <= pair.src_len(); ++i) marginal += prior[i] * score(j, i);
      ll += std::log(marginal);
    }
  });
  return ll;
}

}  // namespace dwalign::dwa
