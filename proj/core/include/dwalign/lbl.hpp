#pragma once

// Log-bilinear translation model. A source word e_i and its k neighbours on
// each side predict a target word f through the energy
//
//   E(f, e_i) = -(sum_{s=-k..k} r_{e_{i+s}}^T T_s) r_f - b_r^T r_f - b_f
//
// and p(f | e_i) = p(c_f | e_i) p(f | c_f, e_i), where the class factor uses
// the same form with class embeddings, transforms and biases. Words generated
// by NULL use a context-free softmax over w_null.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dwalign/alignment.hpp"
#include "dwalign/corpus.hpp"

namespace dwalign::lbl {

struct ModelShape {
  std::size_t src_vocab = 0;
  std::size_t tgt_vocab = 0;
  std::size_t classes = 0;
  std::size_t dim = 0;
  std::size_t context = 0;  // k, the half-width of the source window
};

// Named view over one contiguous parameter block.
struct Block {
  std::string name;
  std::span<double> values;
};
struct ConstBlock {
  std::string name;
  std::span<const double> values;
};

struct InitOptions {
  std::uint64_t seed = 1;
  double embedding_range = 0.08;
  double transform_scale = 0.1;
  // When non-empty (size |V_F|), b_f starts at the log relative frequency.
  std::span<const std::uint64_t> unigram_freqs;
};

struct DwaParams {
  std::size_t dim = 0;
  std::size_t context = 0;

  RowMatrix src_embed;                           // |V_E| x d
  RowMatrix tgt_embed;                           // |V_F| x d
  std::vector<Eigen::MatrixXd> word_transform;   // T_s at index s + k
  Eigen::VectorXd repr_bias;                     // b_r
  Eigen::VectorXd word_bias;                     // b_f
  RowMatrix class_embed;                         // |C| x d
  std::vector<Eigen::MatrixXd> class_transform;  // class-side T_s
  Eigen::VectorXd class_repr_bias;
  Eigen::VectorXd class_bias;
  Eigen::VectorXd null_weights;                  // w_null, |V_F|

  static DwaParams zeros(const ModelShape& shape);
  // Embeddings uniform in +-range, transforms scale * identity, biases zero.
  static DwaParams initial(const ModelShape& shape, const InitOptions& options = {});

  ModelShape shape() const;
  std::size_t window() const { return 2 * context + 1; }
  std::size_t num_classes() const { return static_cast<std::size_t>(class_embed.rows()); }
  std::size_t tgt_vocab() const { return static_cast<std::size_t>(tgt_embed.rows()); }

  std::vector<Block> blocks();
  std::vector<ConstBlock> blocks() const;
  std::size_t num_parameters() const;
  bool all_finite() const;
  bool operator==(const DwaParams& other) const;
};

// Gradient of a weighted log-likelihood. Embedding rows and word biases are
// sparse (only touched rows are stored); the remaining blocks are dense.
struct DwaGradient {
  std::map<WordId, Eigen::VectorXd> src_embed;
  std::map<WordId, Eigen::VectorXd> tgt_embed;
  std::map<WordId, double> word_bias;
  std::vector<Eigen::MatrixXd> word_transform;
  Eigen::VectorXd repr_bias;
  RowMatrix class_embed;
  std::vector<Eigen::MatrixXd> class_transform;
  Eigen::VectorXd class_repr_bias;
  Eigen::VectorXd class_bias;
  Eigen::VectorXd null_weights;

  static DwaGradient zeros_like(const DwaParams& params);
  void add(const DwaGradient& other);
  // Same shapes as `like`, zeros where no gradient was recorded.
  DwaParams to_dense(const DwaParams& like) const;
};

// Transformed source context plus representation bias, for both the word and
// the class predictor.
struct Context {
  Eigen::VectorXd word;
  Eigen::VectorXd cls;
};

// Context of source position i (1-based) in `src`; positions outside the
// sentence contribute nothing. Throws std::out_of_range for i = 0 or i > I.
Context make_context(std::span<const WordId> src, std::size_t i,
                     const DwaParams& params);
// A source word on its own: only the centre transform T_0 contributes.
Context word_context(WordId e, const DwaParams& params);

double energy(WordId f, std::size_t i, std::span<const WordId> src,
              const DwaParams& params);
double class_energy(std::uint32_t c, std::size_t i, std::span<const WordId> src,
                    const DwaParams& params);

// Class-factorized translation probabilities for one context. Per-class member
// softmaxes are computed on first use and cached.
class TranslationScorer {
 public:
  TranslationScorer(const DwaParams& params, const ClassPartition& classes,
                    Context context);

  double log_prob(WordId f);
  double prob(WordId f);
  const Eigen::VectorXd& class_log_probs() const { return class_log_probs_; }
  // Log-softmax over the members of class c, in member order.
  const Eigen::VectorXd& member_log_probs(std::uint32_t c);
  // p(f | context) for every target word.
  Eigen::VectorXd distribution();
  const Context& context() const { return context_; }

 private:
  const DwaParams& params_;
  const ClassPartition& classes_;
  Context context_;
  Eigen::VectorXd class_log_probs_;
  std::vector<Eigen::VectorXd> member_cache_;
};

double translation_prob(WordId f, std::size_t i, std::span<const WordId> src,
                        const DwaParams& params, const ClassPartition& classes);

// log softmax(w_null) over the whole target vocabulary.
Eigen::VectorXd null_log_probs(const DwaParams& params);
double null_prob(WordId f, const DwaParams& params);

// Accumulates d/dtheta sum_j sum_i gamma[j][i] log p_i(f_j) into `grad`,
// where p_0 is the NULL softmax and p_i (i >= 1) the translation model.
void accumulate_gradient(const SentencePair& pair, const PosteriorTable& gamma,
                         const DwaParams& params, const ClassPartition& classes,
                         DwaGradient& grad);
DwaGradient grad_weighted_logprob(const SentencePair& pair,
                                  const PosteriorTable& gamma,
                                  const DwaParams& params,
                                  const ClassPartition& classes);

// sum_j sum_i gamma[j][i] log p_i(f_j); zero-weight cells are skipped.
double weighted_logprob(const SentencePair& pair, const PosteriorTable& gamma,
                        const DwaParams& params, const ClassPartition& classes);

struct AdaGradOptions {
  double learning_rate = 0.05;
  double epsilon = 1e-8;
};

// Accumulated squared gradients, one per parameter.
struct AdaGradState {
  DwaParams sum_sq;
  AdaGradOptions options;

  static AdaGradState for_params(const DwaParams& params, AdaGradOptions options = {});
};

// Scalar AdaGrad ascent: G += g^2; theta += eta g / (sqrt(G) + eps). g = 0 is
// a no-op.
inline void adagrad_update(double& theta, double& sum_sq, double g,
                           const AdaGradOptions& options) {
  if (g == 0.0) return;
  sum_sq += g * g;
  theta += options.learning_rate * g / (std::sqrt(sum_sq) + options.epsilon);
}

// Applies one ascent step. Throws NumericalError naming the block if any
// gradient coordinate is non-finite; parameters are untouched in that case.
void adagrad_step(DwaParams& params, const DwaGradient& grad, AdaGradState& state);

}  // namespace dwalign::lbl
