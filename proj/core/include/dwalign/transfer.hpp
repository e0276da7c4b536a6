#pragma once

// Cross-lingual document classification: source-language words are projected
// onto the embedding of their most probable translation, documents are the
// mean of their word vectors, and an averaged perceptron is trained on one
// language and evaluated on the other.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "dwalign/alignment.hpp"
#include "dwalign/corpus.hpp"
#include "dwalign/dwa.hpp"

namespace dwalign::transfer {

using Label = std::uint32_t;

struct LabeledDoc {
  Sentence tokens;
  Label label = 0;
};

struct LabeledDocs {
  std::vector<LabeledDoc> docs;
  std::vector<std::string> label_names;

  std::size_t num_labels() const { return label_names.size(); }
};

// `label<TAB>token token ...` per line. Labels get ids in order of first
// appearance; when `known_labels` is given, those ids are used and an unseen
// label is a FormatError.
LabeledDocs read_labeled_docs(std::istream& is,
                              const std::vector<std::string>* known_labels = nullptr);

// argmax_f p(f | e alone), ties to the smallest id.
WordId best_translation(WordId e, const dwa::Model& model);
// The target embedding of best_translation(e): always an exact row of R_F.
Eigen::VectorXd project_embedding(WordId e, const dwa::Model& model);

// Word -> vector lookup used to build document vectors.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::vector<std::string> words, RowMatrix vectors);

  std::size_t size() const { return words_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }
  const std::vector<std::string>& words() const { return words_; }
  const RowMatrix& vectors() const { return vectors_; }
  // Row index, or -1 when the word has no embedding.
  long find(std::string_view word) const;

 private:
  std::vector<std::string> words_;
  RowMatrix vectors_;
  std::unordered_map<std::string, long> index_;
};

// Every regular source word mapped through project_embedding.
EmbeddingTable projected_source_table(const dwa::Model& model, const Vocab& src_vocab);
// Regular target words with their own embeddings.
EmbeddingTable target_table(const dwa::Model& model, const Vocab& tgt_vocab);

struct DocVector {
  Eigen::VectorXd vector;
  std::size_t known_tokens = 0;  // 0 means the zero vector was returned
};

// Mean of the embeddings of tokens found in `table`; other tokens are skipped.
DocVector doc_representation(std::span<const std::string> tokens,
                             const EmbeddingTable& table);

struct Example {
  Eigen::VectorXd x;
  Label label = 0;
};

struct FeaturizeStats {
  std::size_t empty_docs = 0;
};

// Document vectors with a constant 1 appended as the bias feature.
std::vector<Example> featurize(const LabeledDocs& docs, const EmbeddingTable& table,
                               FeaturizeStats* stats = nullptr);

struct PerceptronModel {
  RowMatrix weights;           // L x d, final weights
  RowMatrix averaged_weights;  // mean of the weights after every example
  std::size_t update_count = 0;  // examples seen

  std::size_t num_labels() const { return static_cast<std::size_t>(weights.rows()); }
  // argmax over averaged weights, ties to the smallest label.
  Label predict(const Eigen::VectorXd& x) const;
};

// argmax_y w_y . x, ties to the smallest label.
Label argmax_label(const RowMatrix& weights, const Eigen::VectorXd& x);

struct PerceptronOptions {
  int epochs = 3;
  std::uint64_t seed = 1;
  bool shuffle = true;
};

// Multiclass perceptron: on a mistake w_y += x and w_yhat -= x.
PerceptronModel train_perceptron(std::span<const Example> train, std::size_t num_labels,
                                 const PerceptronOptions& options = {});

// Fraction of correct predictions; throws std::invalid_argument when empty.
double classify_eval(const PerceptronModel& model, std::span<const Example> test);

// Accuracy of always predicting the most frequent training label.
double majority_baseline(std::span<const Example> train, std::span<const Example> test,
                         std::size_t num_labels);

}  // namespace dwalign::transfer
