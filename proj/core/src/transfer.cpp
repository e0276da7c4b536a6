#include "dwalign/transfer.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "dwalign/error.hpp"

namespace dwalign::transfer {

LabeledDocs read_labeled_docs(std::istream& is,
                              const std::vector<std::string>* known_labels) {
  LabeledDocs out;
  std::unordered_map<std::string, Label> ids;
  if (known_labels) {
    out.label_names = *known_labels;
    for (std::size_t n = 0; n < known_labels->size(); ++n)
      ids.emplace((*known_labels)[n], static_cast<Label>(n));
  }
  std::size_t line_no = 0;
  for (std::string line; std::getline(is, line);) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw FormatError("document line " + std::to_string(line_no) +
                        ": expected label<TAB>tokens");
    std::string name = line.substr(0, tab);
    auto it = ids.find(name);
    if (it == ids.end()) {
      if (known_labels)
        throw FormatError("document line " + std::to_string(line_no) +
                          ": label '" + name + "' not seen in training data");
      it = ids.emplace(name, static_cast<Label>(out.label_names.size())).first;
      out.label_names.push_back(name);
    }
    out.docs.push_back({tokenize(std::string_view(line).substr(tab + 1)), it->second});
  }
  return out;
}

WordId best_translation(WordId e, const dwa::Model& model) {
  lbl::TranslationScorer scorer(model.params, model.classes,
                                lbl::word_context(e, model.params));
  const Eigen::VectorXd p = scorer.distribution();
  WordId best = 0;
  for (Eigen::Index f = 1; f < p.size(); ++f)
    if (p[f] > p[best]) best = static_cast<WordId>(f);
  return best;
}

Eigen::VectorXd project_embedding(WordId e, const dwa::Model& model) {
  return model.params.tgt_embed.row(best_translation(e, model)).transpose();
}

EmbeddingTable::EmbeddingTable(std::vector<std::string> words, RowMatrix vectors)
    : words_(std::move(words)), vectors_(std::move(vectors)) {
  if (static_cast<std::size_t>(vectors_.rows()) != words_.size())
    throw std::invalid_argument("embedding table: word and vector counts differ");
  for (std::size_t n = 0; n < words_.size(); ++n)
    index_.emplace(words_[n], static_cast<long>(n));
}

long EmbeddingTable::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? -1 : it->second;
}

namespace {

bool is_special(const Vocab& vocab, WordId id) {
  return id == vocab.unk_id() || (vocab.null_id() && id == *vocab.null_id());
}

}  // namespace

EmbeddingTable projected_source_table(const dwa::Model& model, const Vocab& src_vocab) {
  std::vector<std::string> words;
  std::vector<WordId> ids;
  for (WordId e = 0; e < src_vocab.size(); ++e) {
    if (is_special(src_vocab, e)) continue;
    words.push_back(src_vocab.token(e));
    ids.push_back(e);
  }
  RowMatrix vectors(static_cast<Eigen::Index>(ids.size()),
                    static_cast<Eigen::Index>(model.params.dim));
  for (std::size_t n = 0; n < ids.size(); ++n)
    vectors.row(static_cast<Eigen::Index>(n)) = project_embedding(ids[n], model).transpose();
  return {std::move(words), std::move(vectors)};
}

EmbeddingTable target_table(const dwa::Model& model, const Vocab& tgt_vocab) {
  std::vector<std::string> words;
  std::vector<WordId> ids;
  for (WordId f = 0; f < tgt_vocab.size(); ++f) {
    if (is_special(tgt_vocab, f)) continue;
    words.push_back(tgt_vocab.token(f));
    ids.push_back(f);
  }
  RowMatrix vectors(static_cast<Eigen::Index>(ids.size()),
                    static_cast<Eigen::Index>(model.params.dim));
  for (std::size_t n = 0; n < ids.size(); ++n)
    vectors.row(static_cast<Eigen::Index>(n)) = model.params.tgt_embed.row(ids[n]);
  return {std::move(words), std::move(vectors)};
}

DocVector doc_representation(std::span<const std::string> tokens,
                             const EmbeddingTable& table) {
  DocVector doc{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(table.dim())), 0};
  for (const auto& t : tokens) {
    const long row = table.find(t);
    if (row < 0) continue;
    doc.vector += table.vectors().row(row).transpose();
    ++doc.known_tokens;
  }
  if (doc.known_tokens) doc.vector /= static_cast<double>(doc.known_tokens);
  return doc;
}

std::vector<Example> featurize(const LabeledDocs& docs, const EmbeddingTable& table,
                               FeaturizeStats* stats) {
  std::vector<Example> out;
  out.reserve(docs.docs.size());
  const auto d = static_cast<Eigen::Index>(table.dim());
  for (const auto& doc : docs.docs) {
    const DocVector v = doc_representation(doc.tokens, table);
    if (v.known_tokens == 0 && stats) ++stats->empty_docs;
    Eigen::VectorXd x(d + 1);
    x.head(d) = v.vector;
    x[d] = 1.0;
    out.push_back({std::move(x), doc.label});
  }
  return out;
}

Label argmax_label(const RowMatrix& weights, const Eigen::VectorXd& x) {
  Label best = 0;
  double best_score = weights.row(0).dot(x);
  for (Eigen::Index y = 1; y < weights.rows(); ++y) {
    const double s = weights.row(y).dot(x);
    if (s > best_score) {
      best_score = s;
      best = static_cast<Label>(y);
    }
  }
  return best;
}

Label PerceptronModel::predict(const Eigen::VectorXd& x) const {
  return argmax_label(averaged_weights, x);
}

PerceptronModel train_perceptron(std::span<const Example> train, std::size_t num_labels,
                                 const PerceptronOptions& options) {
  if (options.epochs < 1) throw std::invalid_argument("perceptron epochs must be >= 1");
  if (num_labels == 0) throw std::invalid_argument("need at least one label");
  if (train.empty()) throw std::invalid_argument("empty training set");
  const auto dim = train.front().x.size();
  for (const auto& ex : train) {
    if (ex.x.size() != dim) throw std::invalid_argument("inconsistent feature dimension");
    if (ex.label >= num_labels) throw std::invalid_argument("label out of range");
  }

  PerceptronModel model;
  const auto labels = static_cast<Eigen::Index>(num_labels);
  model.weights = RowMatrix::Zero(labels, dim);
  // Running sum of (step - 1) * delta; the average after c steps is
  // w - weighted / c.
  RowMatrix weighted = RowMatrix::Zero(labels, dim);

  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    if (options.shuffle) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t n : order) {
      const Example& ex = train[n];
      const double before = static_cast<double>(model.update_count);
      ++model.update_count;
      const Label guess = argmax_label(model.weights, ex.x);
      if (guess == ex.label) continue;
      model.weights.row(ex.label) += ex.x.transpose();
      model.weights.row(guess) -= ex.x.transpose();
      weighted.row(ex.label) += before * ex.x.transpose();
      weighted.row(guess) -= before * ex.x.transpose();
    }
  }
  model.averaged_weights =
      model.weights - weighted / static_cast<double>(model.update_count);
  return model;
}

double classify_eval(const PerceptronModel& model, std::span<const Example> test) {
  if (test.empty()) throw std::invalid_argument("empty test set");
  std::size_t correct = 0;
  for (const auto& ex : test)
    if (model.predict(ex.x) == ex.label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

double majority_baseline(std::span<const Example> train, std::span<const Example> test,
                         std::size_t num_labels) {
  if (test.empty()) throw std::invalid_argument("empty test set");
  std::vector<std::size_t> counts(num_labels, 0);
  for (const auto& ex : train) ++counts.at(ex.label);
  const auto majority = static_cast<Label>(
      std::max_element(counts.begin(), counts.end()) - counts.begin());
  std::size_t hits = 0;
  for (const auto& ex : test)
    if (ex.label == majority) ++hits;
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

}  // namespace dwalign::transfer
