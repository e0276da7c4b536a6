#include "dwalign/lbl.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "dwalign/error.hpp"

namespace dwalign::lbl {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double log_sum_exp(const VectorXd& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

VectorXd log_softmax(const VectorXd& v) {
  return v.array() - log_sum_exp(v);
}

template <class M>
std::span<double> span_of(M& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
template <class M>
std::span<const double> span_of(const M& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

template <class Self, class BlockT>
std::vector<BlockT> collect_blocks(Self& p) {
  std::vector<BlockT> out;
  out.push_back({"source_embeddings", span_of(p.src_embed)});
  out.push_back({"target_embeddings", span_of(p.tgt_embed)});
  for (std::size_t s = 0; s < p.word_transform.size(); ++s)
    out.push_back({"word_transform[" + std::to_string(static_cast<long>(s) -
                                                      static_cast<long>(p.context)) +
                       "]",
                   span_of(p.word_transform[s])});
  out.push_back({"repr_bias", span_of(p.repr_bias)});
  out.push_back({"word_bias", span_of(p.word_bias)});
  out.push_back({"class_embeddings", span_of(p.class_embed)});
  for (std::size_t s = 0; s < p.class_transform.size(); ++s)
    out.push_back({"class_transform[" + std::to_string(static_cast<long>(s) -
                                                       static_cast<long>(p.context)) +
                       "]",
                   span_of(p.class_transform[s])});
  out.push_back({"class_repr_bias", span_of(p.class_repr_bias)});
  out.push_back({"class_bias", span_of(p.class_bias)});
  out.push_back({"null_weights", span_of(p.null_weights)});
  return out;
}

void check_position(std::size_t i, std::size_t src_len) {
  if (i == 0)
    throw std::out_of_range("position 0 is NULL; use the null-word softmax");
  if (i > src_len)
    throw std::out_of_range("source position " + std::to_string(i) +
                            " beyond sentence length " + std::to_string(src_len));
}

void add_row(std::map<WordId, VectorXd>& rows, WordId id, const VectorXd& v) {
  auto it = rows.find(id);
  if (it == rows.end())
    rows.emplace(id, v);
  else
    it->second += v;
}

template <class A, class B>
bool same(const A& a, const B& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

}  // namespace

DwaParams DwaParams::zeros(const ModelShape& shape) {
  if (shape.dim == 0) throw std::invalid_argument("embedding dimension must be >= 1");
  if (shape.tgt_vocab == 0 || shape.classes == 0)
    throw std::invalid_argument("target vocabulary and class count must be >= 1");
  const auto d = static_cast<Eigen::Index>(shape.dim);
  DwaParams p;
  p.dim = shape.dim;
  p.context = shape.context;
  p.src_embed = RowMatrix::Zero(static_cast<Eigen::Index>(shape.src_vocab), d);
  p.tgt_embed = RowMatrix::Zero(static_cast<Eigen::Index>(shape.tgt_vocab), d);
  p.word_transform.assign(p.window(), MatrixXd::Zero(d, d));
  p.repr_bias = VectorXd::Zero(d);
  p.word_bias = VectorXd::Zero(static_cast<Eigen::Index>(shape.tgt_vocab));
  p.class_embed = RowMatrix::Zero(static_cast<Eigen::Index>(shape.classes), d);
  p.class_transform.assign(p.window(), MatrixXd::Zero(d, d));
  p.class_repr_bias = VectorXd::Zero(d);
  p.class_bias = VectorXd::Zero(static_cast<Eigen::Index>(shape.classes));
  p.null_weights = VectorXd::Zero(static_cast<Eigen::Index>(shape.tgt_vocab));
  return p;
}

DwaParams DwaParams::initial(const ModelShape& shape, const InitOptions& options) {
  DwaParams p = zeros(shape);
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> uniform(-options.embedding_range,
                                                 options.embedding_range);
  for (auto* m : {&p.src_embed, &p.tgt_embed, &p.class_embed})
    for (auto& x : span_of(*m)) x = uniform(rng);
  const auto d = static_cast<Eigen::Index>(shape.dim);
  for (auto& t : p.word_transform) t = options.transform_scale * MatrixXd::Identity(d, d);
  for (auto& t : p.class_transform) t = options.transform_scale * MatrixXd::Identity(d, d);
  if (!options.unigram_freqs.empty()) {
    if (options.unigram_freqs.size() != shape.tgt_vocab)
      throw std::invalid_argument("unigram frequencies do not match the target vocabulary");
    double total = 0.0;
    for (auto f : options.unigram_freqs) total += static_cast<double>(f) + 1.0;
    for (std::size_t f = 0; f < shape.tgt_vocab; ++f)
      p.word_bias[static_cast<Eigen::Index>(f)] =
          std::log((static_cast<double>(options.unigram_freqs[f]) + 1.0) / total);
  }
  return p;
}

ModelShape DwaParams::shape() const {
  return {static_cast<std::size_t>(src_embed.rows()),
          static_cast<std::size_t>(tgt_embed.rows()), num_classes(), dim, context};
}

std::vector<Block> DwaParams::blocks() { return collect_blocks<DwaParams, Block>(*this); }

std::vector<ConstBlock> DwaParams::blocks() const {
  return collect_blocks<const DwaParams, ConstBlock>(*this);
}

std::size_t DwaParams::num_parameters() const {
  std::size_t n = 0;
  for (const auto& b : blocks()) n += b.values.size();
  return n;
}

bool DwaParams::all_finite() const {
  for (const auto& b : blocks())
    for (double x : b.values)
      if (!std::isfinite(x)) return false;
  return true;
}

bool DwaParams::operator==(const DwaParams& o) const {
  if (dim != o.dim || context != o.context) return false;
  if (word_transform.size() != o.word_transform.size() ||
      class_transform.size() != o.class_transform.size())
    return false;
  for (std::size_t s = 0; s < word_transform.size(); ++s)
    if (!same(word_transform[s], o.word_transform[s]) ||
        !same(class_transform[s], o.class_transform[s]))
      return false;
  return same(src_embed, o.src_embed) && same(tgt_embed, o.tgt_embed) &&
         same(repr_bias, o.repr_bias) && same(word_bias, o.word_bias) &&
         same(class_embed, o.class_embed) && same(class_repr_bias, o.class_repr_bias) &&
         same(class_bias, o.class_bias) && same(null_weights, o.null_weights);
}

DwaGradient DwaGradient::zeros_like(const DwaParams& p) {
  DwaGradient g;
  const auto d = static_cast<Eigen::Index>(p.dim);
  g.word_transform.assign(p.window(), MatrixXd::Zero(d, d));
  g.repr_bias = VectorXd::Zero(d);
  g.class_embed = RowMatrix::Zero(p.class_embed.rows(), d);
  g.class_transform.assign(p.window(), MatrixXd::Zero(d, d));
  g.class_repr_bias = VectorXd::Zero(d);
  g.class_bias = VectorXd::Zero(p.class_bias.size());
  g.null_weights = VectorXd::Zero(p.null_weights.size());
  return g;
}

void DwaGradient::add(const DwaGradient& o) {
  for (const auto& [id, v] : o.src_embed) add_row(src_embed, id, v);
  for (const auto& [id, v] : o.tgt_embed) add_row(tgt_embed, id, v);
  for (const auto& [id, v] : o.word_bias) word_bias[id] += v;
  for (std::size_t s = 0; s < word_transform.size(); ++s) {
    word_transform[s] += o.word_transform[s];
    class_transform[s] += o.class_transform[s];
  }
  repr_bias += o.repr_bias;
  class_embed += o.class_embed;
  class_repr_bias += o.class_repr_bias;
  class_bias += o.class_bias;
  null_weights += o.null_weights;
}

DwaParams DwaGradient::to_dense(const DwaParams& like) const {
  DwaParams d = DwaParams::zeros(like.shape());
  for (const auto& [id, v] : src_embed) d.src_embed.row(id) = v.transpose();
  for (const auto& [id, v] : tgt_embed) d.tgt_embed.row(id) = v.transpose();
  for (const auto& [id, v] : word_bias) d.word_bias[id] = v;
  d.word_transform = word_transform;
  d.class_transform = class_transform;
  d.repr_bias = repr_bias;
  d.class_embed = class_embed;
  d.class_repr_bias = class_repr_bias;
  d.class_bias = class_bias;
  d.null_weights = null_weights;
  return d;
}

Context make_context(std::span<const WordId> src, std::size_t i,
                     const DwaParams& params) {
  check_position(i, src.size());
  Context ctx{params.repr_bias, params.class_repr_bias};
  const auto k = static_cast<long>(params.context);
  for (long s = -k; s <= k; ++s) {
    const long pos = static_cast<long>(i) + s;
    if (pos < 1 || pos > static_cast<long>(src.size())) continue;
    const auto r = params.src_embed.row(src[static_cast<std::size_t>(pos - 1)]).transpose();
    const auto idx = static_cast<std::size_t>(s + k);
    ctx.word.noalias() += params.word_transform[idx].transpose() * r;
    ctx.cls.noalias() += params.class_transform[idx].transpose() * r;
  }
  return ctx;
}

Context word_context(WordId e, const DwaParams& params) {
  const auto r = params.src_embed.row(e).transpose();
  Context ctx{params.repr_bias, params.class_repr_bias};
  ctx.word.noalias() += params.word_transform[params.context].transpose() * r;
  ctx.cls.noalias() += params.class_transform[params.context].transpose() * r;
  return ctx;
}

double energy(WordId f, std::size_t i, std::span<const WordId> src,
              const DwaParams& params) {
  const Context ctx = make_context(src, i, params);
  return -(ctx.word.dot(params.tgt_embed.row(f)) + params.word_bias[f]);
}

double class_energy(std::uint32_t c, std::size_t i, std::span<const WordId> src,
                    const DwaParams& params) {
  const Context ctx = make_context(src, i, params);
  return -(ctx.cls.dot(params.class_embed.row(c)) + params.class_bias[c]);
}

TranslationScorer::TranslationScorer(const DwaParams& params,
                                     const ClassPartition& classes, Context context)
    : params_(params),
      classes_(classes),
      context_(std::move(context)),
      member_cache_(classes.num_classes()) {
  if (classes.num_classes() != params.num_classes() ||
      classes.num_words() != params.tgt_vocab())
    throw std::invalid_argument("class partition does not match model dimensions");
  VectorXd scores = params.class_embed * context_.cls + params.class_bias;
  class_log_probs_ = log_softmax(scores);
}

const VectorXd& TranslationScorer::member_log_probs(std::uint32_t c) {
  auto& cached = member_cache_.at(c);
  if (cached.size() == 0) {
    const auto& members = classes_.members[c];
    VectorXd scores(static_cast<Eigen::Index>(members.size()));
    for (std::size_t m = 0; m < members.size(); ++m) {
      const WordId w = members[m];
      scores[static_cast<Eigen::Index>(m)] =
          context_.word.dot(params_.tgt_embed.row(w)) + params_.word_bias[w];
    }
    cached = log_softmax(scores);
  }
  return cached;
}

double TranslationScorer::log_prob(WordId f) {
  const auto c = classes_.class_of.at(f);
  return class_log_probs_[c] + member_log_probs(c)[classes_.within_index[f]];
}

double TranslationScorer::prob(WordId f) { return std::exp(log_prob(f)); }

VectorXd TranslationScorer::distribution() {
  VectorXd p(static_cast<Eigen::Index>(classes_.num_words()));
  for (std::uint32_t c = 0; c < classes_.num_classes(); ++c) {
    const auto& lp = member_log_probs(c);
    const auto& members = classes_.members[c];
    for (std::size_t m = 0; m < members.size(); ++m)
      p[members[m]] = std::exp(class_log_probs_[c] + lp[static_cast<Eigen::Index>(m)]);
  }
  return p;
}

double translation_prob(WordId f, std::size_t i, std::span<const WordId> src,
                        const DwaParams& params, const ClassPartition& classes) {
  TranslationScorer scorer(params, classes, make_context(src, i, params));
  return scorer.prob(f);
}

VectorXd null_log_probs(const DwaParams& params) {
  return log_softmax(params.null_weights);
}

double null_prob(WordId f, const DwaParams& params) {
  return std::exp(null_log_probs(params)[f]);
}

void accumulate_gradient(const SentencePair& pair, const PosteriorTable& gamma,
                         const DwaParams& params, const ClassPartition& classes,
                         DwaGradient& grad) {
  const std::size_t src_len = pair.src_len();
  const std::size_t tgt_len = pair.tgt_len();
  if (static_cast<std::size_t>(gamma.rows()) != tgt_len ||
      static_cast<std::size_t>(gamma.cols()) != src_len + 1)
    throw std::invalid_argument("posterior table does not match the sentence pair");

  // NULL column.
  const double null_mass = gamma.col(0).sum();
  if (null_mass != 0.0) {
    const VectorXd p = null_log_probs(params).array().exp();
    grad.null_weights -= null_mass * p;
    for (std::size_t j = 0; j < tgt_len; ++j) grad.null_weights[pair.tgt[j]] += gamma(j, 0);
  }

  const auto k = static_cast<long>(params.context);
  std::map<std::uint32_t, double> class_mass;
  for (std::size_t i = 1; i <= src_len; ++i) {
    const double mass = gamma.col(i).sum();
    if (mass == 0.0) continue;
    TranslationScorer scorer(params, classes, make_context(pair.src, i, params));
    const Context& ctx = scorer.context();

    // Class softmax: d/ds_c = sum_j gamma (1[c = c_fj] - p_c).
    VectorXd dclass = -mass * scorer.class_log_probs().array().exp().matrix();
    class_mass.clear();
    for (std::size_t j = 0; j < tgt_len; ++j) {
      const double g = gamma(j, i);
      if (g == 0.0) continue;
      const auto c = classes.class_of[pair.tgt[j]];
      dclass[c] += g;
      class_mass[c] += g;
    }
    grad.class_bias += dclass;
    grad.class_embed.noalias() += dclass * ctx.cls.transpose();
    const VectorXd dcls = params.class_embed.transpose() * dclass;

    // Member softmax of every observed class.
    VectorXd dword = VectorXd::Zero(static_cast<Eigen::Index>(params.dim));
    for (const auto& [c, cmass] : class_mass) {
      const auto& members = classes.members[c];
      const VectorXd p = scorer.member_log_probs(c).array().exp();
      VectorXd coeff = -cmass * p;
      for (std::size_t j = 0; j < tgt_len; ++j) {
        const double g = gamma(j, i);
        const WordId f = pair.tgt[j];
        if (g != 0.0 && classes.class_of[f] == c) coeff[classes.within_index[f]] += g;
      }
      for (std::size_t m = 0; m < members.size(); ++m) {
        const double a = coeff[static_cast<Eigen::Index>(m)];
        if (a == 0.0) continue;
        const WordId w = members[m];
        grad.word_bias[w] += a;
        add_row(grad.tgt_embed, w, a * ctx.word);
        dword.noalias() += a * params.tgt_embed.row(w).transpose();
      }
    }
    grad.repr_bias += dword;
    grad.class_repr_bias += dcls;

    for (long s = -k; s <= k; ++s) {
      const long pos = static_cast<long>(i) + s;
      if (pos < 1 || pos > static_cast<long>(src_len)) continue;
      const WordId e = pair.src[static_cast<std::size_t>(pos - 1)];
      const auto idx = static_cast<std::size_t>(s + k);
      const VectorXd r = params.src_embed.row(e).transpose();
      grad.word_transform[idx].noalias() += r * dword.transpose();
      grad.class_transform[idx].noalias() += r * dcls.transpose();
      add_row(grad.src_embed, e,
              params.word_transform[idx] * dword + params.class_transform[idx] * dcls);
    }
  }
}

DwaGradient grad_weighted_logprob(const SentencePair& pair,
                                  const PosteriorTable& gamma,
                                  const DwaParams& params,
                                  const ClassPartition& classes) {
  DwaGradient grad = DwaGradient::zeros_like(params);
  accumulate_gradient(pair, gamma, params, classes, grad);
  return grad;
}

double weighted_logprob(const SentencePair& pair, const PosteriorTable& gamma,
                        const DwaParams& params, const ClassPartition& classes) {
  double total = 0.0;
  const std::size_t tgt_len = pair.tgt_len();
  if (gamma.col(0).sum() != 0.0) {
    const VectorXd lp = null_log_probs(params);
    for (std::size_t j = 0; j < tgt_len; ++j)
      if (gamma(j, 0) != 0.0) total += gamma(j, 0) * lp[pair.tgt[j]];
  }
  for (std::size_t i = 1; i <= pair.src_len(); ++i) {
    if (gamma.col(i).sum() == 0.0) continue;
    TranslationScorer scorer(params, classes, make_context(pair.src, i, params));
    for (std::size_t j = 0; j < tgt_len; ++j)
      if (gamma(j, i) != 0.0) total += gamma(j, i) * scorer.log_prob(pair.tgt[j]);
  }
  return total;
}

AdaGradState AdaGradState::for_params(const DwaParams& params, AdaGradOptions options) {
  return {DwaParams::zeros(params.shape()), options};
}

namespace {

void require_finite(double g, const char* block) {
  if (!std::isfinite(g))
    throw NumericalError(std::string("non-finite gradient in block ") + block);
}

template <class M>
void require_finite_all(const M& m, const char* block) {
  if (!m.allFinite())
    throw NumericalError(std::string("non-finite gradient in block ") + block);
}

template <class P, class G>
void dense_update(P& theta, P& sum_sq, const G& g, const AdaGradOptions& o) {
  for (Eigen::Index n = 0; n < g.size(); ++n)
    adagrad_update(theta.data()[n], sum_sq.data()[n], g.data()[n], o);
}

}  // namespace

void adagrad_step(DwaParams& params, const DwaGradient& grad, AdaGradState& state) {
  for (const auto& [id, v] : grad.src_embed) require_finite_all(v, "source_embeddings");
  for (const auto& [id, v] : grad.tgt_embed) require_finite_all(v, "target_embeddings");
  for (const auto& [id, v] : grad.word_bias) require_finite(v, "word_bias");
  for (const auto& t : grad.word_transform) require_finite_all(t, "word_transform");
  for (const auto& t : grad.class_transform) require_finite_all(t, "class_transform");
  require_finite_all(grad.repr_bias, "repr_bias");
  require_finite_all(grad.class_embed, "class_embeddings");
  require_finite_all(grad.class_repr_bias, "class_repr_bias");
  require_finite_all(grad.class_bias, "class_bias");
  require_finite_all(grad.null_weights, "null_weights");

  const auto& o = state.options;
  auto& G = state.sum_sq;
  for (const auto& [id, v] : grad.src_embed)
    for (Eigen::Index c = 0; c < v.size(); ++c)
      adagrad_update(params.src_embed(id, c), G.src_embed(id, c), v[c], o);
  for (const auto& [id, v] : grad.tgt_embed)
    for (Eigen::Index c = 0; c < v.size(); ++c)
      adagrad_update(params.tgt_embed(id, c), G.tgt_embed(id, c), v[c], o);
  for (const auto& [id, v] : grad.word_bias)
    adagrad_update(params.word_bias[id], G.word_bias[id], v, o);
  for (std::size_t s = 0; s < grad.word_transform.size(); ++s) {
    dense_update(params.word_transform[s], G.word_transform[s], grad.word_transform[s], o);
    dense_update(params.class_transform[s], G.class_transform[s], grad.class_transform[s], o);
  }
  dense_update(params.repr_bias, G.repr_bias, grad.repr_bias, o);
  dense_update(params.class_embed, G.class_embed, grad.class_embed, o);
  dense_update(params.class_repr_bias, G.class_repr_bias, grad.class_repr_bias, o);
  dense_update(params.class_bias, G.class_bias, grad.class_bias, o);
  dense_update(params.null_weights, G.null_weights, grad.null_weights, o);
}

}  // namespace dwalign::lbl
