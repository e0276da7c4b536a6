#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "dwalign/corpus.hpp"
#include "dwalign/dwa.hpp"
#include "dwalign/fa_align.hpp"
#include "dwalign/lbl.hpp"
#include "synthetic.hpp"

using namespace dwalign;

namespace {

const ParallelCorpus& corpus() {
  static const ParallelCorpus c = [] {
    const auto data = testkit::make_dictionary_corpus({.vocab = 500, .pairs = 1000,
                                                       .min_len = 10, .max_len = 30});
    return build_parallel_corpus(data.raw, 1, 1);
  }();
  return c;
}

const fa::FaParams& fa_params() {
  static const fa::FaParams p = fa::train(corpus(), {.iterations = 2}).params;
  return p;
}

// classes == 0 means the frequency-built partition.
dwa::Model random_model(std::size_t dim, std::size_t context, std::size_t classes) {
  std::mt19937_64 rng(3);
  const auto& c = corpus();
  dwa::Model m;
  m.classes = classes == 1 ? ClassPartition::single(c.tgt_vocab().size())
                           : build_classes(c.tgt_vocab());
  m.params = testkit::random_params(
      rng, {c.src_vocab().size(), c.tgt_vocab().size(), m.classes.num_classes(), dim, context},
      0.1);
  return m;
}

}  // namespace

static void BM_FaEStep(benchmark::State& state) {
  const auto& c = corpus();
  const auto& p = fa_params();
  std::size_t n = 0, links = 0;
  for (auto _ : state) {
    const auto& pair = c[n++ % c.size()];
    benchmark::DoNotOptimize(fa::e_step(pair, p));
    links += pair.src_len() * pair.tgt_len();
  }
  state.counters["links/s"] = benchmark::Counter(double(links), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_FaEStep);

static void BM_DwaSentenceGradient(benchmark::State& state) {
  const auto& c = corpus();
  const auto model = random_model(std::size_t(state.range(0)), std::size_t(state.range(1)), 0);
  std::vector<PosteriorTable> gammas;
  for (std::size_t n = 0; n < 64; ++n) gammas.push_back(fa::e_step(c[n], fa_params()));
  std::size_t n = 0;
  for (auto _ : state) {
    const std::size_t k = n++ % gammas.size();
    benchmark::DoNotOptimize(dwa::sentence_gradient(c[k], gammas[k], model));
  }
}
BENCHMARK(BM_DwaSentenceGradient)->Args({16, 0})->Args({16, 1})->Args({64, 1})->Args({64, 3});

// Cost of p(f | e_i) with the class factorization against one flat softmax.
static void BM_TranslationProb(benchmark::State& state) {
  const auto& c = corpus();
  const bool flat = state.range(0) == 1;
  const auto model = random_model(32, 1, flat ? 1 : 0);
  std::size_t n = 0;
  for (auto _ : state) {
    const auto& pair = c[n++ % c.size()];
    double s = 0.0;
    for (std::size_t j = 0; j < pair.tgt_len(); ++j)
      s += lbl::translation_prob(pair.tgt[j], 1 + j % pair.src_len(), pair.src, model.params,
                                 model.classes);
    benchmark::DoNotOptimize(s);
  }
  state.SetLabel(flat ? "flat" : "classes");
}
BENCHMARK(BM_TranslationProb)->Arg(0)->Arg(1);

BENCHMARK_MAIN();
