#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <CLI11.hpp>

#include "dwalign/corpus.hpp"
#include "dwalign/dwa.hpp"
#include "dwalign/error.hpp"
#include "dwalign/eval.hpp"
#include "dwalign/fa_align.hpp"
#include "dwalign/model_io.hpp"
#include "dwalign/transfer.hpp"

namespace dwalign::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

std::string fmt_score(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

struct CorpusArgs {
  std::string corpus;
  std::string source;
  std::string target;
  bool reverse = false;
  std::size_t max_length = 0;

  void add_to(CLI::App* app) {
    app->add_option("--corpus", corpus, "Parallel corpus, one 'SOURCE ||| TARGET' per line");
    app->add_option("--source", source, "Source side of a line-aligned file pair");
    app->add_option("--target", target, "Target side of a line-aligned file pair");
    app->add_flag("--reverse", reverse, "Swap source and target sides");
    app->add_option("--max-length", max_length,
                    "Drop pairs with a side longer than this (0 = keep all)");
  }

  void validate() const {
    const bool pipe = !corpus.empty();
    const bool two = !source.empty() || !target.empty();
    if (pipe == two || (two && (source.empty() || target.empty())))
      throw UsageError("give either --corpus or both --source and --target");
  }

  std::vector<RawPair> read() const {
    auto raw = corpus.empty() ? read_two_files(source, target) : read_triple_pipe_file(corpus);
    if (reverse) reverse_direction(raw);
    return raw;
  }
};

// Encodes a corpus against fixed vocabularies.
ParallelCorpus encode_with(const std::vector<RawPair>& raw, const Vocab& src,
                           const Vocab& tgt, std::size_t max_length) {
  std::vector<Sentence> s, t;
  s.reserve(raw.size());
  t.reserve(raw.size());
  for (const auto& p : raw) {
    s.push_back(p.src);
    t.push_back(p.tgt);
  }
  return encode_corpus(s, t, src, tgt, {max_length});
}

Vocab read_vocab_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return Vocab::read(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_output(const std::string& path, std::ostream& out,
                  const std::function<void(std::ostream&)>& write) {
  if (path.empty() || path == "-")
    write(out);
  else
    write_file_atomically(path, write);
}

// --- prepare -------------------------------------------------------------

struct PrepareArgs {
  CorpusArgs corpus;
  std::size_t min_count = 2;
  std::size_t src_min_count = 0;
  std::size_t tgt_min_count = 0;
  std::string out_prefix;
};

int cmd_prepare(const PrepareArgs& a, std::ostream& out, std::ostream& err) {
  a.corpus.validate();
  const auto raw = a.corpus.read();
  const auto corpus = build_parallel_corpus(
      raw, a.src_min_count ? a.src_min_count : a.min_count,
      a.tgt_min_count ? a.tgt_min_count : a.min_count, {a.corpus.max_length});
  write_file_atomically(a.out_prefix + ".src.vocab",
                        [&](std::ostream& os) { corpus.src_vocab().write(os); });
  write_file_atomically(a.out_prefix + ".tgt.vocab",
                        [&](std::ostream& os) { corpus.tgt_vocab().write(os); });
  const auto classes = build_classes(corpus.tgt_vocab());
  if (corpus.dropped()) err << "dropped " << corpus.dropped() << " pairs\n";
  out << "pairs=" << corpus.size() << " dropped=" << corpus.dropped()
      << " src_vocab=" << corpus.src_vocab().size()
      << " tgt_vocab=" << corpus.tgt_vocab().size()
      << " tgt_classes=" << classes.num_classes()
      << " tgt_tokens=" << corpus.target_tokens() << '\n';
  return kOk;
}

// --- train-fa ------------------------------------------------------------

struct TrainFaArgs {
  CorpusArgs corpus;
  std::string src_vocab;
  std::string tgt_vocab;
  std::size_t min_count = 2;
  int iterations = 5;
  double p0 = fa::kDefaultP0;
  double lambda = fa::kDefaultLambda;
  bool fixed_lambda = false;
  std::size_t threads = 1;
  std::string out;
};

ParallelCorpus load_training_corpus(const CorpusArgs& c, const std::string& src_vocab,
                                    const std::string& tgt_vocab, std::size_t min_count) {
  const auto raw = c.read();
  if (src_vocab.empty() != tgt_vocab.empty())
    throw UsageError("--src-vocab and --tgt-vocab go together");
  if (!src_vocab.empty()) {
    auto src = read_vocab_file(src_vocab);
    auto tgt = read_vocab_file(tgt_vocab);
    if (!src.is_source()) throw FormatError(src_vocab + ": not a source vocabulary");
    return encode_with(raw, src, tgt, c.max_length);
  }
  return build_parallel_corpus(raw, min_count, min_count, {c.max_length});
}

int cmd_train_fa(const TrainFaArgs& a, std::ostream&, std::ostream& err) {
  a.corpus.validate();
  if (!(a.p0 >= 0.0 && a.p0 < 1.0)) throw UsageError("--p0 must be in [0, 1)");
  if (!(a.lambda >= fa::kLambdaMin && a.lambda <= fa::kLambdaMax))
    throw UsageError("--lambda must be in [0.1, 20]");
  const auto corpus = load_training_corpus(a.corpus, a.src_vocab, a.tgt_vocab, a.min_count);
  if (corpus.empty()) throw FormatError("corpus has no usable sentence pairs");
  err << "pairs=" << corpus.size() << " dropped=" << corpus.dropped() << '\n';

  fa::TrainOptions opts;
  opts.iterations = a.iterations;
  opts.p0 = a.p0;
  opts.lambda_init = a.lambda;
  opts.threads = a.threads;
  opts.m_step.optimize_lambda = !a.fixed_lambda;
  opts.on_iteration = [&](int it, double ll) {
    err << "iteration=" << it << " loglik=" << fmt_score(ll) << '\n';
  };
  auto result = fa::train(corpus, opts);
  err << "lambda=" << fmt_score(result.params.lambda) << '\n';
  FaModelFile file{corpus.src_vocab(), corpus.tgt_vocab(), std::move(result.params)};
  write_file_atomically(a.out, [&](std::ostream& os) { write_fa_model(os, file); });
  return kOk;
}

// --- train-dwa -----------------------------------------------------------

struct TrainDwaArgs {
  CorpusArgs corpus;
  std::string fa_model;
  std::string out;
  dwa::TrainConfig config;
  std::optional<double> lambda;
  bool no_shuffle = false;
};

int cmd_train_dwa(TrainDwaArgs a, std::ostream&, std::ostream& err) {
  a.corpus.validate();
  a.config.shuffle = !a.no_shuffle;
  a.config.lambda_init = a.lambda;
  try {
    a.config.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto fa_file = load_fa_model(a.fa_model);
  const auto raw = a.corpus.read();
  const auto corpus = encode_with(raw, fa_file.src_vocab, fa_file.tgt_vocab,
                                  a.corpus.max_length);
  if (corpus.empty()) throw FormatError("corpus has no usable sentence pairs");
  a.config.on_epoch = [&](const dwa::EpochReport& r) {
    err << "epoch=" << r.epoch << " Q=" << fmt_score(r.q)
        << " elapsed_ms=" << static_cast<long long>(r.elapsed_ms) << '\n';
  };
  auto result = dwa::train(corpus, fa_file.params, a.config);
  DwaModelFile file{fa_file.src_vocab, fa_file.tgt_vocab, std::move(result.model)};
  write_file_atomically(a.out, [&](std::ostream& os) { write_dwa_model(os, file); });
  return kOk;
}

// --- align ---------------------------------------------------------------

struct AlignArgs {
  CorpusArgs corpus;
  std::string model;
  std::string out;
};

int cmd_align(const AlignArgs& a, std::ostream& out, std::ostream&) {
  a.corpus.validate();
  const auto raw = a.corpus.read();
  std::vector<AlignmentLinks> links(raw.size());
  auto decode_all = [&](const Vocab& src, const Vocab& tgt, auto&& decode) {
    for (std::size_t n = 0; n < raw.size(); ++n) {
      if (raw[n].src.empty() || raw[n].tgt.empty()) continue;
      decode(n, SentencePair{src.encode(raw[n].src), tgt.encode(raw[n].tgt)});
    }
  };
  if (peek_model_kind(a.model) == ModelKind::Fa) {
    const auto m = load_fa_model(a.model);
    decode_all(m.src_vocab, m.tgt_vocab, [&](std::size_t n, const SentencePair& p) {
      links[n] = fa::viterbi_align(p, m.params);
    });
  } else {
    const auto m = load_dwa_model(a.model);
    decode_all(m.src_vocab, m.tgt_vocab, [&](std::size_t n, const SentencePair& p) {
      links[n] = dwa::viterbi_align(p, m.model);
    });
  }
  write_output(a.out, out, [&](std::ostream& os) {
    for (const auto& l : links) os << eval::format_pharaoh(l) << '\n';
  });
  return kOk;
}

// --- aer -----------------------------------------------------------------

struct AerArgs {
  std::string pred;
  std::string gold;
};

int cmd_aer(const AerArgs& a, std::ostream& out, std::ostream&) {
  std::ifstream pred_in(a.pred);
  if (!pred_in) throw FormatError("cannot open " + a.pred);
  std::ifstream gold_in(a.gold);
  if (!gold_in) throw FormatError("cannot open " + a.gold);
  const auto pred = eval::read_pharaoh(pred_in);
  const auto gold = eval::read_gold(gold_in, pred.size());
  out << "AER=" << fmt_real(eval::corpus_aer(pred, gold)) << '\n';
  return kOk;
}

// --- nn / expected-repr / project / export-embeddings ---------------------

WordId lookup(const Vocab& vocab, const std::string& word, const char* side) {
  const auto id = vocab.find(word);
  if (!id) throw FormatError(std::string("word '") + word + "' not in the " + side +
                             " vocabulary");
  return *id;
}

struct NnArgs {
  std::string model;
  std::string word;
  std::string from = "source";
  std::string to = "target";
  std::size_t n = 10;
};

void print_neighbors(std::ostream& out, const std::vector<eval::Neighbor>& nn,
                     const Vocab& vocab) {
  for (const auto& nb : nn) out << vocab.token(nb.id) << '\t' << fmt_score(nb.similarity) << '\n';
}

int cmd_nn(const NnArgs& a, std::ostream& out, std::ostream&) {
  const auto file = load_dwa_model(a.model);
  const auto& p = file.model.params;
  Eigen::VectorXd query;
  if (a.from == "source")
    query = p.src_embed.row(lookup(file.src_vocab, a.word, "source")).transpose();
  else if (a.from == "target")
    query = p.tgt_embed.row(lookup(file.tgt_vocab, a.word, "target")).transpose();
  else
    query = eval::expected_translation_repr(lookup(file.src_vocab, a.word, "source"),
                                            file.model);
  const bool to_source = a.to == "source";
  const auto nn = eval::nearest_neighbors(query, to_source ? p.src_embed : p.tgt_embed, a.n);
  print_neighbors(out, nn, to_source ? file.src_vocab : file.tgt_vocab);
  return kOk;
}

struct ExpectedArgs {
  std::string model;
  std::string word;
  std::size_t n = 10;
};

int cmd_expected(const ExpectedArgs& a, std::ostream& out, std::ostream&) {
  const auto file = load_dwa_model(a.model);
  const auto repr = eval::expected_translation_repr(
      lookup(file.src_vocab, a.word, "source"), file.model);
  print_neighbors(out, eval::nearest_neighbors(repr, file.model.params.tgt_embed, a.n),
                  file.tgt_vocab);
  return kOk;
}

struct ProjectArgs {
  std::string model;
  std::vector<std::string> words;
};

int cmd_project(const ProjectArgs& a, std::ostream& out, std::ostream&) {
  const auto file = load_dwa_model(a.model);
  std::vector<WordId> ids;
  if (a.words.empty()) {
    for (WordId e = 0; e < file.src_vocab.size(); ++e)
      if (e != file.src_vocab.unk_id() && e != file.src_vocab.null()) ids.push_back(e);
  } else {
    for (const auto& w : a.words) ids.push_back(lookup(file.src_vocab, w, "source"));
  }
  for (auto e : ids) {
    const auto f = transfer::best_translation(e, file.model);
    lbl::TranslationScorer scorer(file.model.params, file.model.classes,
                                  lbl::word_context(e, file.model.params));
    out << file.src_vocab.token(e) << '\t' << file.tgt_vocab.token(f) << '\t'
        << fmt_score(scorer.prob(f)) << '\n';
  }
  return kOk;
}

struct ExportArgs {
  std::string model;
  std::string side = "target";
  std::string out;
};

int cmd_export(const ExportArgs& a, std::ostream& out, std::ostream&) {
  const auto file = load_dwa_model(a.model);
  const auto& p = file.model.params;
  std::vector<std::string> words;
  RowMatrix vectors;
  if (a.side == "target") {
    const auto t = transfer::target_table(file.model, file.tgt_vocab);
    words = t.words();
    vectors = t.vectors();
  } else {
    std::vector<WordId> ids;
    for (WordId e = 0; e < file.src_vocab.size(); ++e)
      if (e != file.src_vocab.unk_id() && e != file.src_vocab.null()) ids.push_back(e);
    vectors.resize(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(p.dim));
    for (std::size_t n = 0; n < ids.size(); ++n) {
      words.push_back(file.src_vocab.token(ids[n]));
      vectors.row(static_cast<Eigen::Index>(n)) =
          a.side == "source"
              ? Eigen::VectorXd(p.src_embed.row(ids[n]).transpose()).transpose()
              : eval::expected_translation_repr(ids[n], file.model).transpose();
    }
  }
  write_output(a.out, out,
               [&](std::ostream& os) { write_embeddings_text(os, words, vectors); });
  return kOk;
}

// --- classify ------------------------------------------------------------

struct ClassifyArgs {
  std::string model;
  std::string train;
  std::string test;
  std::string train_side = "source";
  transfer::PerceptronOptions perceptron;
};

transfer::LabeledDocs read_docs(const std::string& path,
                                const std::vector<std::string>* labels) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return transfer::read_labeled_docs(in, labels);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

int cmd_classify(const ClassifyArgs& a, std::ostream& out, std::ostream& err) {
  const auto file = load_dwa_model(a.model);
  const auto train_docs = read_docs(a.train, nullptr);
  const auto test_docs = read_docs(a.test, &train_docs.label_names);
  if (train_docs.docs.empty()) throw FormatError(a.train + ": no documents");
  if (test_docs.docs.empty()) throw FormatError(a.test + ": no documents");

  const auto projected = transfer::projected_source_table(file.model, file.src_vocab);
  const auto target = transfer::target_table(file.model, file.tgt_vocab);
  const bool source_first = a.train_side == "source";
  transfer::FeaturizeStats train_stats, test_stats;
  const auto train = transfer::featurize(train_docs, source_first ? projected : target,
                                         &train_stats);
  const auto test = transfer::featurize(test_docs, source_first ? target : projected,
                                        &test_stats);
  if (train_stats.empty_docs || test_stats.empty_docs)
    err << "warning: " << train_stats.empty_docs << " training and "
        << test_stats.empty_docs << " test documents had no known tokens\n";

  const auto model =
      transfer::train_perceptron(train, train_docs.num_labels(), a.perceptron);
  out << "accuracy=" << fmt_real(transfer::classify_eval(model, test))
      << " n=" << test.size() << " majority="
      << fmt_real(transfer::majority_baseline(train, test, train_docs.num_labels()))
      << '\n';
  return kOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bilingual word alignment and embedding toolkit", "dwalign"};
  app.require_subcommand(1);

  PrepareArgs prepare;
  auto* sc_prepare = app.add_subcommand("prepare", "Build vocabularies and corpus statistics");
  prepare.corpus.add_to(sc_prepare);
  sc_prepare->add_option("--min-count", prepare.min_count, "Fold rarer tokens into <unk>")
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
  sc_prepare->add_option("--src-min-count", prepare.src_min_count, "Source-side override");
  sc_prepare->add_option("--tgt-min-count", prepare.tgt_min_count, "Target-side override");
  sc_prepare->add_option("--out-prefix", prepare.out_prefix,
                         "Writes PREFIX.src.vocab and PREFIX.tgt.vocab")
      ->required();

  TrainFaArgs train_fa;
  auto* sc_fa = app.add_subcommand("train-fa", "Train the FA (log-linear IBM 2) model");
  train_fa.corpus.add_to(sc_fa);
  sc_fa->add_option("--src-vocab", train_fa.src_vocab, "Source vocabulary from prepare");
  sc_fa->add_option("--tgt-vocab", train_fa.tgt_vocab, "Target vocabulary from prepare");
  sc_fa->add_option("--min-count", train_fa.min_count, "Fold rarer tokens into <unk>")
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
  sc_fa->add_option("--iters", train_fa.iterations, "EM iterations")
      ->check(CLI::Range(0, 1000));
  sc_fa->add_option("--p0", train_fa.p0, "NULL alignment probability");
  sc_fa->add_option("--lambda", train_fa.lambda, "Initial diagonal tension");
  sc_fa->add_flag("--fixed-lambda", train_fa.fixed_lambda, "Do not optimize the tension");
  sc_fa->add_option("--threads", train_fa.threads, "E-step worker threads")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1024}));
  sc_fa->add_option("--out", train_fa.out, "Model file")->required();

  TrainDwaArgs train_dwa;
  auto* sc_dwa = app.add_subcommand("train-dwa", "Train the distributed alignment model");
  train_dwa.corpus.add_to(sc_dwa);
  sc_dwa->add_option("--fa", train_dwa.fa_model, "Trained FA model")->required();
  sc_dwa->add_option("--out", train_dwa.out, "Model file")->required();
  sc_dwa->add_option("--dim", train_dwa.config.dim, "Embedding dimension")
      ->check(CLI::Range(std::size_t{1}, std::size_t{100000}));
  sc_dwa->add_option("--context", train_dwa.config.context, "Source context half-width k")
      ->check(CLI::Range(std::size_t{0}, std::size_t{100}));
  sc_dwa->add_option("--epochs", train_dwa.config.epochs, "M-step epochs")
      ->check(CLI::Range(0, 100000));
  sc_dwa->add_option("--eta", train_dwa.config.adagrad.learning_rate, "AdaGrad learning rate")
      ->check(CLI::PositiveNumber);
  sc_dwa->add_option("--epsilon", train_dwa.config.adagrad.epsilon, "AdaGrad epsilon")
      ->check(CLI::NonNegativeNumber);
  sc_dwa->add_option("--seed", train_dwa.config.seed, "Random seed");
  sc_dwa->add_flag("--no-shuffle", train_dwa.no_shuffle, "Keep corpus order every epoch");
  sc_dwa->add_option("--lambda", train_dwa.lambda, "Initial tension (default: FA's)")
      ->check(CLI::Range(fa::kLambdaMin, fa::kLambdaMax));
  sc_dwa->add_flag("--unigram-bias", train_dwa.config.init_bias_from_unigram,
                   "Initialize word biases from target log-frequencies");
  sc_dwa->add_option("--threads", train_dwa.config.threads, "Gradient worker threads")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1024}));

  AlignArgs align;
  auto* sc_align = app.add_subcommand("align", "Viterbi alignments in Pharaoh format");
  align.corpus.add_to(sc_align);
  sc_align->add_option("--model", align.model, "FA or DWA model")->required();
  sc_align->add_option("--out", align.out, "Output file (default: stdout)");

  AerArgs aer;
  auto* sc_aer = app.add_subcommand("aer", "Alignment error rate against gold links");
  sc_aer->add_option("--pred", aer.pred, "Predicted alignments (Pharaoh)")->required();
  sc_aer->add_option("--gold", aer.gold, "Gold links 'pair src tgt S|P'")->required();

  NnArgs nn;
  auto* sc_nn = app.add_subcommand("nn", "Nearest neighbours by cosine similarity");
  sc_nn->add_option("--model", nn.model, "DWA model")->required();
  sc_nn->add_option("--word", nn.word, "Query word")->required();
  sc_nn->add_option("--from", nn.from, "Query vector: source, target or expected")
      ->check(CLI::IsMember({"source", "target", "expected"}));
  sc_nn->add_option("--to", nn.to, "Search space: source or target")
      ->check(CLI::IsMember({"source", "target"}));
  sc_nn->add_option("--n", nn.n, "Neighbours to list")
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));

  ExpectedArgs expected;
  auto* sc_exp = app.add_subcommand(
      "expected-repr", "Target words closest to a source word's expected translation");
  sc_exp->add_option("--model", expected.model, "DWA model")->required();
  sc_exp->add_option("--word", expected.word, "Source word")->required();
  sc_exp->add_option("--n", expected.n, "Neighbours to list")
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));

  ProjectArgs project;
  auto* sc_project = app.add_subcommand("project", "Most probable translation per source word");
  sc_project->add_option("--model", project.model, "DWA model")->required();
  sc_project->add_option("--word", project.words, "Source word(s) (default: all)");

  ClassifyArgs classify;
  auto* sc_cls = app.add_subcommand("classify", "Cross-lingual document classification");
  sc_cls->add_option("--model", classify.model, "DWA model")->required();
  sc_cls->add_option("--train", classify.train, "Training documents 'label<TAB>tokens'")
      ->required();
  sc_cls->add_option("--test", classify.test, "Test documents 'label<TAB>tokens'")->required();
  sc_cls->add_option("--train-side", classify.train_side,
                     "Language of the training documents: source or target")
      ->check(CLI::IsMember({"source", "target"}));
  sc_cls->add_option("--epochs", classify.perceptron.epochs, "Perceptron epochs")
      ->check(CLI::Range(1, 100000));
  sc_cls->add_option("--seed", classify.perceptron.seed, "Shuffling seed");

  ExportArgs exp;
  auto* sc_export = app.add_subcommand("export-embeddings", "Write embeddings as text");
  sc_export->add_option("--model", exp.model, "DWA model")->required();
  sc_export->add_option("--side", exp.side, "source, target or expected")
      ->check(CLI::IsMember({"source", "target", "expected"}));
  sc_export->add_option("--out", exp.out, "Output file (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kUsage;
  }

  try {
    if (sc_prepare->parsed()) return cmd_prepare(prepare, out, err);
    if (sc_fa->parsed()) return cmd_train_fa(train_fa, out, err);
    if (sc_dwa->parsed()) return cmd_train_dwa(train_dwa, out, err);
    if (sc_align->parsed()) return cmd_align(align, out, err);
    if (sc_aer->parsed()) return cmd_aer(aer, out, err);
    if (sc_nn->parsed()) return cmd_nn(nn, out, err);
    if (sc_exp->parsed()) return cmd_expected(expected, out, err);
    if (sc_project->parsed()) return cmd_project(project, out, err);
    if (sc_cls->parsed()) return cmd_classify(classify, out, err);
    if (sc_export->parsed()) return cmd_export(exp, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  err << app.help();
  return kUsage;
}

}  // namespace dwalign::cli
