#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "cli.hpp"
#include "dwalign/eval.hpp"
#include "synthetic.hpp"

using namespace dwalign;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string join(const Sentence& s) {
  std::string out;
  for (const auto& t : s) out += (out.empty() ? "" : " ") + t;
  return out;
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

// One trained FA + DWA pair shared by the whole suite.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "dwalign_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    data_ = new testkit::DictionaryCorpus(testkit::make_dictionary_corpus({.pairs = 400}));
    std::ofstream c(path("corpus.txt")), s(path("corpus.src")), t(path("corpus.tgt")),
        g(path("gold.txt"));
    for (std::size_t n = 0; n < data_->raw.size(); ++n) {
      c << join(data_->raw[n].src) << " ||| " << join(data_->raw[n].tgt) << '\n';
      s << join(data_->raw[n].src) << '\n';
      t << join(data_->raw[n].tgt) << '\n';
      for (const auto& l : data_->gold[n].sure) g << n << ' ' << l.src << ' ' << l.tgt << " S\n";
    }
    c.close();
    const auto fa = run({"train-fa", "--corpus", path("corpus.txt"), "--min-count", "1",
                         "--out", path("fa.model")});
    ASSERT_EQ(fa.code, 0) << fa.err;
    const auto dwa = run({"train-dwa", "--corpus", path("corpus.txt"), "--fa", path("fa.model"),
                          "--dim", "16", "--epochs", "10", "--no-shuffle", "--out",
                          path("dwa.model")});
    ASSERT_EQ(dwa.code, 0) << dwa.err;
    dwa_log_ = new std::string(dwa.err);
    fa_log_ = new std::string(fa.err);
  }

  static void TearDownTestSuite() {
    fs::remove_all(dir_);
    delete data_;
    delete dwa_log_;
    delete fa_log_;
  }

  static std::string path(const std::string& name) { return (dir_ / name).string(); }

  static inline fs::path dir_;
  static inline testkit::DictionaryCorpus* data_ = nullptr;
  static inline std::string* dwa_log_ = nullptr;
  static inline std::string* fa_log_ = nullptr;
};

}  // namespace

TEST_F(CliTest, TrainFaLogsEveryIteration) {
  EXPECT_TRUE(fs::exists(path("fa.model")));
  EXPECT_FALSE(fs::exists(path("fa.model.tmp")));
  for (int it = 0; it <= 5; ++it)
    EXPECT_NE(fa_log_->find("iteration=" + std::to_string(it) + " loglik="), std::string::npos);
}

TEST_F(CliTest, TrainDwaLogsEpochs) {
  const std::regex line(R"(epoch=(\d+) Q=(-?[0-9.e+-]+) elapsed_ms=(\d+))");
  std::size_t epochs = 0;
  for (std::sregex_iterator it(dwa_log_->begin(), dwa_log_->end(), line), end; it != end; ++it)
    ++epochs;
  EXPECT_EQ(epochs, 11u);
}

TEST_F(CliTest, AlignAndScore) {
  const auto a = run({"align", "--corpus", path("corpus.txt"), "--model", path("dwa.model"),
                      "--out", path("dwa.align")});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto s = run({"aer", "--pred", path("dwa.align"), "--gold", path("gold.txt")});
  ASSERT_EQ(s.code, 0) << s.err;
  ASSERT_TRUE(std::regex_match(s.out, std::regex(R"(AER=[0-9.]+\n)"))) << s.out;
  EXPECT_LT(std::stod(s.out.substr(4)), 0.15);

  const auto fa = run({"align", "--source", path("corpus.src"), "--target", path("corpus.tgt"),
                       "--model", path("fa.model")});
  ASSERT_EQ(fa.code, 0) << fa.err;
  EXPECT_EQ(count_lines(fa.out), data_->raw.size());
}

TEST_F(CliTest, ReverseDirectionAlignsOtherWay) {
  const auto fa = run({"train-fa", "--corpus", path("corpus.txt"), "--reverse", "--iters", "1",
                       "--out", path("rev.model")});
  ASSERT_EQ(fa.code, 0) << fa.err;
  std::ifstream in(path("rev.model"));
  std::string text((std::istreambuf_iterator<char>(in)), {});
  EXPECT_NE(text.find("\nt0\t"), std::string::npos);
}

TEST_F(CliTest, NeighboursAndProjection) {
  const auto nn = run({"nn", "--model", path("dwa.model"), "--word", "s3", "--from", "source",
                       "--to", "source", "--n", "4"});
  ASSERT_EQ(nn.code, 0) << nn.err;
  EXPECT_EQ(count_lines(nn.out), 4u);
  EXPECT_EQ(nn.out.substr(0, 3), "s3\t");

  const auto ex = run({"expected-repr", "--model", path("dwa.model"), "--word", "s3", "--n", "3"});
  ASSERT_EQ(ex.code, 0) << ex.err;
  EXPECT_EQ(ex.out.substr(0, 3), "t3\t");

  const auto pr = run({"project", "--model", path("dwa.model"), "--word", "s7"});
  ASSERT_EQ(pr.code, 0) << pr.err;
  EXPECT_EQ(pr.out.substr(0, 6), "s7\tt7\t");

  const auto missing = run({"nn", "--model", path("dwa.model"), "--word", "nope"});
  EXPECT_EQ(missing.code, 2);
}

TEST_F(CliTest, ExportEmbeddings) {
  for (const char* side : {"source", "target", "expected"}) {
    const auto r = run({"export-embeddings", "--model", path("dwa.model"), "--side", side});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "50 16") << side;
    EXPECT_EQ(count_lines(r.out), 51u);
  }
}

TEST_F(CliTest, Classify) {
  const auto task = testkit::make_transfer_task();
  auto write_docs = [](const std::string& p, const transfer::LabeledDocs& docs) {
    std::ofstream out(p);
    for (const auto& d : docs.docs) out << docs.label_names[d.label] << '\t' << join(d.tokens) << '\n';
  };
  write_docs(path("train.docs"), task.train);
  write_docs(path("test.docs"), task.test);
  const auto r = run({"classify", "--model", path("dwa.model"), "--train", path("train.docs"),
                      "--test", path("test.docs")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::smatch m;
  ASSERT_TRUE(std::regex_match(r.out, m,
                               std::regex(R"(accuracy=([0-9.]+) n=200 majority=([0-9.]+)\n)")))
      << r.out;
  EXPECT_GT(std::stod(m[1]), std::stod(m[2]));
}

TEST_F(CliTest, Prepare) {
  const auto r = run({"prepare", "--corpus", path("corpus.txt"), "--out-prefix", path("prep")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("pairs=400"), std::string::npos);
  const auto fa = run({"train-fa", "--corpus", path("corpus.txt"), "--src-vocab",
                       path("prep.src.vocab"), "--tgt-vocab", path("prep.tgt.vocab"), "--iters",
                       "1", "--out", path("prep.model")});
  EXPECT_EQ(fa.code, 0) << fa.err;
}

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run({"--help"}).code, 0);
  const auto none = run({});
  EXPECT_EQ(none.code, 1);
  const auto bad = run({"frobnicate"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_FALSE(bad.err.empty());
  EXPECT_EQ(run({"train-fa", "--corpus", "x", "--bogus", "--out", "y"}).code, 1);
  EXPECT_EQ(run({"train-fa", "--out", "y"}).code, 1);
}

TEST(Cli, FlagValidationBeforeReadingData) {
  // the corpus does not exist; validation must fail first
  const auto r = run({"train-dwa", "--corpus", "/nonexistent/c.txt", "--fa", "/nonexistent/fa",
                      "--dim", "0", "--out", "/nonexistent/out"});
  EXPECT_EQ(r.code, 1) << r.err;
  EXPECT_EQ(run({"train-fa", "--corpus", "/nonexistent/c.txt", "--p0", "1.5", "--out", "o"}).code,
            1);
}

TEST(Cli, DataErrorsExitTwo) {
  const auto dir = fs::temp_directory_path();
  const auto bad = (dir / "dwalign_cli_bad.txt").string();
  std::ofstream(bad) << "a b ||| c\nno separator\n";
  const auto out = (dir / "dwalign_cli_bad.model").string();
  const auto r = run({"train-fa", "--corpus", bad, "--out", out});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(out));
  EXPECT_EQ(run({"train-fa", "--corpus", "/nonexistent/c.txt", "--out", out}).code, 2);
  EXPECT_EQ(run({"aer", "--pred", bad, "--gold", bad}).code, 2);
  fs::remove(bad);
}
