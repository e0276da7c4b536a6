#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "dwalign/corpus.hpp"
#include "dwalign/error.hpp"

using namespace dwalign;

namespace {

std::vector<Sentence> lines(std::initializer_list<const char*> text) {
  std::vector<Sentence> out;
  for (const char* t : text) out.push_back(tokenize(t));
  return out;
}

}  // namespace

TEST(Vocab, SpecialsTakeLowestIds) {
  Vocab src(VocabSide::Source), tgt(VocabSide::Target);
  EXPECT_EQ(src.size(), 2u);
  EXPECT_EQ(src.null(), 0u);
  EXPECT_EQ(src.unk_id(), 1u);
  EXPECT_EQ(src.token(0), kNullToken);
  EXPECT_EQ(tgt.size(), 1u);
  EXPECT_EQ(tgt.unk_id(), 0u);
  EXPECT_FALSE(tgt.null_id());
  EXPECT_THROW(tgt.null(), std::logic_error);
}

TEST(Vocab, RareTokensFoldIntoUnk) {
  const auto v = Vocab::build(lines({"a a b"}), 2, VocabSide::Target);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v.token(1), "a");
  EXPECT_EQ(v.freq(1), 2u);
  EXPECT_EQ(v.id("b"), v.unk_id());
  EXPECT_EQ(v.freq(v.unk_id()), 1u);
}

TEST(Vocab, MinCountOneKeepsEverything) {
  const auto v = Vocab::build(lines({"a b"}), 1, VocabSide::Target);
  EXPECT_EQ(v.size(), 3u);
  EXPECT_TRUE(v.find("a"));
  EXPECT_TRUE(v.find("b"));
  EXPECT_EQ(v.freq(v.unk_id()), 0u);
}

TEST(Vocab, EmptyCorpusGivesSpecialsOnly) {
  const auto t = Vocab::build({}, 5, VocabSide::Target);
  EXPECT_EQ(t.size(), 1u);
  EXPECT_EQ(t.freq(t.unk_id()), 0u);
  const auto s = Vocab::build({}, 5, VocabSide::Source);
  EXPECT_EQ(s.size(), 2u);
}

TEST(Vocab, OrderedByFrequencyThenFirstOccurrence) {
  const auto v = Vocab::build(lines({"c b a b", "a d"}), 1, VocabSide::Target);
  // b:2 a:2 (b first), then c:1 d:1
  EXPECT_EQ(v.token(1), "b");
  EXPECT_EQ(v.token(2), "a");
  EXPECT_EQ(v.token(3), "c");
  EXPECT_EQ(v.token(4), "d");
}

TEST(Vocab, ReservedTokensInTextCountAsUnk) {
  const auto v = Vocab::build(lines({"<unk> <null> x"}), 1, VocabSide::Source);
  EXPECT_EQ(v.size(), 3u);
  EXPECT_EQ(v.freq(v.unk_id()), 2u);
}

TEST(Vocab, RejectsZeroMinCount) {
  EXPECT_THROW(Vocab::build(lines({"a"}), 0, VocabSide::Target), std::invalid_argument);
}

TEST(Vocab, WriteReadRoundTrip) {
  const auto v = Vocab::build(lines({"der hund der", "katze"}), 1, VocabSide::Source);
  std::stringstream ss;
  v.write(ss);
  EXPECT_EQ(Vocab::read(ss), v);
}

TEST(Vocab, ReadRejectsBadHeader) {
  std::istringstream in("not a vocab\n<unk>\t0\n");
  EXPECT_THROW(Vocab::read(in), FormatError);
}

TEST(Vocab, EncodeDecode) {
  const auto v = Vocab::build(lines({"the dog"}), 1, VocabSide::Target);
  const auto ids = v.encode(tokenize("the zzz dog"));
  EXPECT_EQ(ids[1], v.unk_id());
  EXPECT_EQ(v.decode(ids), (Sentence{"the", "<unk>", "dog"}));
}

TEST(EncodeCorpus, LengthsMatchTokens) {
  const auto src = lines({"der hund"}), tgt = lines({"the dog"});
  const auto sv = Vocab::build(src, 1, VocabSide::Source);
  const auto tv = Vocab::build(tgt, 1, VocabSide::Target);
  const auto c = encode_corpus(src, tgt, sv, tv);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].src_len(), 2u);
  EXPECT_EQ(c[0].tgt_len(), 2u);
  EXPECT_EQ(c.dropped(), 0u);
}

TEST(EncodeCorpus, EmptySideIsDropped) {
  const auto src = lines({"", "a"}), tgt = lines({"the dog", "b"});
  const auto c = encode_corpus(src, tgt, Vocab::build(src, 1, VocabSide::Source),
                               Vocab::build(tgt, 1, VocabSide::Target));
  EXPECT_EQ(c.size(), 1u);
  EXPECT_EQ(c.dropped(), 1u);
}

TEST(EncodeCorpus, OovBecomesUnk) {
  const auto src = lines({"a"}), tgt = lines({"b"});
  const auto sv = Vocab::build(src, 1, VocabSide::Source);
  const auto tv = Vocab::build(tgt, 1, VocabSide::Target);
  const auto c = encode_corpus(lines({"zzz"}), lines({"b"}), sv, tv);
  EXPECT_EQ(c[0].src[0], sv.unk_id());
}

TEST(EncodeCorpus, MismatchNamesBothCounts) {
  const auto src = lines({"a", "b"}), tgt = lines({"c"});
  try {
    encode_corpus(src, tgt, Vocab(VocabSide::Source), Vocab(VocabSide::Target));
    FAIL();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find('2'), std::string::npos);
    EXPECT_NE(msg.find('1'), std::string::npos);
  }
}

TEST(EncodeCorpus, MaxLengthFilter) {
  std::vector<RawPair> raw = {{tokenize("a b c"), tokenize("x")}, {tokenize("a"), tokenize("y")}};
  const auto c = build_parallel_corpus(raw, 1, 1, {2});
  EXPECT_EQ(c.size(), 1u);
  EXPECT_EQ(c.dropped(), 1u);
  // vocabulary built from the surviving pair only
  EXPECT_FALSE(c.src_vocab().find("b"));
  EXPECT_EQ(c.target_tokens(), 1u);
}

TEST(Classes, HandTracedExample) {
  const std::vector<std::uint64_t> freqs = {5, 3, 1, 1};
  const auto p = build_classes(freqs);
  ASSERT_EQ(p.num_classes(), 3u);
  EXPECT_EQ(p.members[0], (std::vector<WordId>{0}));
  EXPECT_EQ(p.members[1], (std::vector<WordId>{1, 2}));
  EXPECT_EQ(p.members[2], (std::vector<WordId>{3}));
}

TEST(Classes, SingleWord) {
  const std::vector<std::uint64_t> freqs = {7};
  const auto p = build_classes(freqs);
  ASSERT_EQ(p.num_classes(), 1u);
  EXPECT_EQ(p.members[0], (std::vector<WordId>{0}));
}

TEST(Classes, FourEqualWordsMakeTwoPairs) {
  const std::vector<std::uint64_t> freqs = {1, 1, 1, 1};
  const auto p = build_classes(freqs);
  ASSERT_EQ(p.num_classes(), 2u);
  EXPECT_EQ(p.members[0], (std::vector<WordId>{0, 1}));
  EXPECT_EQ(p.members[1], (std::vector<WordId>{2, 3}));
}

TEST(Classes, TiesScanSmallerIdFirst) {
  const std::vector<std::uint64_t> freqs = {1, 4, 1, 4};
  const auto p = build_classes(freqs);
  EXPECT_EQ(p.members.front().front(), 1u);
  EXPECT_EQ(p.class_of[3], p.class_of[1]);
}

TEST(Classes, PartitionIsConsistent) {
  std::mt19937_64 rng(3);
  for (std::size_t n : {1, 5, 64, 1000}) {
    std::vector<std::uint64_t> freqs(n);
    std::uniform_int_distribution<std::uint64_t> f(0, 50);
    for (auto& x : freqs) x = f(rng);
    const auto p = build_classes(freqs);
    std::size_t total = 0;
    for (std::size_t c = 0; c < p.num_classes(); ++c) {
      ASSERT_FALSE(p.members[c].empty());
      EXPECT_LE(static_cast<double>(p.members[c].size()),
                std::ceil(std::sqrt(static_cast<double>(n))));
      for (std::size_t k = 0; k < p.members[c].size(); ++k) {
        EXPECT_EQ(p.class_of[p.members[c][k]], c);
        EXPECT_EQ(p.within_index[p.members[c][k]], k);
      }
      total += p.members[c].size();
    }
    EXPECT_EQ(total, n);
  }
}

TEST(Classes, FromMembersRejectsOverlap) {
  EXPECT_THROW(ClassPartition::from_members({{0, 1}, {1}}, 2), FormatError);
  EXPECT_THROW(ClassPartition::from_members({{0}}, 2), FormatError);
  EXPECT_EQ(ClassPartition::single(3).num_classes(), 1u);
}

TEST(TriplePipe, SplitsOnSeparator) {
  std::istringstream in("der hund ||| the dog\n");
  const auto raw = read_triple_pipe(in);
  ASSERT_EQ(raw.size(), 1u);
  EXPECT_EQ(raw[0].src, (Sentence{"der", "hund"}));
  EXPECT_EQ(raw[0].tgt, (Sentence{"the", "dog"}));
}

TEST(TriplePipe, ExtraSeparatorReportsLine) {
  std::istringstream in("x ||| y\na ||| b ||| c\n");
  try {
    read_triple_pipe(in);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(TriplePipe, MissingSeparatorIsError) {
  std::istringstream in("no separator here\n");
  EXPECT_THROW(read_triple_pipe(in), FormatError);
}

TEST(TwoFiles, LineAligned) {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path();
  const auto s = dir / "dwalign_corpus_test.src", t = dir / "dwalign_corpus_test.tgt";
  std::ofstream(s) << "a b\nc\n";
  std::ofstream(t) << "x\ny z\n";
  auto raw = read_two_files(s.string(), t.string());
  EXPECT_EQ(raw.size(), 2u);
  reverse_direction(raw);
  EXPECT_EQ(raw[1].src, (Sentence{"y", "z"}));
  fs::remove(s);
  fs::remove(t);
}

TEST(TwoFiles, MissingFileIsFormatError) {
  EXPECT_THROW(read_two_files("/nonexistent/a", "/nonexistent/b"), FormatError);
}
