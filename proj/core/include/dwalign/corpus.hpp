#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dwalign {

using WordId = std::uint32_t;
using Sentence = std::vector<std::string>;

inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::string_view kNullToken = "<null>";

enum class VocabSide { Source, Target };

// Token <-> id map with corpus frequencies.
//
// Specials occupy the lowest ids: a source vocabulary has NULL at 0 and UNK
// at 1, a target vocabulary has UNK at 0. Regular tokens follow in order of
// decreasing frequency, ties broken by first occurrence.
class Vocab {
 public:
  Vocab() : Vocab(VocabSide::Target) {}
  explicit Vocab(VocabSide side);

  // Builds a vocabulary; tokens seen fewer than `min_count` times fold into UNK.
  static Vocab build(std::span<const Sentence> sentences, std::size_t min_count,
                     VocabSide side);

  // Rebuilds from (token, freq) rows in id order, as read from a vocab file.
  static Vocab from_entries(
      std::span<const std::pair<std::string, std::uint64_t>> entries);

  std::size_t size() const { return id_to_token_.size(); }
  bool is_source() const { return null_id_.has_value(); }
  WordId unk_id() const { return unk_id_; }
  std::optional<WordId> null_id() const { return null_id_; }
  // Source vocabularies only; throws std::logic_error otherwise.
  WordId null() const;

  // Unknown tokens map to unk_id().
  WordId id(std::string_view token) const;
  std::optional<WordId> find(std::string_view token) const;
  const std::string& token(WordId id) const { return id_to_token_.at(id); }
  std::uint64_t freq(WordId id) const { return freq_.at(id); }
  std::span<const std::uint64_t> freqs() const { return freq_; }
  std::uint64_t total_count() const;

  std::vector<WordId> encode(std::span<const std::string> tokens) const;
  Sentence decode(std::span<const WordId> ids) const;

  // `#dwalign-vocab v1` header, then `token<TAB>freq` per id.
  void write(std::ostream& os) const;
  static Vocab read(std::istream& is);

  bool operator==(const Vocab&) const = default;

 private:
  WordId add(std::string token, std::uint64_t freq);

  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::unordered_map<std::string, WordId, StringHash, std::equal_to<>>
      token_to_id_;
  std::vector<std::string> id_to_token_;
  std::vector<std::uint64_t> freq_;
  WordId unk_id_ = 0;
  std::optional<WordId> null_id_;
};

// Source positions are 1..I (NULL is the implicit position 0); target
// positions are 1..J. Internally both vectors are 0-based.
struct SentencePair {
  std::vector<WordId> src;
  std::vector<WordId> tgt;

  std::size_t src_len() const { return src.size(); }
  std::size_t tgt_len() const { return tgt.size(); }
  bool operator==(const SentencePair&) const = default;
};

struct RawPair {
  Sentence src;
  Sentence tgt;
};

class ParallelCorpus {
 public:
  ParallelCorpus() = default;
  ParallelCorpus(std::vector<SentencePair> pairs, Vocab src_vocab,
                 Vocab tgt_vocab, std::size_t dropped = 0);

  std::span<const SentencePair> pairs() const { return pairs_; }
  const SentencePair& operator[](std::size_t n) const { return pairs_[n]; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  const Vocab& src_vocab() const { return src_vocab_; }
  const Vocab& tgt_vocab() const { return tgt_vocab_; }
  // Pairs dropped during encoding (an empty side, or over the length limit).
  std::size_t dropped() const { return dropped_; }
  std::size_t target_tokens() const;

 private:
  std::vector<SentencePair> pairs_;
  Vocab src_vocab_{VocabSide::Source};
  Vocab tgt_vocab_{VocabSide::Target};
  std::size_t dropped_ = 0;
};

struct EncodeOptions {
  // 0 disables the filter; otherwise pairs with either side longer are dropped.
  std::size_t max_length = 0;
};

// Encodes line-aligned token sequences. Throws std::invalid_argument if the
// two sides have different line counts.
ParallelCorpus encode_corpus(std::span<const Sentence> src_lines,
                             std::span<const Sentence> tgt_lines,
                             const Vocab& src_vocab, const Vocab& tgt_vocab,
                             EncodeOptions options = {});

// Filter, then build both vocabularies from the surviving pairs, then encode.
// Vocabulary counts therefore equal the counts over the returned pairs.
ParallelCorpus build_parallel_corpus(std::span<const RawPair> raw,
                                     std::size_t src_min_count,
                                     std::size_t tgt_min_count,
                                     EncodeOptions options = {});

// Frequency-based partition of the target vocabulary into classes.
struct ClassPartition {
  std::vector<std::uint32_t> class_of;
  std::vector<std::vector<WordId>> members;
  std::vector<std::uint32_t> within_index;

  std::size_t num_classes() const { return members.size(); }
  std::size_t num_words() const { return class_of.size(); }
  bool operator==(const ClassPartition&) const = default;

  // Single class holding every word, in id order.
  static ClassPartition single(std::size_t vocab_size);
  // Rebuilds class_of/within_index from member lists.
  static ClassPartition from_members(std::vector<std::vector<WordId>> members,
                                     std::size_t vocab_size);
};

// Words are scanned by decreasing frequency (ties: smaller id first). A
// non-empty class is closed before the next word when its cumulative frequency
// has reached total/sqrt(|V|) or its size has reached sqrt(|V|).
ClassPartition build_classes(std::span<const std::uint64_t> freqs);
ClassPartition build_classes(const Vocab& tgt_vocab);

// Splits on ASCII whitespace.
Sentence tokenize(std::string_view line);

// `SOURCE ||| TARGET` per line. Throws FormatError with the 1-based line number.
std::vector<RawPair> read_triple_pipe(std::istream& is);
std::vector<RawPair> read_triple_pipe_file(const std::string& path);
// Line-aligned source and target files.
std::vector<RawPair> read_two_files(const std::string& src_path,
                                    const std::string& tgt_path);
// Swaps source and target sides in place.
void reverse_direction(std::vector<RawPair>& raw);

}  // namespace dwalign
