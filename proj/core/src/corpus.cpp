#include "dwalign/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "dwalign/error.hpp"

namespace dwalign {

namespace {

constexpr std::string_view kVocabHeader = "#dwalign-vocab v1";
constexpr std::string_view kSeparator = " ||| ";

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_reserved(std::string_view token) {
  return token == kUnkToken || token == kNullToken;
}

}  // namespace

Vocab::Vocab(VocabSide side) {
  if (side == VocabSide::Source) null_id_ = add(std::string(kNullToken), 0);
  unk_id_ = add(std::string(kUnkToken), 0);
}

WordId Vocab::add(std::string token, std::uint64_t freq) {
  const auto id = static_cast<WordId>(id_to_token_.size());
  auto [it, inserted] = token_to_id_.emplace(token, id);
  if (!inserted)
    throw FormatError("duplicate vocabulary token '" + token + "'");
  id_to_token_.push_back(std::move(token));
  freq_.push_back(freq);
  return id;
}

Vocab Vocab::build(std::span<const Sentence> sentences, std::size_t min_count,
                   VocabSide side) {
  if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");

  struct Entry {
    std::uint64_t count = 0;
    std::size_t first_seen = 0;
  };
  std::unordered_map<std::string, Entry, StringHash, std::equal_to<>> counts;
  std::vector<std::string_view> order;
  std::uint64_t reserved_count = 0;
  for (const auto& sentence : sentences) {
    for (const auto& token : sentence) {
      if (is_reserved(token)) {
        ++reserved_count;
        continue;
      }
      auto it = counts.find(token);
      if (it == counts.end()) {
        it = counts.emplace(token, Entry{0, order.size()}).first;
        order.push_back(it->first);
      }
      ++it->second.count;
    }
  }

  std::vector<std::string_view> kept;
  Vocab vocab(side);
  std::uint64_t unk_count = reserved_count;
  for (auto token : order) {
    const auto count = counts.find(token)->second.count;
    if (count >= min_count)
      kept.push_back(token);
    else
      unk_count += count;
  }
  std::stable_sort(kept.begin(), kept.end(), [&](auto a, auto b) {
    return counts.find(a)->second.count > counts.find(b)->second.count;
  });
  for (auto token : kept)
    vocab.add(std::string(token), counts.find(token)->second.count);
  vocab.freq_[vocab.unk_id_] = unk_count;
  return vocab;
}

Vocab Vocab::from_entries(
    std::span<const std::pair<std::string, std::uint64_t>> entries) {
  Vocab vocab(VocabSide::Target);
  vocab.token_to_id_.clear();
  vocab.id_to_token_.clear();
  vocab.freq_.clear();
  bool has_unk = false;
  for (const auto& [token, freq] : entries) {
    const WordId id = vocab.add(token, freq);
    if (token == kUnkToken) {
      vocab.unk_id_ = id;
      has_unk = true;
    } else if (token == kNullToken) {
      vocab.null_id_ = id;
    }
  }
  if (!has_unk) throw FormatError("vocabulary has no <unk> entry");
  return vocab;
}

WordId Vocab::null() const {
  if (!null_id_) throw std::logic_error("target vocabulary has no NULL word");
  return *null_id_;
}

WordId Vocab::id(std::string_view token) const {
  return find(token).value_or(unk_id_);
}

std::optional<WordId> Vocab::find(std::string_view token) const {
  if (token == kNullToken) return std::nullopt;
  auto it = token_to_id_.find(token);
  if (it == token_to_id_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Vocab::total_count() const {
  return std::accumulate(freq_.begin(), freq_.end(), std::uint64_t{0});
}

std::vector<WordId> Vocab::encode(std::span<const std::string> tokens) const {
  std::vector<WordId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

Sentence Vocab::decode(std::span<const WordId> ids) const {
  Sentence tokens;
  tokens.reserve(ids.size());
  for (auto i : ids) tokens.push_back(token(i));
  return tokens;
}

void Vocab::write(std::ostream& os) const {
  os << kVocabHeader << '\n';
  for (std::size_t i = 0; i < size(); ++i)
    os << id_to_token_[i] << '\t' << freq_[i] << '\n';
}

Vocab Vocab::read(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kVocabHeader)
    throw FormatError("missing vocabulary header '" + std::string(kVocabHeader) +
                      "'");
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos || tab == 0)
      throw FormatError("vocabulary line " + std::to_string(line_no) +
                        ": expected token<TAB>freq");
    std::uint64_t freq = 0;
    try {
      std::size_t used = 0;
      freq = std::stoull(line.substr(tab + 1), &used);
      if (used != line.size() - tab - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw FormatError("vocabulary line " + std::to_string(line_no) +
                        ": bad frequency");
    }
    entries.emplace_back(line.substr(0, tab), freq);
  }
  return from_entries(entries);
}

ParallelCorpus::ParallelCorpus(std::vector<SentencePair> pairs, Vocab src_vocab,
                               Vocab tgt_vocab, std::size_t dropped)
    : pairs_(std::move(pairs)),
      src_vocab_(std::move(src_vocab)),
      tgt_vocab_(std::move(tgt_vocab)),
      dropped_(dropped) {
  if (!src_vocab_.is_source())
    throw std::invalid_argument("source vocabulary lacks a NULL word");
  for (const auto& p : pairs_) {
    if (p.src.empty() || p.tgt.empty())
      throw std::invalid_argument("sentence pair with an empty side");
    for (auto id : p.src)
      if (id >= src_vocab_.size() || id == src_vocab_.null())
        throw std::invalid_argument("invalid source id in sentence pair");
    for (auto id : p.tgt)
      if (id >= tgt_vocab_.size())
        throw std::invalid_argument("invalid target id in sentence pair");
  }
}

std::size_t ParallelCorpus::target_tokens() const {
  std::size_t n = 0;
  for (const auto& p : pairs_) n += p.tgt.size();
  return n;
}

namespace {

bool keep_pair(std::size_t src_len, std::size_t tgt_len,
               const EncodeOptions& options) {
  if (src_len == 0 || tgt_len == 0) return false;
  if (options.max_length != 0 &&
      (src_len > options.max_length || tgt_len > options.max_length))
    return false;
  return true;
}

}  // namespace

ParallelCorpus encode_corpus(std::span<const Sentence> src_lines,
                             std::span<const Sentence> tgt_lines,
                             const Vocab& src_vocab, const Vocab& tgt_vocab,
                             EncodeOptions options) {
  if (src_lines.size() != tgt_lines.size())
    throw std::invalid_argument(
        "line count mismatch: source has " + std::to_string(src_lines.size()) +
        " lines, target has " + std::to_string(tgt_lines.size()));
  std::vector<SentencePair> pairs;
  pairs.reserve(src_lines.size());
  std::size_t dropped = 0;
  for (std::size_t n = 0; n < src_lines.size(); ++n) {
    if (!keep_pair(src_lines[n].size(), tgt_lines[n].size(), options)) {
      ++dropped;
      continue;
    }
    pairs.push_back({src_vocab.encode(src_lines[n]), tgt_vocab.encode(tgt_lines[n])});
  }
  return ParallelCorpus(std::move(pairs), src_vocab, tgt_vocab, dropped);
}

ParallelCorpus build_parallel_corpus(std::span<const RawPair> raw,
                                     std::size_t src_min_count,
                                     std::size_t tgt_min_count,
                                     EncodeOptions options) {
  std::vector<Sentence> src, tgt;
  src.reserve(raw.size());
  tgt.reserve(raw.size());
  std::size_t dropped = 0;
  for (const auto& p : raw) {
    if (!keep_pair(p.src.size(), p.tgt.size(), options)) {
      ++dropped;
      continue;
    }
    src.push_back(p.src);
    tgt.push_back(p.tgt);
  }
  auto src_vocab = Vocab::build(src, src_min_count, VocabSide::Source);
  auto tgt_vocab = Vocab::build(tgt, tgt_min_count, VocabSide::Target);
  auto corpus = encode_corpus(src, tgt, src_vocab, tgt_vocab, options);
  std::vector<SentencePair> pairs(corpus.pairs().begin(), corpus.pairs().end());
  return ParallelCorpus(std::move(pairs), std::move(src_vocab),
                        std::move(tgt_vocab), dropped);
}

ClassPartition ClassPartition::single(std::size_t vocab_size) {
  std::vector<WordId> all(vocab_size);
  std::iota(all.begin(), all.end(), WordId{0});
  return from_members({std::move(all)}, vocab_size);
}

ClassPartition ClassPartition::from_members(
    std::vector<std::vector<WordId>> members, std::size_t vocab_size) {
  ClassPartition p;
  constexpr auto kUnset = static_cast<std::uint32_t>(-1);
  p.class_of.assign(vocab_size, kUnset);
  p.within_index.assign(vocab_size, kUnset);
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c].empty()) throw FormatError("empty word class");
    for (std::size_t k = 0; k < members[c].size(); ++k) {
      const auto w = members[c][k];
      if (w >= vocab_size || p.class_of[w] != kUnset)
        throw FormatError("word classes do not partition the vocabulary");
      p.class_of[w] = static_cast<std::uint32_t>(c);
      p.within_index[w] = static_cast<std::uint32_t>(k);
    }
  }
  if (std::find(p.class_of.begin(), p.class_of.end(), kUnset) != p.class_of.end())
    throw FormatError("word classes do not cover the vocabulary");
  p.members = std::move(members);
  return p;
}

ClassPartition build_classes(std::span<const std::uint64_t> freqs) {
  if (freqs.empty()) throw std::invalid_argument("cannot class an empty vocabulary");
  const std::size_t n = freqs.size();
  std::vector<WordId> order(n);
  std::iota(order.begin(), order.end(), WordId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](WordId a, WordId b) { return freqs[a] > freqs[b]; });

  const double total = static_cast<double>(
      std::accumulate(freqs.begin(), freqs.end(), std::uint64_t{0}));
  const double root = std::sqrt(static_cast<double>(n));
  const double freq_limit = total / root;

  std::vector<std::vector<WordId>> members;
  std::vector<WordId> current;
  double mass = 0.0;
  for (auto w : order) {
    if (!current.empty() &&
        (mass >= freq_limit || static_cast<double>(current.size()) >= root)) {
      members.push_back(std::move(current));
      current.clear();
      mass = 0.0;
    }
    current.push_back(w);
    mass += static_cast<double>(freqs[w]);
  }
  members.push_back(std::move(current));
  return ClassPartition::from_members(std::move(members), n);
}

ClassPartition build_classes(const Vocab& tgt_vocab) {
  return build_classes(tgt_vocab.freqs());
}

Sentence tokenize(std::string_view line) {
  Sentence tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) tokens.emplace_back(line.substr(start, i - start));
  }
  return tokens;
}

std::vector<RawPair> read_triple_pipe(std::istream& is) {
  std::vector<RawPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto first = line.find(kSeparator);
    if (first == std::string::npos ||
        line.find(kSeparator, first + 1) != std::string::npos)
      throw FormatError("line " + std::to_string(line_no) +
                        ": expected exactly one ' ||| ' separator");
    std::string_view view(line);
    pairs.push_back({tokenize(view.substr(0, first)),
                     tokenize(view.substr(first + kSeparator.size()))});
  }
  return pairs;
}

std::vector<RawPair> read_triple_pipe_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return read_triple_pipe(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::vector<RawPair> read_two_files(const std::string& src_path,
                                    const std::string& tgt_path) {
  std::ifstream src(src_path), tgt(tgt_path);
  if (!src) throw FormatError("cannot open " + src_path);
  if (!tgt) throw FormatError("cannot open " + tgt_path);
  std::vector<Sentence> src_lines, tgt_lines;
  for (std::string line; std::getline(src, line);) src_lines.push_back(tokenize(line));
  for (std::string line; std::getline(tgt, line);) tgt_lines.push_back(tokenize(line));
  if (src_lines.size() != tgt_lines.size())
    throw FormatError("line count mismatch: " + src_path + " has " +
                      std::to_string(src_lines.size()) + " lines, " + tgt_path +
                      " has " + std::to_string(tgt_lines.size()));
  std::vector<RawPair> pairs(src_lines.size());
  for (std::size_t n = 0; n < pairs.size(); ++n)
    pairs[n] = {std::move(src_lines[n]), std::move(tgt_lines[n])};
  return pairs;
}

void reverse_direction(std::vector<RawPair>& raw) {
  for (auto& p : raw) std::swap(p.src, p.tgt);
}

}  // namespace dwalign
