#include "dwalign/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "dwalign/error.hpp"

namespace dwalign::eval {

AerCounts& AerCounts::operator+=(const AerCounts& o) {
  predicted += o.predicted;
  sure += o.sure;
  hit_sure += o.hit_sure;
  hit_possible += o.hit_possible;
  return *this;
}

double AerCounts::rate() const {
  const std::size_t denom = predicted + sure;
  if (denom == 0) return 0.0;
  return 1.0 - static_cast<double>(hit_sure + hit_possible) / static_cast<double>(denom);
}

AerCounts aer_counts(const AlignmentLinks& predicted, const GoldAlignment& gold) {
  if (!std::includes(gold.possible.begin(), gold.possible.end(), gold.sure.begin(),
                     gold.sure.end()))
    throw std::invalid_argument("gold sure links are not a subset of possible links");
  AerCounts c;
  std::vector<Link> unique(predicted.begin(), predicted.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  c.predicted = unique.size();
  c.sure = gold.sure.size();
  for (const auto& l : unique) {
    if (gold.sure.contains(l)) ++c.hit_sure;
    if (gold.possible.contains(l)) ++c.hit_possible;
  }
  return c;
}

double aer(const AlignmentLinks& predicted, const GoldAlignment& gold) {
  return aer_counts(predicted, gold).rate();
}

double corpus_aer(std::span<const AlignmentLinks> predicted,
                  std::span<const GoldAlignment> gold) {
  if (predicted.size() != gold.size())
    throw std::invalid_argument("prediction has " + std::to_string(predicted.size()) +
                                " pairs but gold has " + std::to_string(gold.size()));
  AerCounts total;
  for (std::size_t n = 0; n < predicted.size(); ++n) total += aer_counts(predicted[n], gold[n]);
  return total.rate();
}

std::string format_pharaoh(const AlignmentLinks& links) {
  std::string out;
  for (std::size_t n = 0; n < links.size(); ++n) {
    if (n) out += ' ';
    out += std::to_string(links[n].src);
    out += '-';
    out += std::to_string(links[n].tgt);
  }
  return out;
}

namespace {

std::uint32_t parse_index(std::string_view s, const std::string& context) {
  std::uint32_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw FormatError(context + ": bad position '" + std::string(s) + "'");
  return v;
}

}  // namespace

AlignmentLinks parse_pharaoh(const std::string& line) {
  AlignmentLinks links;
  for (const auto& token : tokenize(line)) {
    const auto dash = token.find('-');
    if (dash == std::string::npos)
      throw FormatError("bad alignment link '" + token + "'");
    const std::string_view view(token);
    links.push_back({parse_index(view.substr(0, dash), "alignment link"),
                     parse_index(view.substr(dash + 1), "alignment link")});
  }
  std::sort(links.begin(), links.end());
  return links;
}

std::vector<AlignmentLinks> read_pharaoh(std::istream& is) {
  std::vector<AlignmentLinks> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(is, line);) {
    ++line_no;
    try {
      out.push_back(parse_pharaoh(line));
    } catch (const FormatError& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<GoldAlignment> read_gold(std::istream& is, std::size_t num_pairs) {
  std::vector<GoldAlignment> gold(num_pairs);
  std::size_t line_no = 0;
  for (std::string line; std::getline(is, line);) {
    ++line_no;
    const auto fields = tokenize(line);
    if (fields.empty()) continue;
    const std::string where = "gold line " + std::to_string(line_no);
    if (fields.size() != 4 || (fields[3] != "S" && fields[3] != "P"))
      throw FormatError(where + ": expected 'pair_index src_pos tgt_pos S|P'");
    const auto pair = parse_index(fields[0], where);
    const Link link{parse_index(fields[1], where), parse_index(fields[2], where)};
    if (pair >= gold.size()) {
      if (num_pairs != 0)
        throw FormatError(where + ": pair index " + fields[0] + " beyond " +
                          std::to_string(num_pairs) + " pairs");
      gold.resize(pair + 1);
    }
    if (fields[3] == "S") gold[pair].sure.insert(link);
    gold[pair].possible.insert(link);
  }
  return gold;
}

Eigen::VectorXd expected_translation_repr(WordId e, const dwa::Model& model) {
  lbl::TranslationScorer scorer(model.params, model.classes,
                                lbl::word_context(e, model.params));
  return model.params.tgt_embed.transpose() * scorer.distribution();
}

std::vector<Neighbor> nearest_neighbors(const Eigen::VectorXd& query,
                                        const RowMatrix& embeddings, std::size_t n) {
  if (n == 0) throw std::invalid_argument("n must be >= 1");
  if (embeddings.rows() == 0) throw std::invalid_argument("no embeddings to search");
  const double qn = query.norm();
  std::vector<Neighbor> all(static_cast<std::size_t>(embeddings.rows()));
  for (Eigen::Index r = 0; r < embeddings.rows(); ++r) {
    const double rn = embeddings.row(r).norm();
    const double sim =
        (qn == 0.0 || rn == 0.0) ? 0.0 : embeddings.row(r).dot(query) / (qn * rn);
    all[static_cast<std::size_t>(r)] = {static_cast<WordId>(r), sim};
  }
  const std::size_t take = std::min(n, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<long>(take), all.end(),
                    [](const Neighbor& a, const Neighbor& b) {
                      if (a.similarity != b.similarity) return a.similarity > b.similarity;
                      return a.id < b.id;
                    });
  all.resize(take);
  return all;
}

LogLikelihood corpus_loglik(const ParallelCorpus& corpus, const fa::FaParams& params) {
  LogLikelihood ll;
  for (const auto& p : corpus.pairs()) ll.total += fa::sentence_loglik(p, params);
  const auto tokens = corpus.target_tokens();
  ll.per_token = tokens ? ll.total / static_cast<double>(tokens) : 0.0;
  return ll;
}

LogLikelihood corpus_loglik(const ParallelCorpus& corpus, const dwa::Model& model) {
  LogLikelihood ll;
  for (const auto& p : corpus.pairs()) ll.total += dwa::sentence_loglik(p, model);
  const auto tokens = corpus.target_tokens();
  ll.per_token = tokens ? ll.total / static_cast<double>(tokens) : 0.0;
  return ll;
}

}  // namespace dwalign::eval
