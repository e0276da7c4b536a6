#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dwalign/alignment.hpp"
#include "dwalign/corpus.hpp"
#include "dwalign/dwa.hpp"
#include "dwalign/fa_align.hpp"

namespace dwalign::eval {

struct AerCounts {
  std::size_t predicted = 0;     // |A|
  std::size_t sure = 0;          // |S|
  std::size_t hit_sure = 0;      // |A n S|
  std::size_t hit_possible = 0;  // |A n P|

  AerCounts& operator+=(const AerCounts& o);
  // 1 - (|A n S| + |A n P|) / (|A| + |S|); 0 when |A| + |S| = 0.
  double rate() const;
};

// Throws std::invalid_argument unless gold.sure is a subset of gold.possible.
AerCounts aer_counts(const AlignmentLinks& predicted, const GoldAlignment& gold);
double aer(const AlignmentLinks& predicted, const GoldAlignment& gold);
// Aggregates counts over all pairs (not a mean of per-sentence rates).
double corpus_aer(std::span<const AlignmentLinks> predicted,
                  std::span<const GoldAlignment> gold);

// Pharaoh format: space-separated `i-j`, 0-based, increasing j.
std::string format_pharaoh(const AlignmentLinks& links);
AlignmentLinks parse_pharaoh(const std::string& line);
std::vector<AlignmentLinks> read_pharaoh(std::istream& is);

// `pair_index src_pos tgt_pos S|P` per line; returns `num_pairs` entries (or
// as many as the largest index requires when num_pairs is 0). Sure links are
// also added to the possible set.
std::vector<GoldAlignment> read_gold(std::istream& is, std::size_t num_pairs = 0);

// sum_f p(f | e alone) r_f.
Eigen::VectorXd expected_translation_repr(WordId e, const dwa::Model& model);

struct Neighbor {
  WordId id = 0;
  double similarity = 0.0;
};

// Top-n rows of `embeddings` by cosine similarity to `query`, ties by id.
// Zero-norm vectors score 0.
std::vector<Neighbor> nearest_neighbors(const Eigen::VectorXd& query,
                                        const RowMatrix& embeddings, std::size_t n);

struct LogLikelihood {
  double total = 0.0;
  double per_token = 0.0;
};

LogLikelihood corpus_loglik(const ParallelCorpus& corpus, const fa::FaParams& params);
LogLikelihood corpus_loglik(const ParallelCorpus& corpus, const dwa::Model& model);

}  // namespace dwalign::eval
