#pragma once

// Reference computations that deliberately avoid the library's own code paths:
// exhaustive enumeration of alignments and central finite differences.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dwalign/alignment.hpp"
#include "dwalign/corpus.hpp"
#include "dwalign/dwa.hpp"
#include "dwalign/fa_align.hpp"

namespace dwalign::testkit {

// Prior straight from its definition, normalizer summed explicitly.
double prior_by_definition(std::size_t i, std::size_t j, std::size_t src_len,
                           std::size_t tgt_len, double lambda, double p0);

struct EnumerationResult {
  double loglik = 0.0;
  PosteriorTable posteriors;
  std::size_t alignments = 0;
};

// Sums p(a, f | e) over all (I+1)^J alignment vectors.
EnumerationResult enumerate_alignments(const SentencePair& pair, const fa::FaParams& params);

// argmax over all alignment vectors of p(a, f | e) with a per-link score;
// decoding is independent per j, but the oracle does not exploit that.
AlignmentLinks brute_force_viterbi(std::size_t src_len, std::size_t tgt_len, double lambda,
                                   double p0,
                                   const std::function<double(std::size_t, std::size_t)>& score);

// (f(x + h) - f(x - h)) / 2h with x restored afterwards.
double central_difference(double& x, double h, const std::function<double()>& f);

struct GradientCheck {
  std::size_t checked = 0;
  std::size_t failed = 0;
  double worst = 0.0;
  std::string worst_where;
};

// Compares every coordinate of sentence_gradient (and the lambda gradient)
// with central differences of sentence_q. Coordinates where both values are
// below `skip` in magnitude are not counted.
GradientCheck check_sentence_gradient(const SentencePair& pair, const PosteriorTable& gamma,
                                      dwa::Model model, double step = 1e-5,
                                      double tolerance = 1e-4, double skip = 1e-8);

}  // namespace dwalign::testkit
