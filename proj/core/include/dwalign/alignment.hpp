#pragma once

#include <compare>
#include <cstdint>
#include <set>
#include <vector>

#include <Eigen/Core>

namespace dwalign {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Alignment posteriors for one sentence pair: J rows (target positions),
// I+1 columns (column 0 is NULL).
using PosteriorTable = RowMatrix;

// 0-based source and target positions; NULL links are never materialized.
struct Link {
  std::uint32_t src = 0;
  std::uint32_t tgt = 0;

  friend auto operator<=>(const Link& a, const Link& b) {
    if (auto c = a.tgt <=> b.tgt; c != 0) return c;
    return a.src <=> b.src;
  }
  friend bool operator==(const Link&, const Link&) = default;
};

// Sorted by target position, then source position.
using AlignmentLinks = std::vector<Link>;

struct GoldAlignment {
  std::set<Link> sure;
  std::set<Link> possible;  // contains every sure link
};

}  // namespace dwalign
