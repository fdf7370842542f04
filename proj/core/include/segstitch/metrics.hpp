#pragma once

#include <cstdint>

#include "segstitch/scene.hpp"

namespace segstitch {

/// Adjusted Rand index between two labelings of the same pixels. Background
/// (label 0) counts as an ordinary cluster. Two single-cluster labelings score 1.
double adjusted_rand_index(const LabelMap& a, const LabelMap& b);

/// 2 I(A;B) / (H(A) + H(B)) over the pixels where mask is non-zero (all pixels
/// when mask is empty). Two single-cluster labelings score 1.
double normalized_mutual_information(const LabelMap& a, const LabelMap& b, const Array2D<std::uint8_t>& mask = {});

/// As above, restricted to pixels that are foreground (label > 0) in both.
/// Returns 0 when no pixel qualifies.
double foreground_nmi(const LabelMap& a, const LabelMap& b);

/// Number of non-zero labels owning at least min_px pixels.
int count_segments(const LabelMap& labels, int min_px);

/// For every truth instance, the number of predicted foreground segments that
/// each cover at least min_fraction of it, minus one (floored at zero), summed.
int boundary_split_count(const LabelMap& truth, const LabelMap& predicted, double min_fraction = 0.1);

/// Relabels a map so non-zero labels run contiguously from 1 in order of first
/// appearance in row-major scan; 0 stays 0.
LabelMap relabel_sequential(const LabelMap& labels);

}  // namespace segstitch
