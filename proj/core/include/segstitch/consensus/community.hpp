#pragma once

#include <cstdint>
#include <vector>

#include "segstitch/consensus/graph.hpp"

namespace segstitch {

/// assignment[id] is the community of node id, contiguous from 1 in order of
/// each community's smallest node id; ids absent from the graph map to 0.
struct CommunityLabels {
  std::vector<std::int32_t> assignment;
  int communities = 0;

  LabelMap to_label_map(int height, int width) const;
};

/// CPM: sum_c [W_c - gamma n_c (n_c - 1) / 2].
/// RB:  sum_c [W_c / W - gamma (s_c / 2W)^2], the weighted modularity with
/// resolution gamma (s_c = sum of node strengths in c).
/// Nodes are the ids appearing in the graph.
double partition_quality(const EdgeList& graph, const std::vector<std::int32_t>& assignment,
                         const ResolutionConfig& cfg);

/// Leiden-style optimization (local moving, refinement, aggregation) repeated
/// until the partition is stable, restarted cfg.restarts times with
/// independent streams; the best partition wins, ties to the earliest run. node_count 0 sizes the assignment by the
/// largest id. Throws ParameterError on an empty graph.
CommunityLabels detect_communities(const EdgeList& graph, const ResolutionConfig& cfg, std::uint64_t seed,
                                   std::size_t node_count = 0);

/// Exhaustive optimum over all set partitions of the graph's nodes (at most 12).
CommunityLabels brute_force_communities(const EdgeList& graph, const ResolutionConfig& cfg,
                                        std::size_t node_count = 0);

}  // namespace segstitch
