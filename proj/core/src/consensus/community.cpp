#include "segstitch/consensus/community.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>

#include "segstitch/rng.hpp"

namespace segstitch {

namespace {

constexpr double kTol = 1e-12;
constexpr int kMaxPasses = 32;
constexpr std::size_t kMaxBruteForceNodes = 12;

struct WGraph {
  int n = 0;
  std::vector<std::size_t> off;
  std::vector<int> adj;
  std::vector<double> w;
  std::vector<double> a;  // node weight in the penalty term
};

struct Problem {
  std::vector<std::uint32_t> ids;  // compact node -> original id
  WGraph graph;
  double gp = 0.0;  // penalty scale: gain = w(v, C) - gp * a_v * A_C
};

WGraph build_csr(int n, const std::vector<std::array<double, 3>>& edges, std::vector<double> a) {
  WGraph g;
  g.n = n;
  g.a = std::move(a);
  std::vector<std::size_t> deg(static_cast<std::size_t>(n), 0);
  for (const auto& e : edges) {
    ++deg[static_cast<std::size_t>(e[0])];
    ++deg[static_cast<std::size_t>(e[1])];
  }
  g.off.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int v = 0; v < n; ++v) g.off[v + 1] = g.off[v] + deg[v];
  g.adj.resize(g.off[n]);
  g.w.resize(g.off[n]);
  std::vector<std::size_t> fill(g.off.begin(), g.off.end() - 1);
  for (const auto& e : edges) {
    const auto u = static_cast<std::size_t>(e[0]);
    const auto v = static_cast<std::size_t>(e[1]);
    g.adj[fill[u]] = static_cast<int>(v);
    g.w[fill[u]++] = e[2];
    g.adj[fill[v]] = static_cast<int>(u);
    g.w[fill[v]++] = e[2];
  }
  return g;
}

Problem make_problem(const EdgeList& graph, const ResolutionConfig& cfg) {
  Problem p;
  for (const auto& e : graph) {
    if (!(e.w > 0.0) || !std::isfinite(e.w)) throw ParameterError("detect_communities: edge weights must be positive");
    if (e.i == e.j) throw ParameterError("detect_communities: self-loops are not allowed");
    p.ids.push_back(e.i);
    p.ids.push_back(e.j);
  }
  std::sort(p.ids.begin(), p.ids.end());
  p.ids.erase(std::unique(p.ids.begin(), p.ids.end()), p.ids.end());
  auto compact = [&](std::uint32_t id) {
    return static_cast<double>(std::lower_bound(p.ids.begin(), p.ids.end(), id) - p.ids.begin());
  };
  std::vector<std::array<double, 3>> edges;
  edges.reserve(graph.size());
  double total = 0.0;
  for (const auto& e : graph) {
    edges.push_back({compact(e.i), compact(e.j), e.w});
    total += e.w;
  }
  const int n = static_cast<int>(p.ids.size());
  std::vector<double> a(static_cast<std::size_t>(n), 1.0);
  if (cfg.objective == Objective::rb) {
    std::fill(a.begin(), a.end(), 0.0);
    for (const auto& e : edges) {
      a[static_cast<std::size_t>(e[0])] += e[2];
      a[static_cast<std::size_t>(e[1])] += e[2];
    }
    p.gp = cfg.gamma / (2.0 * total);
  } else {
    p.gp = cfg.gamma;
  }
  p.graph = build_csr(n, edges, std::move(a));
  return p;
}

// Quality up to a constant: sum_c [W_c - gp * A_c^2 / 2]. Labels in m must be
// below k.
double compact_quality(const Problem& p, const std::vector<int>& m, int k) {
  const auto& g = p.graph;
  std::vector<double> internal(static_cast<std::size_t>(k), 0.0);
  std::vector<double> mass(static_cast<std::size_t>(k), 0.0);
  for (int v = 0; v < g.n; ++v) {
    mass[m[v]] += g.a[v];
    for (auto e = g.off[v]; e < g.off[v + 1]; ++e)
      if (g.adj[e] > v && m[g.adj[e]] == m[v]) internal[m[v]] += g.w[e];
  }
  double q = 0.0;
  for (int c = 0; c < k; ++c) q += internal[c] - p.gp * mass[c] * mass[c] / 2.0;
  return q;
}

// Renumbers labels to 0..k-1 in order of first appearance; returns k.
int compact_labels(std::vector<int>& m) {
  std::vector<int> remap(m.size(), -1);
  int next = 0;
  for (auto& c : m) {
    auto& r = remap[static_cast<std::size_t>(c)];
    if (r < 0) r = next++;
    c = r;
  }
  return next;
}

class Optimizer {
 public:
  Optimizer(double gp, Rng& rng) : gp_(gp), rng_(rng) {}

  std::vector<int> run(const WGraph& base, std::vector<int> membership) {
    WGraph owned;
    const WGraph* g = &base;
    std::vector<int> node_of(static_cast<std::size_t>(base.n));
    std::iota(node_of.begin(), node_of.end(), 0);
    auto& m = membership;
    for (;;) {
      move_nodes(*g, m);
      const int communities = compact_labels(m);
      if (communities == g->n) break;
      std::vector<int> r = refine(*g, m);
      int refined = compact_labels(r);
      if (refined == g->n) {
        r = m;
        refined = communities;
      }
      std::vector<int> next_m(static_cast<std::size_t>(refined));
      for (int v = 0; v < g->n; ++v) next_m[static_cast<std::size_t>(r[v])] = m[static_cast<std::size_t>(v)];
      for (auto& x : node_of) x = r[static_cast<std::size_t>(x)];
      owned = aggregate(*g, r, refined);
      g = &owned;
      m = std::move(next_m);
    }
    std::vector<int> out(node_of.size());
    for (std::size_t v = 0; v < node_of.size(); ++v) out[v] = m[static_cast<std::size_t>(node_of[v])];
    return out;
  }

 private:
  std::vector<int> shuffled(int n) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(order[i], order[uniform_int(rng_, 0, i)]);
    return order;
  }

  void move_nodes(const WGraph& g, std::vector<int>& m) {
    const auto n = static_cast<std::size_t>(g.n);
    std::vector<double> comm_a(n, 0.0);
    std::vector<int> comm_size(n, 0);
    for (std::size_t v = 0; v < n; ++v) {
      comm_a[m[v]] += g.a[v];
      ++comm_size[m[v]];
    }
    std::vector<int> empties;
    for (int c = static_cast<int>(n) - 1; c >= 0; --c)
      if (comm_size[c] == 0) empties.push_back(c);

    std::deque<int> queue;
    std::vector<char> queued(n, 1);
    for (int v : shuffled(g.n)) queue.push_back(v);
    std::vector<double> neigh(n, 0.0);
    std::vector<char> seen(n, 0);
    std::vector<int> touched;

    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      queued[v] = 0;
      const int from = m[v];
      touched.clear();
      for (auto e = g.off[v]; e < g.off[v + 1]; ++e) {
        const int u = g.adj[e];
        if (u == v) continue;
        const int c = m[u];
        if (!seen[c]) {
          seen[c] = 1;
          touched.push_back(c);
        }
        neigh[c] += g.w[e];
      }
      comm_a[from] -= g.a[v];
      --comm_size[from];

      int best = from;
      double best_gain = neigh[from] - gp_ * g.a[v] * comm_a[from];
      for (int c : touched) {
        if (c == from) continue;
        const double gain = neigh[c] - gp_ * g.a[v] * comm_a[c];
        const double tol = kTol * std::max(1.0, std::abs(best_gain));
        if (gain > best_gain + tol || (std::abs(gain - best_gain) <= tol && best != from && c < best)) {
          best = c;
          best_gain = gain;
        }
      }
      if (comm_size[from] > 0 && 0.0 > best_gain + kTol * std::max(1.0, std::abs(best_gain))) {
        while (comm_size[empties.back()] != 0) empties.pop_back();
        best = empties.back();
        empties.pop_back();
      }

      m[v] = best;
      comm_a[best] += g.a[v];
      ++comm_size[best];
      if (best != from) {
        if (comm_size[from] == 0) empties.push_back(from);
        for (auto e = g.off[v]; e < g.off[v + 1]; ++e) {
          const int u = g.adj[e];
          if (m[u] != best && !queued[u]) {
            queued[u] = 1;
            queue.push_back(u);
          }
        }
      }
      for (int c : touched) {
        neigh[c] = 0.0;
        seen[c] = 0;
      }
    }
  }

  // Greedy deterministic refinement: singletons merge within their community
  // into the well-connected sub-community with the largest positive gain.
  std::vector<int> refine(const WGraph& g, const std::vector<int>& m) {
    const auto n = static_cast<std::size_t>(g.n);
    std::vector<int> r(n);
    std::iota(r.begin(), r.end(), 0);
    std::vector<double> ra(g.a);
    std::vector<double> ext(n, 0.0);
    std::vector<int> size(n, 1);
    std::vector<double> ca(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      ca[m[v]] += g.a[v];
      for (auto e = g.off[v]; e < g.off[v + 1]; ++e)
        if (g.adj[e] != static_cast<int>(v) && m[g.adj[e]] == m[v]) ext[v] += g.w[e];
    }
    std::vector<double> neigh(n, 0.0);
    std::vector<char> seen(n, 0);
    std::vector<int> touched;

    for (int v : shuffled(g.n)) {
      if (size[r[v]] > 1) continue;
      const int c = m[v];
      if (ext[v] < gp_ * g.a[v] * (ca[c] - g.a[v])) continue;
      touched.clear();
      for (auto e = g.off[v]; e < g.off[v + 1]; ++e) {
        const int u = g.adj[e];
        if (u == v || m[u] != c) continue;
        const int s = r[u];
        if (!seen[s]) {
          seen[s] = 1;
          touched.push_back(s);
        }
        neigh[s] += g.w[e];
      }
      int best = -1;
      double best_gain = 0.0;
      for (int s : touched) {
        if (s == r[v]) continue;
        if (ext[s] < gp_ * ra[s] * (ca[c] - ra[s])) continue;
        const double gain = neigh[s] - gp_ * g.a[v] * ra[s];
        if (gain > best_gain + kTol * std::max(1.0, std::abs(best_gain)) ||
            (best >= 0 && std::abs(gain - best_gain) <= kTol * std::max(1.0, std::abs(best_gain)) && s < best)) {
          best = s;
          best_gain = gain;
        }
      }
      if (best >= 0) {
        const int own = r[v];
        ext[best] = ext[best] + ext[own] - 2.0 * neigh[best];
        ra[best] += g.a[v];
        ++size[best];
        size[own] = 0;
        ra[own] = 0.0;
        ext[own] = 0.0;
        r[v] = best;
      }
      for (int s : touched) {
        neigh[s] = 0.0;
        seen[s] = 0;
      }
    }
    return r;
  }

  static WGraph aggregate(const WGraph& g, const std::vector<int>& r, int k) {
    std::vector<double> a(static_cast<std::size_t>(k), 0.0);
    std::map<std::pair<int, int>, double> weights;
    for (int v = 0; v < g.n; ++v) {
      a[r[v]] += g.a[v];
      for (auto e = g.off[v]; e < g.off[v + 1]; ++e) {
        const int u = g.adj[e];
        if (v < u && r[v] != r[u]) weights[std::minmax(r[v], r[u])] += g.w[e];
      }
    }
    std::vector<std::array<double, 3>> edges;
    edges.reserve(weights.size());
    for (const auto& [key, w] : weights)
      edges.push_back({static_cast<double>(key.first), static_cast<double>(key.second), w});
    return build_csr(k, edges, std::move(a));
  }

  double gp_;
  Rng& rng_;
};

CommunityLabels to_labels(const Problem& p, const std::vector<int>& membership, std::size_t node_count) {
  std::size_t size = node_count;
  if (size == 0) size = static_cast<std::size_t>(p.ids.back()) + 1;
  if (size <= p.ids.back()) throw ParameterError("detect_communities: node_count is smaller than the largest id");
  CommunityLabels out;
  out.assignment.assign(size, 0);
  // Nodes are visited in ascending id order, so first appearance = smallest id.
  std::vector<std::int32_t> remap(membership.size(), 0);
  for (std::size_t v = 0; v < p.ids.size(); ++v) {
    auto& label = remap[static_cast<std::size_t>(membership[v])];
    if (label == 0) label = ++out.communities;
    out.assignment[p.ids[v]] = label;
  }
  return out;
}

}  // namespace

LabelMap CommunityLabels::to_label_map(int height, int width) const {
  const auto n = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  if (assignment.size() < n) throw DimensionError("CommunityLabels: fewer entries than pixels");
  LabelMap out(height, width, 0);
  std::copy(assignment.begin(), assignment.begin() + static_cast<std::ptrdiff_t>(n), out.storage().begin());
  return out;
}

double partition_quality(const EdgeList& graph, const std::vector<std::int32_t>& assignment,
                         const ResolutionConfig& cfg) {
  std::map<std::int32_t, double> internal;
  std::map<std::int32_t, double> mass;
  std::vector<std::uint32_t> nodes;
  double total = 0.0;
  auto label = [&](std::uint32_t id) {
    if (id >= assignment.size()) throw DimensionError("partition_quality: id outside the assignment");
    return assignment[id];
  };
  for (const auto& e : graph) {
    total += e.w;
    const auto ci = label(e.i);
    const auto cj = label(e.j);
    if (ci == cj) internal[ci] += e.w;
    nodes.push_back(e.i);
    nodes.push_back(e.j);
    if (cfg.objective == Objective::rb) {
      mass[ci] += e.w;
      mass[cj] += e.w;
    }
  }
  if (cfg.objective == Objective::cpm) {
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    for (auto v : nodes) mass[label(v)] += 1.0;
  }
  double q = 0.0;
  if (cfg.objective == Objective::cpm) {
    for (const auto& [c, n] : mass) q -= cfg.gamma * n * (n - 1.0) / 2.0;
    for (const auto& [c, w] : internal) q += w;
  } else {
    if (total <= 0.0) return 0.0;
    for (const auto& [c, s] : mass) q -= cfg.gamma * (s / (2.0 * total)) * (s / (2.0 * total));
    for (const auto& [c, w] : internal) q += w / total;
  }
  return q;
}

CommunityLabels detect_communities(const EdgeList& graph, const ResolutionConfig& cfg, std::uint64_t seed,
                                   std::size_t node_count) {
  if (graph.empty()) throw ParameterError("detect_communities: empty graph");
  cfg.validate();
  const Problem p = make_problem(graph, cfg);
  std::vector<int> best;
  double best_q = 0.0;
  for (int run = 0; run < cfg.restarts; ++run) {
    Rng rng = make_rng(seed, "community", static_cast<std::uint64_t>(run));
    Optimizer opt(p.gp, rng);
    std::vector<int> membership(static_cast<std::size_t>(p.graph.n));
    std::iota(membership.begin(), membership.end(), 0);
    int k = p.graph.n;
    for (int pass = 0; pass < kMaxPasses; ++pass) {
      auto next = opt.run(p.graph, membership);
      k = compact_labels(next);
      if (next == membership) break;
      membership = std::move(next);
    }
    const double q = compact_quality(p, membership, k);
    if (best.empty() || q > best_q + kTol * std::max(1.0, std::abs(best_q))) {
      best = std::move(membership);
      best_q = q;
    }
  }
  return to_labels(p, best, node_count);
}

CommunityLabels brute_force_communities(const EdgeList& graph, const ResolutionConfig& cfg,
                                        std::size_t node_count) {
  if (graph.empty()) throw ParameterError("brute_force_communities: empty graph");
  cfg.validate();
  const Problem p = make_problem(graph, cfg);
  const auto n = static_cast<std::size_t>(p.graph.n);
  if (n > kMaxBruteForceNodes) throw ParameterError("brute_force_communities: too many nodes");

  std::vector<int> m(n, 0);
  std::vector<int> best;
  double best_q = -std::numeric_limits<double>::infinity();
  // Restricted growth strings enumerate each set partition once.
  auto recurse = [&](auto&& self, std::size_t v, int k) -> void {
    if (v == n) {
      const double q = compact_quality(p, m, k);
      if (best.empty() || q > best_q + kTol * std::max(1.0, std::abs(best_q))) {
        best_q = q;
        best = m;
      }
      return;
    }
    for (int c = 0; c <= k; ++c) {
      m[v] = c;
      self(self, v + 1, std::max(k, c + 1));
    }
  };
  recurse(recurse, 0, 0);
  return to_labels(p, best, node_count);
}

}  // namespace segstitch
