#include "netflow/graph.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "netflow/error.hpp"
#include "netflow/io.hpp"
#include "netflow/rng.hpp"

namespace netflow {

Network::Network(int node_count, std::vector<Edge> edges) : n_(node_count) {
  if (node_count <= 0) throw InvalidArgument("network needs at least one node");
  for (auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n_ || v >= n_)
      throw InvalidArgument("edge (" + std::to_string(u) + "," + std::to_string(v) +
                            ") out of range for " + std::to_string(n_) + " nodes");
    if (u == v) throw InvalidArgument("self-loop at node " + std::to_string(u));
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  if (auto dup = std::adjacent_find(edges.begin(), edges.end()); dup != edges.end())
    throw InvalidArgument("duplicate edge (" + std::to_string(dup->first) + "," +
                          std::to_string(dup->second) + ")");
  edges_ = std::move(edges);

  offsets_.assign(n_ + 1, 0);
  for (const auto& [u, v] : edges_) {
    ++offsets_[u + 1];
    ++offsets_[v + 1];
  }
  for (int i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
  indices_.resize(offsets_[n_]);
  std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& [u, v] : edges_) {
    indices_[fill[u]++] = v;
    indices_[fill[v]++] = u;
  }
  for (int i = 0; i < n_; ++i)
    std::sort(indices_.begin() + offsets_[i], indices_.begin() + offsets_[i + 1]);
}

std::vector<int> Network::degrees() const {
  std::vector<int> d(n_);
  for (int i = 0; i < n_; ++i) d[i] = degree(i);
  return d;
}

bool Network::has_edge(int u, int v) const {
  if (u < 0 || v < 0 || u >= n_ || v >= n_) return false;
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::uint64_t Network::fingerprint() const {
  std::uint64_t h = fnv1a64(std::to_string(n_));
  for (const auto& [u, v] : edges_)
    h = fnv1a64(std::to_string(u) + "-" + std::to_string(v) + ";", h);
  return h;
}

Network Network::relabeled(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != n_) throw InvalidArgument("permutation size mismatch");
  std::vector<Edge> out;
  out.reserve(edges_.size());
  for (const auto& [u, v] : edges_) out.emplace_back(perm[u], perm[v]);
  return Network(n_, std::move(out));
}

Network generate_grid(int side) {
  if (side < 2) throw InvalidArgument("grid side must be >= 2");
  std::vector<Edge> edges;
  auto id = [side](int k, int l) { return k * side + l; };
  for (int k = 0; k < side; ++k) {
    for (int l = 0; l < side; ++l) {
      // Forward half of the 8-neighborhood so each edge appears once.
      if (l + 1 < side) edges.emplace_back(id(k, l), id(k, l + 1));
      if (k + 1 < side) {
        edges.emplace_back(id(k, l), id(k + 1, l));
        if (l + 1 < side) edges.emplace_back(id(k, l), id(k + 1, l + 1));
        if (l > 0) edges.emplace_back(id(k, l), id(k + 1, l - 1));
      }
    }
  }
  return Network(side * side, std::move(edges));
}

Network generate_er(int n, double p, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("er: n must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("er: p must lie in [0, 1]");
  Rng rng(seed);
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.uniform01() < p) edges.emplace_back(u, v);
  return Network(n, std::move(edges));
}

Network generate_ba(int n, int m, std::uint64_t seed) {
  if (m < 1 || m >= n) throw InvalidArgument("ba: need 1 <= m < n");
  Rng rng(seed);
  std::vector<Edge> edges;
  // Each endpoint occurrence is one ticket: sampling a ticket uniformly is
  // sampling a node proportionally to its degree.
  std::vector<int> tickets;
  for (int u = 0; u < m; ++u)
    for (int v = u + 1; v < m; ++v) {
      edges.emplace_back(u, v);
      tickets.push_back(u);
      tickets.push_back(v);
    }
  std::vector<int> chosen;
  for (int node = m; node < n; ++node) {
    chosen.clear();
    while (static_cast<int>(chosen.size()) < m) {
      int target = tickets.empty() ? static_cast<int>(rng.below(node))
                                   : tickets[rng.below(tickets.size())];
      if (std::find(chosen.begin(), chosen.end(), target) == chosen.end())
        chosen.push_back(target);
    }
    for (int target : chosen) {
      edges.emplace_back(target, node);
      tickets.push_back(target);
      tickets.push_back(node);
    }
  }
  return Network(n, std::move(edges));
}

Network generate_ws(int n, int k, double beta, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("ws: n must be >= 1");
  if (k < 0 || k % 2 != 0 || k >= n) throw InvalidArgument("ws: k must be even with 0 <= k < n");
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidArgument("ws: beta must lie in [0, 1]");
  Rng rng(seed);
  std::vector<std::set<int>> adj(n);
  for (int i = 0; i < n; ++i)
    for (int j = 1; j <= k / 2; ++j) {
      int v = (i + j) % n;
      adj[i].insert(v);
      adj[v].insert(i);
    }
  for (int j = 1; j <= k / 2; ++j) {
    for (int i = 0; i < n; ++i) {
      int v = (i + j) % n;
      if (!adj[i].count(v) || rng.uniform01() >= beta) continue;
      if (static_cast<int>(adj[i].size()) >= n - 1) continue;
      int w;
      do {
        w = static_cast<int>(rng.below(n));
      } while (w == i || adj[i].count(w));
      adj[i].erase(v);
      adj[v].erase(i);
      adj[i].insert(w);
      adj[w].insert(i);
    }
  }
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v : adj[u])
      if (u < v) edges.emplace_back(u, v);
  return Network(n, std::move(edges));
}

Network parse_edge_list(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<Edge> edges;
  std::set<Edge> seen;
  int declared_nodes = -1;
  int max_id = -1;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw FormatError("edge list line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      std::istringstream cs(line.substr(first + 1));
      std::string key;
      long long value;
      if (cs >> key && key == "nodes" && cs >> value) {
        if (value <= 0) fail("node count must be positive");
        declared_nodes = static_cast<int>(value);
      }
      continue;
    }
    std::istringstream ls(line);
    std::string a, b, extra;
    if (!(ls >> a >> b) || (ls >> extra)) fail("expected two node ids");
    long long u, v;
    try {
      std::size_t pa, pb;
      u = std::stoll(a, &pa);
      v = std::stoll(b, &pb);
      if (pa != a.size() || pb != b.size()) fail("node ids must be integers");
    } catch (const std::logic_error&) {
      fail("node ids must be integers");
    }
    if (u < 0 || v < 0) fail("negative node id");
    if (u > INT32_MAX / 2 || v > INT32_MAX / 2) fail("node id too large");
    if (u == v) fail("self-loop at node " + std::to_string(u));
    Edge e{static_cast<int>(std::min(u, v)), static_cast<int>(std::max(u, v))};
    if (!seen.insert(e).second)
      fail("duplicate edge " + std::to_string(e.first) + " " + std::to_string(e.second));
    edges.push_back(e);
    max_id = std::max({max_id, e.first, e.second});
  }
  int n = max_id + 1;
  if (declared_nodes >= 0) {
    if (declared_nodes < n) throw FormatError("edge list: '# nodes' smaller than largest id + 1");
    n = declared_nodes;
  }
  if (n <= 0) throw FormatError("edge list: no nodes");
  return Network(n, std::move(edges));
}

Network load_edge_list(const std::filesystem::path& path) {
  try {
    return parse_edge_list(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string format_edge_list(const Network& net, const std::vector<std::string>& comments) {
  std::ostringstream out;
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "# nodes " << net.node_count() << "\n";
  for (const auto& [u, v] : net.edges()) out << u << ' ' << v << '\n';
  return out.str();
}

void save_edge_list(const Network& net, const std::filesystem::path& path,
                    const std::vector<std::string>& comments) {
  write_text_file(path, format_edge_list(net, comments));
}

Eigen::SparseMatrix<double> laplacian(const Network& net) {
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> entries;
  entries.reserve(net.node_count() + 2 * net.edge_count());
  for (int i = 0; i < net.node_count(); ++i)
    if (net.degree(i) > 0) entries.emplace_back(i, i, net.degree(i));
  for (const auto& [u, v] : net.edges()) {
    entries.emplace_back(u, v, -1.0);
    entries.emplace_back(v, u, -1.0);
  }
  Eigen::SparseMatrix<double> L(net.node_count(), net.node_count());
  L.setFromTriplets(entries.begin(), entries.end());
  return L;
}

}  // namespace netflow
