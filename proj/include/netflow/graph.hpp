#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

namespace netflow {

using Edge = std::pair<int, int>;

/// Undirected simple graph on dense node ids 0..n-1. Immutable once built:
/// every constructor validates symmetry, absence of self-loops and duplicate
/// edges, and derives sorted neighbor lists plus a CSR view for hot loops.
class Network {
public:
  /// Throws InvalidArgument on self-loops, duplicates or out-of-range ids.
  Network(int node_count, std::vector<Edge> edges);

  int node_count() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  /// Edges with u < v, sorted lexicographically.
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::span<const int> neighbors(int node) const {
    return {indices_.data() + offsets_[node],
            static_cast<std::size_t>(offsets_[node + 1] - offsets_[node])};
  }
  int degree(int node) const { return offsets_[node + 1] - offsets_[node]; }
  std::vector<int> degrees() const;

  bool has_edge(int u, int v) const;

  /// CSR adjacency: neighbors of i are indices[offsets[i] .. offsets[i+1]).
  const std::vector<int>& csr_offsets() const noexcept { return offsets_; }
  const std::vector<int>& csr_indices() const noexcept { return indices_; }

  /// Stable 64-bit digest of (n, edges), used to pair checkpoints with the
  /// network they were trained on.
  std::uint64_t fingerprint() const;

  /// Network with node i renamed to perm[i].
  Network relabeled(std::span<const int> perm) const;

  friend bool operator==(const Network& a, const Network& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<int> offsets_;
  std::vector<int> indices_;
};

/// side x side lattice with 8-neighborhood (king moves); node (k,l) -> k*side+l.
Network generate_grid(int side);

/// G(n, p): each pair independently with probability p.
Network generate_er(int n, double p, std::uint64_t seed);

/// Preferential attachment seeded with a complete core on m nodes; each new
/// node attaches to m distinct existing nodes.
Network generate_ba(int n, int m, std::uint64_t seed);

/// Ring lattice with k/2 neighbors per side, each clockwise edge rewired with
/// probability beta (self-loops and duplicates rejected).
Network generate_ws(int n, int k, double beta, std::uint64_t seed);

/// Reads "u v" lines; '#' starts a comment line. A "# nodes N" line fixes the
/// node count so trailing isolated nodes survive a save/load cycle.
Network load_edge_list(const std::filesystem::path& path);
Network parse_edge_list(const std::string& text);

/// `comments` become leading '#' lines, ahead of the node-count line.
void save_edge_list(const Network& net, const std::filesystem::path& path,
                    const std::vector<std::string>& comments = {});
std::string format_edge_list(const Network& net, const std::vector<std::string>& comments = {});

/// L = D - A.
Eigen::SparseMatrix<double> laplacian(const Network& net);

}  // namespace netflow
