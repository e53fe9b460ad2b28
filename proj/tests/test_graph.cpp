#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <set>

#include "netflow/error.hpp"
#include "netflow/graph.hpp"

using namespace netflow;

namespace {

// King-move lattice by brute force over coordinate pairs.
std::size_t king_edges_brute_force(int side) {
  std::size_t count = 0;
  for (int a = 0; a < side * side; ++a)
    for (int b = a + 1; b < side * side; ++b) {
      const int dr = std::abs(a / side - b / side), dc = std::abs(a % side - b % side);
      if (std::max(dr, dc) == 1) ++count;
    }
  return count;
}

}  // namespace

TEST_CASE("grid has king-move adjacency") {
  for (int side : {2, 3, 5, 20}) {
    const Network g = generate_grid(side);
    CHECK(g.node_count() == side * side);
    CHECK(g.edge_count() == king_edges_brute_force(side));
  }
  const Network g = generate_grid(20);
  CHECK(g.edge_count() == 1482);
  CHECK(g.degree(0) == 3);       // corner
  CHECK(g.degree(1) == 5);       // border
  CHECK(g.degree(21) == 8);      // interior
  CHECK(g.has_edge(0, 21));      // diagonal
  CHECK_FALSE(g.has_edge(0, 2));
  CHECK_THROWS_AS(generate_grid(1), InvalidArgument);
}

TEST_CASE("network construction rejects malformed edges") {
  CHECK_THROWS_AS(Network(3, {{0, 0}}), InvalidArgument);
  CHECK_THROWS_AS(Network(3, {{0, 1}, {1, 0}}), InvalidArgument);
  CHECK_THROWS_AS(Network(3, {{0, 3}}), InvalidArgument);
  CHECK_THROWS_AS(Network(3, {{-1, 2}}), InvalidArgument);
  const Network g(4, {{2, 1}, {0, 3}});
  CHECK(g.edges() == std::vector<Edge>{{0, 3}, {1, 2}});
  CHECK(g.degree(3) == 1);
}

TEST_CASE("neighbor lists are sorted and symmetric") {
  const Network g = generate_er(60, 0.2, 7);
  std::size_t sum = 0;
  for (int i = 0; i < g.node_count(); ++i) {
    const auto nb = g.neighbors(i);
    CHECK(std::is_sorted(nb.begin(), nb.end()));
    for (int j : nb) CHECK(g.has_edge(j, i));
    sum += nb.size();
  }
  CHECK(sum == 2 * g.edge_count());
}

TEST_CASE("erdos-renyi extremes and determinism") {
  CHECK(generate_er(50, 0.0, 1).edge_count() == 0);
  CHECK(generate_er(50, 1.0, 1).edge_count() == 50 * 49 / 2);
  CHECK(generate_er(80, 0.1, 3) == generate_er(80, 0.1, 3));
  CHECK_FALSE(generate_er(80, 0.1, 3) == generate_er(80, 0.1, 4));
  CHECK_THROWS_AS(generate_er(10, 1.5, 0), InvalidArgument);
}

TEST_CASE("barabasi-albert edge count and minimum degree") {
  for (int m : {1, 2, 3}) {
    const int n = 50;
    const Network g = generate_ba(n, m, 11);
    CHECK(g.edge_count() == static_cast<std::size_t>(m * (m - 1) / 2 + m * (n - m)));
    for (int i = 0; i < n; ++i) CHECK(g.degree(i) >= std::min(m, n - 1));
  }
  CHECK(generate_ba(40, 2, 5) == generate_ba(40, 2, 5));
}

TEST_CASE("watts-strogatz keeps the edge count") {
  const Network ring = generate_ws(20, 4, 0.0, 1);
  CHECK(ring.edge_count() == 40);
  for (int i = 0; i < 20; ++i) CHECK(ring.degree(i) == 4);
  CHECK(ring.has_edge(0, 19));
  CHECK(ring.has_edge(0, 18));
  const Network rewired = generate_ws(20, 4, 0.5, 1);
  CHECK(rewired.edge_count() == 40);
  CHECK_FALSE(rewired == ring);
  CHECK_THROWS_AS(generate_ws(10, 3, 0.1, 0), InvalidArgument);
}

TEST_CASE("edge list round trip keeps isolated nodes") {
  const Network g(6, {{0, 1}, {1, 2}, {3, 4}});
  const std::string text = format_edge_list(g, {"provenance line"});
  CHECK(text.rfind("# provenance line\n# nodes 6\n", 0) == 0);
  const Network back = parse_edge_list(text);
  CHECK(back == g);
  CHECK(back.fingerprint() == g.fingerprint());
}

TEST_CASE("edge list parse errors name the line") {
  auto message = [](const std::string& text) {
    try {
      parse_edge_list(text);
    } catch (const FormatError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("0 1\n2 2\n").find("line 2") != std::string::npos);
  CHECK(message("0 1\n1 0\n").find("line 2") != std::string::npos);
  CHECK(message("# c\n0 x\n").find("line 2") != std::string::npos);
  CHECK(message("0 -1\n").find("line 1") != std::string::npos);
  CHECK(message("0 1 2\n").find("line 1") != std::string::npos);
  CHECK(parse_edge_list("# only comments\n0 1\n\n").edge_count() == 1);
}

TEST_CASE("laplacian is degree minus adjacency") {
  const Network g = generate_ba(30, 2, 2);
  const Eigen::MatrixXd L = Eigen::MatrixXd(laplacian(g));
  CHECK((L - L.transpose()).norm() == 0.0);
  for (int i = 0; i < g.node_count(); ++i) {
    CHECK(L(i, i) == g.degree(i));
    CHECK(L.row(i).sum() == doctest::Approx(0.0));
    for (int j = 0; j < g.node_count(); ++j)
      if (i != j) CHECK(L(i, j) == (g.has_edge(i, j) ? -1.0 : 0.0));
  }
}

TEST_CASE("relabeling permutes adjacency") {
  const Network g = generate_er(15, 0.3, 9);
  std::vector<int> perm(15);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  const Network h = g.relabeled(perm);
  CHECK(h.edge_count() == g.edge_count());
  for (const auto& [u, v] : g.edges()) CHECK(h.has_edge(perm[u], perm[v]));
  CHECK(g.relabeled(perm).relabeled(perm) == g);
}
