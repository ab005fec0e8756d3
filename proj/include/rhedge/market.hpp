#pragma once

#include <string>
#include <vector>

#include "rhedge/errors.hpp"
#include "rhedge/linalg.hpp"
#include "rhedge/solvers.hpp"

// Finite multi-prior market with proportional transaction costs. Assets are
// quoted against the last one (the numeraire); the dual cone slice at each
// node is the box  prod_i [bid_i, ask_i] x {1}.  All types are immutable
// after load_market.

namespace rhedge::market {

struct MarketNode {
  int id = -1;  // id from the input document
  int t = 0;
  std::string label;           // path string, for diagnostics
  std::vector<int> children;   // indices into MarketSpec::nodes
  Vec mid, bid, ask;           // size d-1
  std::vector<Vec> priors;     // extreme points, each over children
};

struct MarketOption {
  std::vector<Vec> payoff;  // [node] -> d-vector at terminal nodes, empty otherwise
  double cost = 0.0;        // proportional transaction cost of the static trade
};

struct MarketSpec {
  int horizon = 0;
  int assets = 0;  // d, numeraire included
  double spread_bound = 0.0;
  double gamma = 0.0;
  std::vector<MarketNode> nodes;
  int root = -1;
  std::vector<std::vector<int>> by_time;  // node indices per t
  std::vector<Vec> endowment;             // [node] -> d-vector at terminal nodes
  std::vector<MarketOption> options;
  std::vector<char> reachable;  // node charged by some chain of prior extremes
  std::vector<int> parent;      // -1 at root
  std::string source_hash;      // FNV-1a of the input document

  int d() const { return assets; }
  bool is_terminal(int n) const { return nodes[n].t == horizon; }
  bool frictionless(int n) const {
    for (int i = 0; i + 1 < assets; ++i)
      if (nodes[n].bid[i] < nodes[n].ask[i]) return false;
    return true;
  }
  bool has_spread(int n) const { return !frictionless(n); }
};

// Parses and validates a market document. Throws ValidationError listing
// every failing node.
MarketSpec load_market_json(const std::string& json_text);
MarketSpec load_market_file(const std::string& path);

// Serialization used by --dump flags and tests.
std::string to_json(const MarketSpec& spec);

// Strict consistent price system: full-support measure Q (as nodewise
// conditionals) and price process Z inside the bid-ask boxes.
struct StrictCps {
  std::vector<Vec> Z;            // [node] -> d-vector, Z^d = 1
  std::vector<double> mass;      // path mass Q(node), 0 off the reachable set
  std::vector<Vec> conditional;  // [node] -> probabilities over children
  double eps = 0.0;              // realized min box slack over spread entries (+inf if none)
  double support_margin = 0.0;   // min path mass over reachable nodes
};

struct Na2Result {
  bool holds = false;
  StrictCps cps;
  std::string diagnostic;
  int witness_node = -1;  // node where the certificate fails, if any
};

// Searches for a full-support strict CPS by two LPs (support margin, then
// box slack). A positive certificate is sufficient for NA2 on the tree; a
// failing LP reports the first node blocking an interior selection.
Na2Result check_na2(const MarketSpec& spec, const solvers::SolverConfig& cfg = {});

}  // namespace rhedge::market
