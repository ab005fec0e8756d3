#pragma once

#include <vector>

#include "rhedge/market.hpp"

// Enlarged frictionless market: finite theta-grids per node, the fictitious
// price X = clamp(S * theta) onto the bid-ask box, lifted payoffs, and the
// two translation maps between dynamic strategies and transfer processes.

namespace rhedge::lift {

struct ThetaGrid {
  int m = 2;
  std::vector<std::vector<Vec>> theta;      // [node][k] -> (d-1)-vector
  std::vector<std::vector<char>> interior;  // clamped price strictly inside the box
};

struct LiftedTree {
  const market::MarketSpec* spec = nullptr;
  ThetaGrid grid;
  std::vector<std::vector<Vec>> X;  // [node][k] -> d-vector with X[d-1] = 1

  int states(int node) const { return static_cast<int>(X[node].size()); }
};

// Grids always contain the two box corners (exact for every expression that
// is affine in X); for m >= 3 one point is pinned to the box midpoint so an
// interior point exists whenever the node has a spread.
LiftedTree build_lift(const market::MarketSpec& spec, int m);

// Componentwise projection onto the dual-slice box (exact for box slices).
Vec clamp_price(const Vec& mid, const Vec& theta, const Vec& bid, const Vec& ask);

// A terminal payoff given as a linear functional of X_T: one d-vector per
// terminal node (the numeraire component is the cash part).
using PayoffVectors = std::vector<Vec>;

// Scalar tables over lifted states: [node][k] = w(node) . X(node, k).
std::vector<Vec> payoff_table(const LiftedTree& lt, const PayoffVectors& w);

struct Strategy {
  // H[node] = position (d components) chosen at the node, held over the next
  // period; keyed by market nodes only (theta-independent), empty at terminal
  // nodes.
  std::vector<Vec> H;
  Vec static_pos;  // ell, one entry per option
};

struct TransferProcess {
  std::vector<Vec> eta;  // [node] -> d-vector in -K at that node
};

// eta from (H, effective claim): risky legs are the position increments with
// terminal liquidation of the claim, the numeraire leg is the worst-case
// funding cost inf_theta( -sum_i eta_i X_i ) in closed form.
TransferProcess strategy_to_transfers(const Strategy& s, const PayoffVectors& claim,
                                      const market::MarketSpec& spec);

// Admissibility of a transfer at one node: eta in -K, i.e. the position
// -eta liquidates to a nonnegative cash value.
bool transfer_admissible(const Vec& eta, const market::MarketNode& node, int d,
                         double slack = 1e-12);

// Liquidated terminal wealth (xi + sum_t eta_t)^d per terminal node; the
// non-numeraire components vanish by construction.
Vec liquidated_wealth(const TransferProcess& tp, const PayoffVectors& claim,
                      const market::MarketSpec& spec);

// Worst-case identity oracle: per terminal node, min over theta-grid paths of
// [claim . X_T + (H o X)_T]. Separable per period, so the minimum is a sum of
// per-node minima over grid points.
Vec min_theta_wealth(const Strategy& s, const PayoffVectors& claim,
                     const LiftedTree& lt);

struct DominanceCertificate {
  Strategy strategy;
  double min_gap = 0.0;  // min over terminal nodes and theta-paths of lhs - rhs
};

// H from eta (cumulative sums) plus the pathwise dominance certificate
// g + (H o X)_T >= (xi + sum eta)^d. Throws ValidationError when eta is not
// admissible, naming the node.
DominanceCertificate transfers_to_strategy(const TransferProcess& tp,
                                           const PayoffVectors& claim,
                                           const LiftedTree& lt);

}  // namespace rhedge::lift
