#include "rhedge/lift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rhedge::lift {

Vec clamp_price(const Vec& mid, const Vec& theta, const Vec& bid, const Vec& ask) {
  const std::size_t dm1 = mid.size();
  Vec x(dm1 + 1, 1.0);
  for (std::size_t i = 0; i < dm1; ++i)
    x[i] = std::min(std::max(mid[i] * theta[i], bid[i]), ask[i]);
  return x;
}

LiftedTree build_lift(const market::MarketSpec& spec, int m) {
  if (m < 2) throw ValidationError("grid resolution m must be >= 2");
  const int d = spec.assets;
  LiftedTree lt;
  lt.spec = &spec;
  lt.grid.m = m;
  lt.grid.theta.resize(spec.nodes.size());
  lt.grid.interior.resize(spec.nodes.size());
  lt.X.resize(spec.nodes.size());

  const double lo = 1.0 / spec.spread_bound, hi = spec.spread_bound;
  for (std::size_t node = 0; node < spec.nodes.size(); ++node) {
    const auto& n = spec.nodes[node];
    // per-dimension grids
    std::vector<Vec> axis(d - 1);
    for (int i = 0; i + 1 < d; ++i) {
      Vec g(m);
      for (int j = 0; j < m; ++j)
        g[j] = lo + (hi - lo) * (m == 1 ? 0.0 : static_cast<double>(j) / (m - 1));
      if (m >= 3) {
        // pin the interior point closest to the box midpoint onto it exactly
        double theta_mid = 0.5 * (n.bid[i] + n.ask[i]) / n.mid[i];
        theta_mid = std::min(std::max(theta_mid, lo), hi);
        int best = 1;
        for (int j = 1; j + 1 < m; ++j)
          if (std::abs(g[j] - theta_mid) < std::abs(g[best] - theta_mid)) best = j;
        g[best] = theta_mid;
      }
      axis[i] = std::move(g);
    }
    // tensor product
    std::vector<Vec> pts;
    pts.emplace_back();
    for (int i = 0; i + 1 < d; ++i) {
      std::vector<Vec> next;
      for (const auto& partial : pts)
        for (double v : axis[i]) {
          Vec p = partial;
          p.push_back(v);
          next.push_back(std::move(p));
        }
      pts = std::move(next);
    }
    std::vector<char> inter(pts.size());
    std::vector<Vec> xs(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) {
      xs[k] = clamp_price(n.mid, pts[k], n.bid, n.ask);
      bool in = true;
      for (int i = 0; i + 1 < d; ++i) {
        if (n.bid[i] == n.ask[i]) continue;  // frictionless slice: interior by convention
        if (!(n.bid[i] < xs[k][i] && xs[k][i] < n.ask[i])) in = false;
      }
      inter[k] = in ? 1 : 0;
    }
    lt.grid.theta[node] = std::move(pts);
    lt.grid.interior[node] = std::move(inter);
    lt.X[node] = std::move(xs);
  }
  return lt;
}

std::vector<Vec> payoff_table(const LiftedTree& lt, const PayoffVectors& w) {
  const auto& spec = *lt.spec;
  std::vector<Vec> tab(spec.nodes.size());
  for (int node : spec.by_time[spec.horizon]) {
    const Vec& wn = w[node];
    Vec row(lt.states(node), 0.0);
    for (int k = 0; k < lt.states(node); ++k) row[k] = dot(wn, lt.X[node][k]);
    tab[node] = std::move(row);
  }
  return tab;
}

bool transfer_admissible(const Vec& eta, const market::MarketNode& node, int d,
                         double slack) {
  double liq = eta[d - 1];
  for (int i = 0; i + 1 < d; ++i) {
    liq += eta[i] >= 0 ? eta[i] * node.ask[i] : eta[i] * node.bid[i];
  }
  return liq <= slack;
}

TransferProcess strategy_to_transfers(const Strategy& s, const PayoffVectors& claim,
                                      const market::MarketSpec& spec) {
  const int d = spec.assets;
  TransferProcess tp;
  tp.eta.assign(spec.nodes.size(), {});
  for (std::size_t node = 0; node < spec.nodes.size(); ++node) {
    const auto& n = spec.nodes[node];
    Vec eta(d, 0.0);
    const Vec* h_prev =
        spec.parent[node] >= 0 ? &s.H[spec.parent[node]] : nullptr;
    if (!spec.is_terminal(static_cast<int>(node))) {
      for (int i = 0; i + 1 < d; ++i)
        eta[i] = s.H[node][i] - (h_prev ? (*h_prev)[i] : 0.0);
    } else {
      // liquidate the position and the claim's non-numeraire legs
      for (int i = 0; i + 1 < d; ++i)
        eta[i] = -claim[node][i] - (h_prev ? (*h_prev)[i] : 0.0);
    }
    // worst-case funding leg: inf over theta of -sum_i eta_i X_i
    double fund = 0.0;
    for (int i = 0; i + 1 < d; ++i)
      fund += eta[i] >= 0 ? -eta[i] * n.ask[i] : -eta[i] * n.bid[i];
    eta[d - 1] = fund;
    tp.eta[node] = std::move(eta);
  }
  return tp;
}

Vec liquidated_wealth(const TransferProcess& tp, const PayoffVectors& claim,
                      const market::MarketSpec& spec) {
  const int d = spec.assets;
  Vec out(spec.nodes.size(), 0.0);
  for (int node : spec.by_time[spec.horizon]) {
    double cash = claim[node][d - 1];
    for (int i = node; i >= 0; i = spec.parent[i]) cash += tp.eta[i][d - 1];
    out[node] = cash;
  }
  return out;
}

Vec min_theta_wealth(const Strategy& s, const PayoffVectors& claim,
                     const LiftedTree& lt) {
  const auto& spec = *lt.spec;
  const int d = spec.assets;
  Vec out(spec.nodes.size(), 0.0);
  for (int node : spec.by_time[spec.horizon]) {
    // walk the path, collecting the X_t(theta_t) coefficient at each time:
    //   t = 0..T-1:  H_{t+1}(node_t) - H_t(parent)   (position change)
    //   t = T:       claim + H_T
    double total = 0.0;
    std::vector<int> path;
    for (int i = node; i >= 0; i = spec.parent[i]) path.push_back(i);
    std::reverse(path.begin(), path.end());
    for (std::size_t pi = 0; pi < path.size(); ++pi) {
      int cur = path[pi];
      Vec coef(d, 0.0);
      const Vec* h_prev = spec.parent[cur] >= 0 ? &s.H[spec.parent[cur]] : nullptr;
      if (pi + 1 < path.size()) {
        for (int i = 0; i < d; ++i)
          coef[i] = -(s.H[cur][i] - (h_prev ? (*h_prev)[i] : 0.0));
      } else {
        for (int i = 0; i < d; ++i)
          coef[i] = claim[cur][i] + (h_prev ? (*h_prev)[i] : 0.0);
      }
      // min over grid points of coef . X(cur, k); separable across periods
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < lt.states(cur); ++k)
        best = std::min(best, dot(coef, lt.X[cur][k]));
      total += best;
    }
    out[node] = total;
  }
  return out;
}

DominanceCertificate transfers_to_strategy(const TransferProcess& tp,
                                           const PayoffVectors& claim,
                                           const LiftedTree& lt) {
  const auto& spec = *lt.spec;
  const int d = spec.assets;
  for (std::size_t node = 0; node < spec.nodes.size(); ++node) {
    if (tp.eta[node].empty()) continue;
    if (!transfer_admissible(tp.eta[node], spec.nodes[node], d))
      throw ValidationError("transfer not admissible (eta outside -K) at node " +
                            spec.nodes[node].label);
  }
  DominanceCertificate cert;
  cert.strategy.H.assign(spec.nodes.size(), {});
  // H_{t+1}(node) = sum of eta along the path up to and including the node
  for (std::size_t node = 0; node < spec.nodes.size(); ++node) {
    if (spec.is_terminal(static_cast<int>(node))) continue;
    Vec h(d, 0.0);
    for (int i = static_cast<int>(node); i >= 0; i = spec.parent[i])
      add_scaled(h, 1.0, tp.eta[i]);
    cert.strategy.H[node] = std::move(h);
  }
  Vec lhs = min_theta_wealth(cert.strategy, claim, *lt.spec);
  Vec rhs = liquidated_wealth(tp, claim, spec);
  double min_gap = std::numeric_limits<double>::infinity();
  for (int node : spec.by_time[spec.horizon])
    min_gap = std::min(min_gap, lhs[node] - rhs[node]);
  cert.min_gap = min_gap;
  return cert;
}

}  // namespace rhedge::lift
