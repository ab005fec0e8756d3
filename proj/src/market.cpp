#include "rhedge/market.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "rhedge/tolerances.hpp"

namespace rhedge::market {

using nlohmann::json;

namespace {

std::string fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                         const std::string& where, std::vector<std::string>& errs) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      errs.push_back(where + ": unknown key '" + it.key() + "'");
  }
}

Vec parse_vec(const json& arr, std::size_t want, const std::string& where,
              std::vector<std::string>& errs) {
  Vec v;
  if (!arr.is_array()) {
    errs.push_back(where + ": expected an array");
    return v;
  }
  for (const auto& x : arr) {
    if (!x.is_number()) {
      errs.push_back(where + ": non-numeric entry");
      return {};
    }
    v.push_back(x.get<double>());
  }
  if (want != 0 && v.size() != want) {
    errs.push_back(where + ": expected " + std::to_string(want) + " entries, got " +
                   std::to_string(v.size()));
  }
  for (double x : v)
    if (!std::isfinite(x)) errs.push_back(where + ": non-finite entry");
  return v;
}

}  // namespace

MarketSpec load_market_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const std::exception& e) {
    throw ValidationError(std::string("schema error: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("schema error: top level must be an object");

  std::vector<std::string> errs;
  reject_unknown_keys(doc,
                      {"horizon", "assets", "spread_bound", "gamma", "nodes",
                       "endowment", "options"},
                      "top level", errs);
  for (const char* key : {"horizon", "assets", "spread_bound", "gamma", "nodes"})
    if (!doc.contains(key)) errs.push_back(std::string("missing key '") + key + "'");
  if (!errs.empty()) throw ValidationError("schema error: " + errs.front());

  MarketSpec spec;
  spec.source_hash = fnv1a(text);
  spec.horizon = doc["horizon"].get<int>();
  spec.assets = doc["assets"].get<int>();
  spec.spread_bound = doc["spread_bound"].get<double>();
  spec.gamma = doc["gamma"].get<double>();

  if (spec.horizon < 1) errs.push_back("horizon must be >= 1");
  if (spec.assets < 2) errs.push_back("assets must be >= 2");
  if (!(spec.spread_bound > 1.0)) errs.push_back("spread_bound must be > 1");
  if (!(spec.gamma > 0.0)) errs.push_back("gamma must be > 0");
  if (!errs.empty()) throw ValidationError("invalid market: " + errs.front());

  const int d = spec.assets;
  std::map<int, int> index_of;  // document id -> node index
  for (const auto& jn : doc["nodes"]) {
    if (!jn.is_object()) {
      errs.push_back("nodes: each entry must be an object");
      continue;
    }
    reject_unknown_keys(jn, {"id", "t", "children", "mid", "bid", "ask", "priors"},
                        "node", errs);
    MarketNode n;
    if (!jn.contains("id") || !jn.contains("t")) {
      errs.push_back("node missing 'id' or 't'");
      continue;
    }
    n.id = jn["id"].get<int>();
    n.t = jn["t"].get<int>();
    const std::string where = "node " + std::to_string(n.id);
    if (index_of.count(n.id)) errs.push_back(where + ": duplicate id");
    n.mid = parse_vec(jn.value("mid", json::array()), d - 1, where + " mid", errs);
    n.bid = parse_vec(jn.value("bid", json::array()), d - 1, where + " bid", errs);
    n.ask = parse_vec(jn.value("ask", json::array()), d - 1, where + " ask", errs);
    if (jn.contains("children"))
      for (const auto& c : jn["children"]) n.children.push_back(c.get<int>());
    if (jn.contains("priors"))
      for (const auto& p : jn["priors"])
        n.priors.push_back(parse_vec(p, n.children.size(), where + " prior", errs));
    index_of[n.id] = static_cast<int>(spec.nodes.size());
    spec.nodes.push_back(std::move(n));
  }

  // remap children ids to indices
  for (auto& n : spec.nodes) {
    for (int& c : n.children) {
      auto it = index_of.find(c);
      if (it == index_of.end()) {
        errs.push_back("node " + std::to_string(n.id) + ": unknown child id " +
                       std::to_string(c));
        c = -1;
      } else {
        c = it->second;
      }
    }
    n.children.erase(std::remove(n.children.begin(), n.children.end(), -1),
                     n.children.end());
  }

  // topology
  spec.parent.assign(spec.nodes.size(), -1);
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    for (int c : spec.nodes[i].children) {
      if (spec.parent[c] != -1)
        errs.push_back("node " + std::to_string(spec.nodes[c].id) +
                       ": more than one parent (non-tree topology)");
      spec.parent[c] = static_cast<int>(i);
      if (spec.nodes[c].t != spec.nodes[i].t + 1)
        errs.push_back("node " + std::to_string(spec.nodes[c].id) +
                       ": child time must be parent time + 1");
    }
  }
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    if (spec.nodes[i].t == 0) {
      if (spec.root != -1) errs.push_back("multiple roots (t = 0 nodes)");
      spec.root = static_cast<int>(i);
    }
    if (spec.nodes[i].t != 0 && spec.parent[i] == -1)
      errs.push_back("node " + std::to_string(spec.nodes[i].id) +
                     ": unreachable from the root (non-tree topology)");
  }
  if (spec.root == -1) errs.push_back("no root node at t = 0");
  if (!errs.empty()) throw ValidationError("invalid market: " + errs.front());

  spec.by_time.assign(spec.horizon + 1, {});
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    const auto& n = spec.nodes[i];
    if (n.t < 0 || n.t > spec.horizon) {
      errs.push_back("node " + std::to_string(n.id) + ": time outside [0, horizon]");
      continue;
    }
    spec.by_time[n.t].push_back(static_cast<int>(i));
  }

  // labels = id paths
  {
    std::vector<int> order;
    order.push_back(spec.root);
    spec.nodes[spec.root].label = std::to_string(spec.nodes[spec.root].id);
    for (std::size_t k = 0; k < order.size(); ++k) {
      int i = order[k];
      for (int c : spec.nodes[i].children) {
        spec.nodes[c].label =
            spec.nodes[i].label + "/" + std::to_string(spec.nodes[c].id);
        order.push_back(c);
      }
    }
  }

  // per-node invariants
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    const auto& n = spec.nodes[i];
    const std::string where = "node " + n.label;
    bool terminal = n.t == spec.horizon;
    if (terminal && !n.children.empty())
      errs.push_back(where + ": terminal node with children");
    if (!terminal && n.children.empty())
      errs.push_back(where + ": non-terminal node without children");
    if (!terminal && n.priors.empty())
      errs.push_back(where + ": non-terminal node without priors");
    if (terminal && !n.priors.empty())
      errs.push_back(where + ": terminal node with priors");
    for (int i2 = 0; i2 + 1 < d; ++i2) {
      if (static_cast<int>(n.mid.size()) != d - 1 ||
          static_cast<int>(n.bid.size()) != d - 1 ||
          static_cast<int>(n.ask.size()) != d - 1)
        break;  // size errors already recorded
      double S = n.mid[i2], b = n.bid[i2], a = n.ask[i2];
      if (!(S > 0)) errs.push_back(where + ": mid price must be > 0");
      if (!(b > 0)) errs.push_back(where + ": bid must be > 0");
      if (b > S + tol::kProbMass || a < S - tol::kProbMass)
        errs.push_back(where + ": requires bid <= mid <= ask");
      if (b > a) errs.push_back(where + ": inverted spread (bid > ask)");
      if (b < S / spec.spread_bound - 1e-9 || a > S * spec.spread_bound + 1e-9)
        errs.push_back(where + ": bid/ask outside the spread_bound box");
    }
    for (const auto& p : n.priors) {
      if (p.size() != n.children.size()) continue;  // recorded already
      double s = 0.0;
      for (double x : p) {
        if (x < 0) errs.push_back(where + ": prior entry < 0");
        s += x;
      }
      if (std::abs(s - 1.0) > tol::kProbMass) {
        std::ostringstream os;
        os << where << ": prior sums to " << s;
        errs.push_back(os.str());
      }
    }
  }

  // endowment / options
  spec.endowment.assign(spec.nodes.size(), {});
  auto parse_terminal_map = [&](const json& jm, const std::string& what,
                                std::vector<Vec>& out) {
    out.assign(spec.nodes.size(), {});
    for (auto it = jm.begin(); it != jm.end(); ++it) {
      int id;
      try {
        id = std::stoi(it.key());
      } catch (...) {
        errs.push_back(what + ": key '" + it.key() + "' is not a node id");
        continue;
      }
      auto f = index_of.find(id);
      if (f == index_of.end()) {
        errs.push_back(what + ": unknown node id " + it.key());
        continue;
      }
      if (spec.nodes[f->second].t != spec.horizon) {
        errs.push_back(what + ": node " + it.key() + " is not terminal");
        continue;
      }
      out[f->second] =
          parse_vec(it.value(), d, what + " at node " + it.key(), errs);
    }
    for (int tnode : spec.by_time[spec.horizon])
      if (out[tnode].empty()) out[tnode].assign(d, 0.0);
  };
  if (doc.contains("endowment"))
    parse_terminal_map(doc["endowment"], "endowment", spec.endowment);
  else
    for (int tnode : spec.by_time[spec.horizon]) spec.endowment[tnode].assign(d, 0.0);

  if (doc.contains("options")) {
    for (const auto& jo : doc["options"]) {
      reject_unknown_keys(jo, {"payoff", "cost"}, "option", errs);
      MarketOption opt;
      if (!jo.contains("payoff") || !jo.contains("cost")) {
        errs.push_back("option missing 'payoff' or 'cost'");
        continue;
      }
      opt.cost = jo["cost"].get<double>();
      if (!(opt.cost > 0)) errs.push_back("option cost must be > 0");
      parse_terminal_map(jo["payoff"], "option payoff", opt.payoff);
      spec.options.push_back(std::move(opt));
    }
  }

  if (!errs.empty()) {
    std::string msg = "invalid market (" + std::to_string(errs.size()) + " problems):";
    for (const auto& e : errs) msg += "\n  - " + e;
    throw ValidationError(msg);
  }

  // reachability under the union of prior supports
  spec.reachable.assign(spec.nodes.size(), 0);
  spec.reachable[spec.root] = 1;
  for (int t = 0; t < spec.horizon; ++t) {
    for (int i : spec.by_time[t]) {
      if (!spec.reachable[i]) continue;
      const auto& n = spec.nodes[i];
      for (std::size_t ci = 0; ci < n.children.size(); ++ci)
        for (const auto& p : n.priors)
          if (p[ci] > 0) {
            spec.reachable[n.children[ci]] = 1;
            break;
          }
    }
  }
  return spec;
}

MarketSpec load_market_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open input file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_market_json(ss.str());
}

std::string to_json(const MarketSpec& spec) {
  json doc;
  doc["horizon"] = spec.horizon;
  doc["assets"] = spec.assets;
  doc["spread_bound"] = spec.spread_bound;
  doc["gamma"] = spec.gamma;
  json nodes = json::array();
  for (const auto& n : spec.nodes) {
    json jn;
    jn["id"] = n.id;
    jn["t"] = n.t;
    json ch = json::array();
    for (int c : n.children) ch.push_back(spec.nodes[c].id);
    jn["children"] = ch;
    jn["mid"] = n.mid;
    jn["bid"] = n.bid;
    jn["ask"] = n.ask;
    if (!n.priors.empty()) jn["priors"] = n.priors;
    nodes.push_back(jn);
  }
  doc["nodes"] = nodes;
  json endw = json::object();
  for (std::size_t i = 0; i < spec.nodes.size(); ++i)
    if (!spec.endowment[i].empty())
      endw[std::to_string(spec.nodes[i].id)] = spec.endowment[i];
  doc["endowment"] = endw;
  json opts = json::array();
  for (const auto& o : spec.options) {
    json jo;
    jo["cost"] = o.cost;
    json pay = json::object();
    for (std::size_t i = 0; i < spec.nodes.size(); ++i)
      if (!o.payoff[i].empty()) pay[std::to_string(spec.nodes[i].id)] = o.payoff[i];
    jo["payoff"] = pay;
    opts.push_back(jo);
  }
  doc["options"] = opts;
  return doc.dump(2);
}

// ---------------------------------------------------------------------------
// NA2 certificate
// ---------------------------------------------------------------------------

namespace {

struct CpsLp {
  // variable indices: y[node][component]; component d-1 is the numeraire mass
  std::vector<std::vector<int>> y;
};

// Feasibility core shared by both phases: flow conservation and box rows on
// the reachable subtree truncated at depth `depth`.
void build_core(const MarketSpec& spec, int depth, solvers::LpBuilder& lp, CpsLp& v,
                int eps_var, double mass_floor) {
  const int d = spec.assets;
  v.y.assign(spec.nodes.size(), {});
  for (int t = 0; t <= depth; ++t)
    for (int i : spec.by_time[t]) {
      if (!spec.reachable[i]) continue;
      v.y[i].resize(d);
      for (int k = 0; k < d; ++k)
        v.y[i][k] = lp.add_var(solvers::LpBuilder::Sign::kNonNeg);
    }
  // root mass = 1
  {
    int r = lp.add_row(solvers::LpBuilder::Rel::kEq, 1.0);
    lp.add_term(r, v.y[spec.root][d - 1], 1.0);
  }
  for (int t = 0; t < depth; ++t)
    for (int i : spec.by_time[t]) {
      if (!spec.reachable[i]) continue;
      for (int k = 0; k < d; ++k) {
        int r = lp.add_row(solvers::LpBuilder::Rel::kEq, 0.0);
        lp.add_term(r, v.y[i][k], -1.0);
        for (int c : spec.nodes[i].children)
          if (spec.reachable[c]) lp.add_term(r, v.y[c][k], 1.0);
      }
    }
  for (int t = 0; t <= depth; ++t)
    for (int i : spec.by_time[t]) {
      if (!spec.reachable[i]) continue;
      const auto& n = spec.nodes[i];
      for (int k = 0; k + 1 < d; ++k) {
        if (n.bid[k] == n.ask[k]) {
          int r = lp.add_row(solvers::LpBuilder::Rel::kEq, 0.0);
          lp.add_term(r, v.y[i][k], 1.0);
          lp.add_term(r, v.y[i][d - 1], -n.bid[k]);
        } else {
          int rlo = lp.add_row(solvers::LpBuilder::Rel::kGe, 0.0);
          lp.add_term(rlo, v.y[i][k], 1.0);
          lp.add_term(rlo, v.y[i][d - 1], -n.bid[k]);
          if (eps_var >= 0) lp.add_term(rlo, eps_var, -1.0);
          int rhi = lp.add_row(solvers::LpBuilder::Rel::kGe, 0.0);
          lp.add_term(rhi, v.y[i][k], -1.0);
          lp.add_term(rhi, v.y[i][d - 1], n.ask[k]);
          if (eps_var >= 0) lp.add_term(rhi, eps_var, -1.0);
        }
      }
      if (mass_floor > 0.0) {
        int r = lp.add_row(solvers::LpBuilder::Rel::kGe, mass_floor);
        lp.add_term(r, v.y[i][d - 1], 1.0);
      }
    }
}

}  // namespace

Na2Result check_na2(const MarketSpec& spec, const solvers::SolverConfig& cfg) {
  const int d = spec.assets;
  Na2Result out;

  // Phase A: maximize the minimum path mass delta subject to flow + boxes.
  solvers::LpBuilder lpa;
  int delta = lpa.add_var(solvers::LpBuilder::Sign::kNonNeg, 1.0);
  CpsLp va;
  build_core(spec, spec.horizon, lpa, va, -1, 0.0);
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    if (!spec.reachable[i]) continue;
    int r = lpa.add_row(solvers::LpBuilder::Rel::kGe, 0.0);
    lpa.add_term(r, va.y[i][d - 1], 1.0);
    lpa.add_term(r, delta, -1.0);
  }
  solvers::LpResult ra = lpa.solve(cfg);

  auto first_failing_depth = [&]() {
    for (int depth = 1; depth <= spec.horizon; ++depth) {
      solvers::LpBuilder lp;
      int dv = lp.add_var(solvers::LpBuilder::Sign::kNonNeg, 1.0);
      CpsLp v;
      build_core(spec, depth, lp, v, -1, 0.0);
      for (int t = 0; t <= depth; ++t)
        for (int i : spec.by_time[t]) {
          if (!spec.reachable[i]) continue;
          int r = lp.add_row(solvers::LpBuilder::Rel::kGe, 0.0);
          lp.add_term(r, v.y[i][d - 1], 1.0);
          lp.add_term(r, dv, -1.0);
        }
      solvers::LpResult rr = lp.solve(cfg);
      if (rr.status != solvers::LpStatus::kOptimal || rr.value <= tol::kLpSlack)
        return depth;
    }
    return spec.horizon;
  };

  if (ra.status != solvers::LpStatus::kOptimal || ra.value <= tol::kLpSlack) {
    int depth = first_failing_depth();
    out.holds = false;
    out.cps.eps = 0.0;
    out.witness_node = spec.by_time[depth].empty() ? -1 : spec.by_time[depth].front();
    std::ostringstream os;
    os << "no full-support consistent price selection: first obstruction at time "
       << depth;
    if (out.witness_node >= 0)
      os << " (node " << spec.nodes[out.witness_node].label << ")";
    out.diagnostic = os.str();
    return out;
  }
  double support = ra.value;

  // Phase B: with the support floor locked in, maximize the uniform box slack.
  bool any_spread = false;
  for (std::size_t i = 0; i < spec.nodes.size(); ++i)
    if (spec.reachable[i] && spec.has_spread(static_cast<int>(i))) any_spread = true;

  solvers::LpResult rb;
  CpsLp vb;
  double eps_lp = std::numeric_limits<double>::infinity();
  if (any_spread) {
    solvers::LpBuilder lpb;
    int eps = lpb.add_var(solvers::LpBuilder::Sign::kNonNeg, 1.0);
    build_core(spec, spec.horizon, lpb, vb, eps, support / 2.0);
    rb = lpb.solve(cfg);
    if (rb.status != solvers::LpStatus::kOptimal) {
      out.holds = false;
      out.diagnostic = "box-slack LP failed after a feasible support phase";
      return out;
    }
    eps_lp = rb.value;
  } else {
    rb = ra;
    vb = va;
  }

  // Extract the certificate.
  StrictCps cps;
  cps.Z.assign(spec.nodes.size(), {});
  cps.mass.assign(spec.nodes.size(), 0.0);
  cps.conditional.assign(spec.nodes.size(), {});
  double min_mass = std::numeric_limits<double>::infinity();
  double realized_eps = std::numeric_limits<double>::infinity();
  int witness = -1;
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    if (!spec.reachable[i]) continue;
    const auto& n = spec.nodes[i];
    double m = rb.x[vb.y[i][d - 1]];
    cps.mass[i] = m;
    min_mass = std::min(min_mass, m);
    Vec z(d, 1.0);
    for (int k = 0; k + 1 < d; ++k) {
      z[k] = m > 0 ? rb.x[vb.y[i][k]] / m : n.mid[k];
      if (n.bid[k] < n.ask[k]) {
        double slack = std::min(z[k] - n.bid[k], n.ask[k] - z[k]);
        if (slack < realized_eps) {
          realized_eps = slack;
          witness = static_cast<int>(i);
        }
      }
    }
    cps.Z[i] = std::move(z);
  }
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    if (!spec.reachable[i] || spec.is_terminal(static_cast<int>(i))) continue;
    const auto& n = spec.nodes[i];
    Vec cond(n.children.size(), 0.0);
    for (std::size_t c = 0; c < n.children.size(); ++c) {
      int ci = n.children[c];
      if (spec.reachable[ci] && cps.mass[static_cast<std::size_t>(i)] > 0)
        cond[c] = cps.mass[ci] / cps.mass[i];
    }
    cps.conditional[i] = std::move(cond);
  }
  cps.eps = realized_eps;
  cps.support_margin = min_mass;
  out.cps = std::move(cps);

  bool strict_ok = !any_spread || eps_lp > tol::kLpSlack;
  out.holds = support > tol::kLpSlack && strict_ok;
  if (!out.holds) {
    out.witness_node = witness;
    std::ostringstream os;
    os << "no strictly interior price system: max box slack " << eps_lp;
    if (witness >= 0) os << " at node " << spec.nodes[witness].label;
    out.diagnostic = os.str();
  }
  return out;
}

}  // namespace rhedge::market
