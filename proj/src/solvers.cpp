#include "rhedge/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rhedge::solvers {

void SolverConfig::validate() const {
  if (grad_tol <= 0 || max_iter <= 0 || backtrack <= 0 || backtrack >= 1 ||
      suff_decrease <= 0 || lp_pivot <= 0)
    throw std::invalid_argument("SolverConfig: tolerances must be positive");
  for (std::size_t i = 1; i < mu_schedule.size(); ++i)
    if (mu_schedule[i] <= mu_schedule[i - 1])
      throw std::invalid_argument("SolverConfig: mu schedule must be increasing");
  if (mu_schedule.empty() || mu_schedule.front() <= 0)
    throw std::invalid_argument("SolverConfig: mu schedule must be positive");
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Flattened SoA layout of a group set, amenable to the vector kernels.
struct Flat {
  int dim = 0;
  int n_groups = 0;
  // alt-level arrays, one entry per (group, piece, alt)
  std::vector<double> alt_offset;
  std::vector<std::vector<double>> alt_slope;  // [dim][alt]
  // piece-level indexing
  std::vector<int> piece_begin, piece_end;  // alt range per piece
  std::vector<double> piece_logw;           // log weight (-inf if 0)
  std::vector<double> piece_weight;
  std::vector<int> group_begin, group_end;  // piece range per group

  // scratch
  mutable std::vector<double> t;       // alt exponents at current h
  mutable std::vector<double> ew;      // exp weights per alt
  mutable std::vector<double> beta;    // alt softmax within piece
};

Flat flatten(const std::vector<LseGroup>& groups, int dim) {
  Flat f;
  f.dim = dim;
  f.n_groups = static_cast<int>(groups.size());
  f.alt_slope.resize(dim);
  for (const auto& g : groups) {
    f.group_begin.push_back(static_cast<int>(f.piece_logw.size()));
    double total_w = 0.0;
    for (const auto& p : g.pieces) {
      if (p.weight < 0) throw std::invalid_argument("piece weight < 0");
      if (p.alts.empty()) throw std::invalid_argument("piece without alternates");
      total_w += p.weight;
      f.piece_begin.push_back(static_cast<int>(f.alt_offset.size()));
      for (const auto& a : p.alts) {
        if (static_cast<int>(a.slope.size()) != dim)
          throw std::invalid_argument("slope dimension mismatch");
        f.alt_offset.push_back(a.offset);
        for (int i = 0; i < dim; ++i) f.alt_slope[i].push_back(a.slope[i]);
      }
      f.piece_end.push_back(static_cast<int>(f.alt_offset.size()));
      f.piece_weight.push_back(p.weight);
      f.piece_logw.push_back(p.weight > 0 ? std::log(p.weight) : kNegInf);
    }
    if (total_w <= 0.0)
      throw std::invalid_argument("group has no positive piece weight");
    f.group_end.push_back(static_cast<int>(f.piece_logw.size()));
  }
  f.t.resize(f.alt_offset.size());
  f.ew.resize(f.alt_offset.size());
  f.beta.resize(f.alt_offset.size());
  return f;
}

void compute_exponents(const Flat& f, const Vec& h) {
  const std::size_t n = f.alt_offset.size();
  std::copy(f.alt_offset.begin(), f.alt_offset.end(), f.t.begin());
  for (int i = 0; i < f.dim; ++i)
    kernels::axpy(h[i], f.alt_slope[i].data(), f.t.data(), n);
}

// Exact value: max over groups of log sum_p w_p exp(max_k a_pk).
double exact_value(const Flat& f, const Vec& h) {
  compute_exponents(f, h);
  double best = kNegInf;
  for (int g = 0; g < f.n_groups; ++g) {
    double m = kNegInf;
    for (int p = f.group_begin[g]; p < f.group_end[g]; ++p) {
      if (f.piece_weight[p] <= 0) continue;
      double a = kernels::max_value(f.t.data() + f.piece_begin[p],
                                    f.piece_end[p] - f.piece_begin[p]);
      m = std::max(m, f.piece_logw[p] + a);
    }
    double s = 0.0;
    for (int p = f.group_begin[g]; p < f.group_end[g]; ++p) {
      if (f.piece_weight[p] <= 0) continue;
      double a = kernels::max_value(f.t.data() + f.piece_begin[p],
                                    f.piece_end[p] - f.piece_begin[p]);
      s += std::exp(f.piece_logw[p] + a - m);
    }
    best = std::max(best, m + std::log(s));
  }
  return best;
}

struct SmoothEval {
  double value = 0.0;
  Vec grad;
  DenseMatrix hess;
  Vec group_value;                  // smoothed f_g
  Vec group_weight;                 // outer softmax gamma_g
  std::vector<Vec> group_grad;      // per-group gradients
  std::vector<Vec> joint;           // per group: joint piece x alt softmax weights (flat alt index)
};

// Smoothed objective F_mu(h) = (1/mu) log sum_g exp(mu f_g(h)) with
// f_g = log sum_p w_p (sum_k exp(mu a_pk))^{1/mu}. Gradient and (optionally)
// Hessian by the closed forms; everything accumulated in a fixed order.
void smooth_eval(const Flat& f, const Vec& h, double mu, bool want_hess,
                 bool want_joint, SmoothEval& out) {
  const int d = f.dim;
  compute_exponents(f, h);
  const int n_pieces = static_cast<int>(f.piece_logw.size());

  // per-piece smoothed max, alt weights
  std::vector<double> psi(n_pieces);
  for (int p = 0; p < n_pieces; ++p) {
    const int b = f.piece_begin[p], e = f.piece_end[p], n = e - b;
    double A = kernels::max_value(f.t.data() + b, n);
    double E = kernels::exp_weighted(f.t.data() + b, nullptr, A / 1.0, f.ew.data() + b, n);
    // scale exponents by mu: exp(mu (a - A)); recompute with scaled input
    if (mu != 1.0) {
      for (int k = b; k < e; ++k) f.beta[k] = mu * (f.t[k] - A);
      E = kernels::exp_weighted(f.beta.data() + b, nullptr, 0.0, f.ew.data() + b, n);
    }
    for (int k = b; k < e; ++k) f.beta[k] = f.ew[k] / E;
    psi[p] = A + std::log(E) / mu;
  }

  out.group_value.assign(f.n_groups, 0.0);
  out.group_grad.assign(f.n_groups, Vec(d, 0.0));
  if (want_joint) out.joint.assign(f.n_groups, Vec());
  std::vector<DenseMatrix> group_hess;
  if (want_hess) group_hess.assign(f.n_groups, DenseMatrix(d, d));

  std::vector<double> mvec(d);
  std::vector<double> pi;
  for (int g = 0; g < f.n_groups; ++g) {
    const int pb = f.group_begin[g], pe = f.group_end[g];
    double M = kNegInf;
    for (int p = pb; p < pe; ++p)
      if (f.piece_weight[p] > 0) M = std::max(M, f.piece_logw[p] + psi[p]);
    double S = 0.0;
    pi.assign(pe - pb, 0.0);
    for (int p = pb; p < pe; ++p) {
      if (f.piece_weight[p] <= 0) continue;
      pi[p - pb] = std::exp(f.piece_logw[p] + psi[p] - M);
      S += pi[p - pb];
    }
    out.group_value[g] = M + std::log(S);
    Vec& gg = out.group_grad[g];
    DenseMatrix* GH = want_hess ? &group_hess[g] : nullptr;
    if (want_joint) out.joint[g].assign(f.alt_offset.size(), 0.0);
    for (int p = pb; p < pe; ++p) {
      double share = pi[p - pb] / S;
      if (share == 0.0) continue;
      const int b = f.piece_begin[p], e = f.piece_end[p], n = e - b;
      // piece mean slope
      for (int i = 0; i < d; ++i)
        mvec[i] = kernels::dot(f.beta.data() + b, f.alt_slope[i].data() + b, n);
      for (int i = 0; i < d; ++i) gg[i] += share * mvec[i];
      if (want_joint)
        for (int k = b; k < e; ++k) out.joint[g][k] = share * f.beta[k];
      if (GH) {
        for (int i = 0; i < d; ++i)
          for (int j = i; j < d; ++j) {
            double sij = kernels::dot3(f.beta.data() + b, f.alt_slope[i].data() + b,
                                       f.alt_slope[j].data() + b, n);
            double vij = sij - mvec[i] * mvec[j];
            double add = share * (mu * vij + mvec[i] * mvec[j]);
            GH->at(i, j) += add;
            if (i != j) GH->at(j, i) += add;
          }
      }
    }
    if (GH) {
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) GH->at(i, j) -= gg[i] * gg[j];
    }
  }

  // outer softmax over groups
  double N = kNegInf;
  for (int g = 0; g < f.n_groups; ++g) N = std::max(N, out.group_value[g]);
  double Z = 0.0;
  out.group_weight.assign(f.n_groups, 0.0);
  for (int g = 0; g < f.n_groups; ++g) {
    out.group_weight[g] = std::exp(mu * (out.group_value[g] - N));
    Z += out.group_weight[g];
  }
  for (int g = 0; g < f.n_groups; ++g) out.group_weight[g] /= Z;
  out.value = N + std::log(Z) / mu;
  out.grad.assign(d, 0.0);
  for (int g = 0; g < f.n_groups; ++g)
    add_scaled(out.grad, out.group_weight[g], out.group_grad[g]);
  if (want_hess) {
    out.hess = DenseMatrix(d, d);
    for (int g = 0; g < f.n_groups; ++g) {
      double w = out.group_weight[g];
      if (w == 0.0) continue;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          out.hess.at(i, j) +=
              w * (group_hess[g].at(i, j) +
                   mu * out.group_grad[g][i] * out.group_grad[g][j]);
    }
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out.hess.at(i, j) -= mu * out.grad[i] * out.grad[j];
  }
}

// Strict recession direction: v with s.v < 0 for every alternate of every
// positively weighted piece. Found by a small LP; certifies that the
// objective is unbounded below (the numerical face of one-period arbitrage).
bool find_recession(const Flat& f, Vec& direction, const SolverConfig& cfg) {
  LpBuilder lp;
  std::vector<int> vp(f.dim), vm(f.dim);
  for (int i = 0; i < f.dim; ++i) {
    vp[i] = lp.add_var(LpBuilder::Sign::kNonNeg);
    vm[i] = lp.add_var(LpBuilder::Sign::kNonNeg);
  }
  int delta = lp.add_var(LpBuilder::Sign::kNonNeg, 1.0);
  for (std::size_t p = 0; p < f.piece_logw.size(); ++p) {
    if (f.piece_weight[p] <= 0) continue;
    for (int k = f.piece_begin[p]; k < f.piece_end[p]; ++k) {
      int row = lp.add_row(LpBuilder::Rel::kLe, 0.0);
      for (int i = 0; i < f.dim; ++i) {
        double s = f.alt_slope[i][k];
        if (s != 0.0) {
          lp.add_term(row, vp[i], s);
          lp.add_term(row, vm[i], -s);
        }
      }
      lp.add_term(row, delta, 1.0);
    }
  }
  for (int i = 0; i < f.dim; ++i) {
    int r1 = lp.add_row(LpBuilder::Rel::kLe, 1.0);
    lp.add_term(r1, vp[i], 1.0);
    int r2 = lp.add_row(LpBuilder::Rel::kLe, 1.0);
    lp.add_term(r2, vm[i], 1.0);
  }
  LpResult res = lp.solve(cfg);
  if (res.status != LpStatus::kOptimal || res.value <= 1e-9) return false;
  direction.assign(f.dim, 0.0);
  for (int i = 0; i < f.dim; ++i) direction[i] = res.x[vp[i]] - res.x[vm[i]];
  return true;
}

struct StageResult {
  Vec h;
  double grad_norm = 0.0;
  int iterations = 0;
};

// Damped Newton on the smoothed objective at fixed mu.
StageResult newton_stage(const Flat& f, Vec h, double mu, const SolverConfig& cfg,
                         int iter_cap) {
  const int d = f.dim;
  SmoothEval ev;
  double lambda = 0.0;
  StageResult st;
  Vec dir(d), trial(d);
  smooth_eval(f, h, mu, true, false, ev);
  for (int it = 0; it < iter_cap; ++it) {
    double gn = norm2(ev.grad);
    st.grad_norm = gn;
    if (gn <= cfg.grad_tol) break;
    double trace = 0.0;
    for (int i = 0; i < d; ++i) trace += ev.hess.at(i, i);
    double base = 1e-12 * (1.0 + trace / d);
    Vec rhs = scaled(ev.grad, -1.0);
    double damp = std::max(lambda, base);
    bool solved = false;
    for (int tries = 0; tries < 60; ++tries) {
      if (solve_spd(ev.hess, damp, rhs, dir)) {
        if (dot(dir, ev.grad) < 0) {
          solved = true;
          break;
        }
      }
      damp = std::max(damp * 10.0, base * 10.0);
    }
    if (!solved) break;
    lambda = damp;
    double dd = dot(ev.grad, dir);
    double step = 1.0;
    double f0 = ev.value;
    bool moved = false;
    SmoothEval trial_ev;
    while (step > 1e-16) {
      trial = h;
      add_scaled(trial, step, dir);
      smooth_eval(f, trial, mu, true, false, trial_ev);
      if (trial_ev.value <= f0 + cfg.suff_decrease * step * dd) {
        h = trial;
        ev = trial_ev;
        moved = true;
        break;
      }
      step *= cfg.backtrack;
    }
    ++st.iterations;
    if (!moved) {
      lambda = std::max(lambda * 100.0, 1e-6 * (1.0 + trace / d));
      SmoothEval redo;
      smooth_eval(f, h, mu, true, false, redo);
      ev = redo;
      if (lambda > 1e12 * (1.0 + trace / d)) break;
      continue;
    }
    lambda *= 0.1;
  }
  st.h = h;
  return st;
}

// Min-norm point in the convex hull of the columns of G (d x k), by
// projected gradient on the weight simplex. Returns the attained norm.
double min_norm_in_hull(const std::vector<Vec>& grads) {
  const int k = static_cast<int>(grads.size());
  if (k == 0) return std::numeric_limits<double>::infinity();
  const int d = static_cast<int>(grads[0].size());
  Vec lam(k, 1.0 / k);
  // Lipschitz bound for the quadratic
  double L = 0.0;
  for (const auto& g : grads) L = std::max(L, dot(g, g));
  L = std::max(L * k, 1e-12);
  Vec point(d), grad_l(k), work(k);
  for (int it = 0; it < 500; ++it) {
    point.assign(d, 0.0);
    for (int j = 0; j < k; ++j) add_scaled(point, lam[j], grads[j]);
    for (int j = 0; j < k; ++j) grad_l[j] = 2.0 * dot(grads[j], point);
    // projected gradient step onto the simplex
    for (int j = 0; j < k; ++j) work[j] = lam[j] - grad_l[j] / L;
    // Euclidean projection onto the simplex (sort-based)
    Vec u = work;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, theta = 0.0;
    int rho = 0;
    for (int j = 0; j < k; ++j) {
      css += u[j];
      double t = (css - 1.0) / (j + 1);
      if (u[j] - t > 0) {
        rho = j + 1;
        theta = t;
      }
    }
    double moved = 0.0;
    for (int j = 0; j < k; ++j) {
      double nv = std::max(0.0, work[j] - theta);
      moved += std::abs(nv - lam[j]);
      lam[j] = nv;
    }
    if (moved < 1e-14) break;
  }
  point.assign(d, 0.0);
  for (int j = 0; j < k; ++j) add_scaled(point, lam[j], grads[j]);
  return norm2(point);
}

MinimaxResult run_minimax(const std::vector<LseGroup>& groups, const Vec& h0,
                          const SolverConfig& cfg) {
  cfg.validate();
  if (groups.empty()) throw std::invalid_argument("minimize_max_lse: no groups");
  const int d = static_cast<int>(h0.size());
  Flat f = flatten(groups, d);

  MinimaxResult res;
  res.h = h0;

  Vec rec;
  if (find_recession(f, rec, cfg)) {
    res.status = LseStatus::kUnbounded;
    res.recession = rec;
    res.value = kNegInf;
    return res;
  }

  const bool single_smooth = (f.n_groups == 1 &&
                              f.alt_offset.size() == f.piece_logw.size());
  std::vector<double> schedule;
  if (single_smooth) {
    schedule = {1.0};  // objective already smooth; no homotopy needed
  } else {
    schedule = cfg.mu_schedule;
    double mu = schedule.back();
    while (mu * 10.0 <= cfg.mu_extension_max) {
      mu *= 10.0;
      schedule.push_back(mu);
    }
  }

  Vec h = h0;
  int total_iter = 0;
  double best_exact = exact_value(f, h);
  Vec best_h = h;
  double final_grad = 0.0;
  for (double mu : schedule) {
    int cap = std::min(cfg.max_iter, 200);
    StageResult st = newton_stage(f, h, mu, cfg, cap);
    h = st.h;
    total_iter += st.iterations;
    final_grad = st.grad_norm;
    double ex = exact_value(f, h);
    if (ex < best_exact) {
      best_exact = ex;
      best_h = h;
    }
    if (total_iter >= cfg.max_iter && mu >= cfg.mu_schedule.back()) break;
  }

  res.h = best_h;
  res.value = best_exact;
  res.iterations = total_iter;
  res.status = (final_grad <= cfg.grad_tol * 100.0 || total_iter < cfg.max_iter)
                   ? LseStatus::kOptimal
                   : LseStatus::kIterLimit;

  // saddle weights and active set at the final smoothing level
  SmoothEval ev;
  smooth_eval(f, res.h, schedule.back(), false, true, ev);
  res.saddle.group = ev.group_weight;
  res.saddle.alt.assign(f.n_groups, {});
  for (int g = 0; g < f.n_groups; ++g) {
    auto& per_piece = res.saddle.alt[g];
    per_piece.resize(f.group_end[g] - f.group_begin[g]);
    for (int p = f.group_begin[g]; p < f.group_end[g]; ++p) {
      Vec w(f.piece_end[p] - f.piece_begin[p], 0.0);
      for (int k = f.piece_begin[p]; k < f.piece_end[p]; ++k)
        w[k - f.piece_begin[p]] = ev.joint[g][k];
      per_piece[p - f.group_begin[g]] = std::move(w);
    }
  }

  std::vector<Vec> active_grads;
  double tol_active = 1e-7 * std::max(1.0, std::abs(res.value)) + 1e-12;
  for (int g = 0; g < f.n_groups; ++g) {
    if (ev.group_value[g] >= res.value - tol_active) {
      res.active_groups.push_back(g);
      active_grads.push_back(ev.group_grad[g]);
    }
  }
  res.certificate = min_norm_in_hull(active_grads);
  return res;
}

}  // namespace

double lse_value(const std::vector<LsePiece>& pieces, const Vec& h) {
  std::vector<LseGroup> groups(1);
  for (const auto& p : pieces)
    groups[0].pieces.push_back({p.weight, {{p.offset, p.slope}}});
  Flat f = flatten(groups, static_cast<int>(h.size()));
  return exact_value(f, h);
}

double max_lse_value(const std::vector<LseGroup>& groups, const Vec& h) {
  Flat f = flatten(groups, static_cast<int>(h.size()));
  return exact_value(f, h);
}

LseResult minimize_lse(const std::vector<LsePiece>& pieces, const Vec& h0,
                       const SolverConfig& cfg) {
  std::vector<LseGroup> groups(1);
  double total = 0.0;
  for (const auto& p : pieces) {
    groups[0].pieces.push_back({p.weight, {{p.offset, p.slope}}});
    total += p.weight;
  }
  if (total <= 0) throw std::invalid_argument("minimize_lse: total weight must be > 0");
  MinimaxResult mm = run_minimax(groups, h0, cfg);
  LseResult out;
  out.status = mm.status;
  out.h = mm.h;
  out.value = mm.value;
  out.recession = mm.recession;
  out.iterations = mm.iterations;
  out.grad_norm = mm.certificate;
  return out;
}

MinimaxResult minimize_max_lse(const std::vector<LseGroup>& groups, const Vec& h0,
                               const SolverConfig& cfg) {
  return run_minimax(groups, h0, cfg);
}

MinimaxResult minimize_max_lse(const std::vector<std::vector<LsePiece>>& groups,
                               const Vec& h0, const SolverConfig& cfg) {
  std::vector<LseGroup> gs(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (const auto& p : groups[g])
      gs[g].pieces.push_back({p.weight, {{p.offset, p.slope}}});
  return run_minimax(gs, h0, cfg);
}

KlResult kl_project(const Vec& q, const std::vector<Vec>& extremes,
                    const SolverConfig& cfg) {
  cfg.validate();
  if (extremes.empty()) throw std::invalid_argument("kl_project: no extreme points");
  const int n = static_cast<int>(q.size());
  const int K = static_cast<int>(extremes.size());
  for (const auto& p : extremes)
    if (static_cast<int>(p.size()) != n)
      throw std::invalid_argument("kl_project: dimension mismatch");

  // support feasibility: a charged child must be charged by some extreme
  for (int c = 0; c < n; ++c) {
    if (q[c] <= 0) continue;
    bool covered = false;
    for (const auto& p : extremes)
      if (p[c] > 0) {
        covered = true;
        break;
      }
    if (!covered)
      return {Vec(K, 0.0), std::numeric_limits<double>::infinity()};
  }

  auto kl_of = [&](const Vec& lam) {
    double v = 0.0;
    for (int c = 0; c < n; ++c) {
      if (q[c] <= 0) continue;
      double pc = 0.0;
      for (int k = 0; k < K; ++k) pc += lam[k] * extremes[k][c];
      if (pc <= 0) return std::numeric_limits<double>::infinity();
      v += q[c] * std::log(q[c] / pc);
    }
    return v;
  };

  if (K == 1) return {Vec(1, 1.0), kl_of(Vec(1, 1.0))};

  Vec lam(K, 1.0 / K);
  double value = kl_of(lam);
  double eta = 1.0;
  Vec grad(K), trial(K);
  for (int it = 0; it < 5000; ++it) {
    double pc;
    for (int k = 0; k < K; ++k) grad[k] = 0.0;
    for (int c = 0; c < n; ++c) {
      if (q[c] <= 0) continue;
      pc = 0.0;
      for (int k = 0; k < K; ++k) pc += lam[k] * extremes[k][c];
      for (int k = 0; k < K; ++k) grad[k] -= q[c] * extremes[k][c] / pc;
    }
    // exponentiated-gradient step with halving on failure
    bool improved = false;
    for (int half = 0; half < 40; ++half) {
      double gmin = *std::min_element(grad.begin(), grad.end());
      double Z = 0.0;
      for (int k = 0; k < K; ++k) {
        trial[k] = lam[k] * std::exp(-eta * (grad[k] - gmin));
        Z += trial[k];
      }
      for (int k = 0; k < K; ++k) trial[k] /= Z;
      double tv = kl_of(trial);
      if (tv <= value) {
        improved = true;
        double change = value - tv;
        lam = trial;
        value = tv;
        if (change <= tol::kKlRelChange * std::max(1.0, std::abs(value)))
          return {lam, value};
        eta = std::min(eta * 1.5, 64.0);
        break;
      }
      eta *= 0.5;
    }
    if (!improved) break;
  }
  return {lam, value};
}

// ---------------------------------------------------------------------------
// Dense revised simplex
// ---------------------------------------------------------------------------

namespace {

class Simplex {
 public:
  Simplex(const Vec& c, const DenseMatrix& A, const Vec& b, double pivot_tol)
      : m_(A.rows), n_(A.cols), piv_(pivot_tol), A_(A), b_(b), c_(c) {
    flip_.assign(m_, 1.0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (b_[i] < 0) {
        flip_[i] = -1.0;
        b_[i] = -b_[i];
        for (std::size_t j = 0; j < n_; ++j) A_.at(i, j) = -A_.at(i, j);
      }
    }
  }

  LpResult run() {
    // Phase 1: artificial identity basis
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) basis_[i] = static_cast<int>(n_ + i);
    binv_ = DenseMatrix(m_, m_);
    for (std::size_t i = 0; i < m_; ++i) binv_.at(i, i) = 1.0;
    xb_ = b_;

    Vec cost(n_ + m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) cost[n_ + i] = -1.0;
    LpStatus st = iterate(cost, /*allow_artificial=*/false);
    if (st == LpStatus::kIterLimit) return {st, {}, 0.0, {}};
    double infeas = 0.0;
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] >= static_cast<int>(n_)) infeas += xb_[i];
    if (infeas > 1e-8) return {LpStatus::kInfeasible, {}, 0.0, {}};

    // Phase 2: original objective; artificial columns may stay basic at zero
    // but never enter.
    Vec cost2(n_ + m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) cost2[j] = c_[j];
    st = iterate(cost2, false);
    if (st != LpStatus::kOptimal) return {st, {}, 0.0, {}};

    LpResult out;
    out.status = LpStatus::kOptimal;
    out.x.assign(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < static_cast<int>(n_)) out.x[basis_[i]] = std::max(0.0, xb_[i]);
    out.value = dot(out.x, c_);
    // duals for the original (unflipped) rows
    Vec y(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      double s = 0.0;
      for (std::size_t r = 0; r < m_; ++r) s += cost2[basis_[r]] * binv_.at(r, i);
      y[i] = s * flip_[i];
    }
    out.dual = y;
    return out;
  }

 private:
  double col_entry(std::size_t i, int j) const {
    return j < static_cast<int>(n_) ? A_.at(i, j) : (i == static_cast<std::size_t>(j) - n_ ? 1.0 : 0.0);
  }

  // d = Binv * column j
  void ftran(int j, Vec& d) const {
    d.assign(m_, 0.0);
    if (j >= static_cast<int>(n_)) {
      std::size_t k = j - n_;
      for (std::size_t i = 0; i < m_; ++i) d[i] = binv_.at(i, k);
      return;
    }
    for (std::size_t k = 0; k < m_; ++k) {
      double a = A_.at(k, j);
      if (a != 0.0)
        for (std::size_t i = 0; i < m_; ++i) d[i] += binv_.at(i, k) * a;
    }
  }

  void refactorize() {
    // rebuild Binv from the basis columns by Gauss-Jordan
    DenseMatrix B(m_, m_), inv(m_, m_);
    for (std::size_t i = 0; i < m_; ++i) {
      inv.at(i, i) = 1.0;
      for (std::size_t r = 0; r < m_; ++r) B.at(r, i) = col_entry(r, basis_[i]);
    }
    for (std::size_t col = 0; col < m_; ++col) {
      std::size_t p = col;
      double best = std::abs(B.at(col, col));
      for (std::size_t r = col + 1; r < m_; ++r)
        if (std::abs(B.at(r, col)) > best) {
          best = std::abs(B.at(r, col));
          p = r;
        }
      if (best <= 0) continue;  // singular basis should not happen
      if (p != col) {
        for (std::size_t j = 0; j < m_; ++j) {
          std::swap(B.at(p, j), B.at(col, j));
          std::swap(inv.at(p, j), inv.at(col, j));
        }
      }
      double piv = B.at(col, col);
      for (std::size_t j = 0; j < m_; ++j) {
        B.at(col, j) /= piv;
        inv.at(col, j) /= piv;
      }
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == col) continue;
        double fctr = B.at(r, col);
        if (fctr == 0.0) continue;
        for (std::size_t j = 0; j < m_; ++j) {
          B.at(r, j) -= fctr * B.at(col, j);
          inv.at(r, j) -= fctr * inv.at(col, j);
        }
      }
    }
    binv_ = inv;
    // refresh xb
    xb_.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      xb_[i] = kernels::dot(binv_.row(i), b_.data(), m_);
  }

  LpStatus iterate(const Vec& cost, bool allow_artificial) {
    const int max_pivots = 100000;
    Vec y(m_), d(m_);
    for (int pivots = 0; pivots < max_pivots; ++pivots) {
      // y = c_B Binv
      for (std::size_t i = 0; i < m_; ++i) {
        double s = 0.0;
        for (std::size_t r = 0; r < m_; ++r) s += cost[basis_[r]] * binv_.at(r, i);
        y[i] = s;
      }
      // Bland: entering = smallest index with positive reduced cost
      int enter = -1;
      std::size_t scan_limit = allow_artificial ? n_ + m_ : n_;
      for (std::size_t j = 0; j < scan_limit; ++j) {
        bool basic = false;
        for (std::size_t i = 0; i < m_; ++i)
          if (basis_[i] == static_cast<int>(j)) {
            basic = true;
            break;
          }
        if (basic) continue;
        double zj = cost[j];
        for (std::size_t i = 0; i < m_; ++i) {
          double aij = col_entry(i, static_cast<int>(j));
          if (aij != 0.0) zj -= y[i] * aij;
        }
        if (zj > piv_) {
          enter = static_cast<int>(j);
          break;
        }
      }
      if (enter < 0) return LpStatus::kOptimal;
      ftran(enter, d);
      int leave = -1;
      double best_ratio = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        if (d[i] > piv_) {
          double ratio = xb_[i] / d[i];
          if (leave < 0 || ratio < best_ratio - 1e-15 ||
              (std::abs(ratio - best_ratio) <= 1e-15 && basis_[i] < basis_[leave])) {
            leave = static_cast<int>(i);
            best_ratio = ratio;
          }
        }
      }
      if (leave < 0) return LpStatus::kUnbounded;
      // pivot
      double dl = d[leave];
      for (std::size_t j = 0; j < m_; ++j) binv_.at(leave, j) /= dl;
      for (std::size_t i = 0; i < m_; ++i) {
        if (static_cast<int>(i) == leave) continue;
        double fctr = d[i];
        if (fctr == 0.0) continue;
        for (std::size_t j = 0; j < m_; ++j)
          binv_.at(i, j) -= fctr * binv_.at(leave, j);
      }
      basis_[leave] = enter;
      for (std::size_t i = 0; i < m_; ++i)
        xb_[i] = kernels::dot(binv_.row(i), b_.data(), m_);
      for (std::size_t i = 0; i < m_; ++i)
        if (xb_[i] < 0 && xb_[i] > -1e-9) xb_[i] = 0.0;
      if ((pivots + 1) % 64 == 0) refactorize();
    }
    return LpStatus::kIterLimit;
  }

  std::size_t m_, n_;
  double piv_;
  DenseMatrix A_;
  Vec b_, c_, flip_, xb_;
  std::vector<int> basis_;
  DenseMatrix binv_;
};

}  // namespace

LpResult solve_lp(const Vec& c, const DenseMatrix& A, const Vec& b,
                  const SolverConfig& cfg) {
  cfg.validate();
  if (A.rows != b.size() || A.cols != c.size())
    throw std::invalid_argument("solve_lp: dimension mismatch");
  if (A.rows == 0) {
    // degenerate: unconstrained nonnegative maximization
    for (double cj : c)
      if (cj > 0) return {LpStatus::kUnbounded, {}, 0.0, {}};
    return {LpStatus::kOptimal, Vec(c.size(), 0.0), 0.0, {}};
  }
  Simplex s(c, A, b, cfg.lp_pivot);
  return s.run();
}

int LpBuilder::add_var(Sign sign, double objective_coef) {
  vars_.push_back(sign);
  obj_.push_back(objective_coef);
  return static_cast<int>(vars_.size()) - 1;
}

void LpBuilder::set_objective(int var, double coef) { obj_[var] = coef; }

int LpBuilder::add_row(Rel rel, double rhs) {
  rels_.push_back(rel);
  rhs_.push_back(rhs);
  return static_cast<int>(rels_.size()) - 1;
}

void LpBuilder::add_term(int row, int var, double coef) {
  terms_.push_back({row, var, coef});
}

LpResult LpBuilder::solve(const SolverConfig& cfg) const {
  // column layout: per var one or two columns, then one slack per inequality
  std::vector<int> col_of(vars_.size()), neg_col_of(vars_.size(), -1);
  std::size_t ncols = 0;
  for (std::size_t v = 0; v < vars_.size(); ++v) {
    col_of[v] = static_cast<int>(ncols++);
    if (vars_[v] == Sign::kFree) neg_col_of[v] = static_cast<int>(ncols++);
  }
  std::vector<int> slack_col(rels_.size(), -1);
  for (std::size_t r = 0; r < rels_.size(); ++r)
    if (rels_[r] != Rel::kEq) slack_col[r] = static_cast<int>(ncols++);

  DenseMatrix A(rels_.size(), ncols);
  Vec b = rhs_, c(ncols, 0.0);
  for (std::size_t v = 0; v < vars_.size(); ++v) {
    c[col_of[v]] = obj_[v];
    if (neg_col_of[v] >= 0) c[neg_col_of[v]] = -obj_[v];
  }
  for (const auto& t : terms_) {
    A.at(t.row, col_of[t.var]) += t.coef;
    if (neg_col_of[t.var] >= 0) A.at(t.row, neg_col_of[t.var]) -= t.coef;
  }
  for (std::size_t r = 0; r < rels_.size(); ++r) {
    if (rels_[r] == Rel::kLe) A.at(r, slack_col[r]) = 1.0;
    if (rels_[r] == Rel::kGe) A.at(r, slack_col[r]) = -1.0;
  }
  LpResult res = solve_lp(c, A, b, cfg);
  if (res.status != LpStatus::kOptimal) return res;
  Vec x(vars_.size(), 0.0);
  for (std::size_t v = 0; v < vars_.size(); ++v) {
    x[v] = res.x[col_of[v]];
    if (neg_col_of[v] >= 0) x[v] -= res.x[neg_col_of[v]];
  }
  res.x = std::move(x);
  return res;
}

}  // namespace rhedge::solvers
