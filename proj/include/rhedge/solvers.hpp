#pragma once

#include <limits>
#include <string>
#include <vector>

#include "rhedge/linalg.hpp"
#include "rhedge/tolerances.hpp"

// Convex-optimization toolbox: smooth log-sum-exp minimization, nonsmooth
// minimax via a smoothing homotopy, KL projection onto prior hulls, and a
// dense revised simplex. All routines are deterministic: fixed summation
// order, fixed pivoting rules, no randomization.

namespace rhedge::solvers {

struct SolverConfig {
  double grad_tol = tol::kGradTol;
  int max_iter = tol::kMaxIter;
  std::vector<double> mu_schedule = {1.0, 10.0, 100.0, 1000.0, 10000.0};
  double mu_extension_max = 1e9;  // homotopy keeps doubling decades while it helps
  double backtrack = tol::kBacktrack;
  double suff_decrease = tol::kSuffDecrease;
  double lp_pivot = tol::kLpPivot;

  void validate() const;
};

enum class LseStatus { kOptimal, kUnbounded, kIterLimit };

struct LsePiece {
  double weight = 0.0;  // >= 0
  double offset = 0.0;
  Vec slope;
};

struct LseResult {
  LseStatus status = LseStatus::kOptimal;
  Vec h;
  double value = 0.0;      // exact objective at h
  double grad_norm = 0.0;  // residual at h
  Vec recession;           // certificate direction when unbounded
  int iterations = 0;
};

// min_h log sum_j w_j exp(offset_j + h.slope_j)
LseResult minimize_lse(const std::vector<LsePiece>& pieces, const Vec& h0,
                       const SolverConfig& cfg = {});

// One alternate of a max-piece: the piece evaluates to
// weight * exp(max_k (offset_k + h.slope_k)).
struct LseAlt {
  double offset = 0.0;
  Vec slope;
};

struct MaxPiece {
  double weight = 0.0;
  std::vector<LseAlt> alts;
};

struct LseGroup {
  std::vector<MaxPiece> pieces;
};

// Saddle weights from the final smoothing stage: outer group weights and,
// per group, the joint piece x alternate softmax shares. Consumers use them
// to assemble dual (Gibbs) candidates.
struct SaddleWeights {
  Vec group;
  std::vector<std::vector<Vec>> alt;  // [group][piece][alt]
};

struct MinimaxResult {
  LseStatus status = LseStatus::kOptimal;
  Vec h;
  double value = 0.0;  // exact max over groups at h
  std::vector<int> active_groups;
  double certificate = std::numeric_limits<double>::infinity();  // 0-in-hull residual
  Vec recession;
  int iterations = 0;
  SaddleWeights saddle;
};

// min_h max_g log sum_p w_p exp(max_k (o_pk + h.s_pk))
MinimaxResult minimize_max_lse(const std::vector<LseGroup>& groups, const Vec& h0,
                               const SolverConfig& cfg = {});

// Convenience overload for plain piece lists (no alternates).
MinimaxResult minimize_max_lse(const std::vector<std::vector<LsePiece>>& groups,
                               const Vec& h0, const SolverConfig& cfg = {});

// Exact (mu = infinity) evaluation helpers.
double lse_value(const std::vector<LsePiece>& pieces, const Vec& h);
double max_lse_value(const std::vector<LseGroup>& groups, const Vec& h);

struct KlResult {
  Vec weights;         // mixture over the extreme points
  double value = 0.0;  // inf_lambda KL(q || sum_k lambda_k p_k); +inf on support gap
};

KlResult kl_project(const Vec& q, const std::vector<Vec>& extremes,
                    const SolverConfig& cfg = {});

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterLimit };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Vec x;
  double value = 0.0;
  Vec dual;  // row multipliers y with c - A^T y <= 0 at optimum
};

// max c.x subject to A x = b, x >= 0 (dense revised simplex, Bland's rule).
LpResult solve_lp(const Vec& c, const DenseMatrix& A, const Vec& b,
                  const SolverConfig& cfg = {});

// Small helper for assembling LPs with free variables and inequality rows,
// lowered to the standard form above (free vars split, slacks added).
class LpBuilder {
 public:
  enum class Sign { kNonNeg, kFree };
  enum class Rel { kEq, kLe, kGe };

  int add_var(Sign sign, double objective_coef = 0.0);
  void add_term(int row, int var, double coef);
  int add_row(Rel rel, double rhs);
  void set_objective(int var, double coef);

  LpResult solve(const SolverConfig& cfg = {}) const;  // maximizes

 private:
  struct Term {
    int row, var;
    double coef;
  };
  std::vector<Sign> vars_;
  std::vector<double> obj_;
  std::vector<Rel> rels_;
  std::vector<double> rhs_;
  std::vector<Term> terms_;
};

}  // namespace rhedge::solvers
