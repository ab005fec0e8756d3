#pragma once

// Central numeric tolerances. Every module and test pins its thresholds here
// so there is a single source of truth.

namespace rhedge::tol {

// Input validation
inline constexpr double kProbMass        = 1e-12;  // prior vectors must sum to 1 within this
inline constexpr double kMartingaleCert  = 1e-9;   // martingale residual of the NA2 certificate
inline constexpr double kLpSlack         = 1e-10;  // LP slack below this counts as zero

// Convex solvers
inline constexpr double kGradTol         = 1e-9;   // Newton / descent gradient norm target
inline constexpr int    kMaxIter         = 500;
inline constexpr double kBacktrack       = 0.5;    // line-search shrink factor
inline constexpr double kSuffDecrease    = 1e-4;   // Armijo constant
inline constexpr double kLpPivot         = 1e-10;  // simplex pivot tolerance
inline constexpr double kKlRelChange     = 1e-11;  // kl_project stopping rule
inline constexpr double kMinimaxValue    = 1e-7;   // minimize_max_lse value accuracy
inline constexpr double kActiveSetCert   = 1e-6;   // 0-in-hull residual for minimax certificates

// Primal / dual contracts
inline constexpr double kReplay          = 1e-6;   // strategy replay must reproduce the value
inline constexpr double kDualityGapRel   = 1e-4;   // |L - dual| <= this * max(1,|L|)
inline constexpr double kWeakDuality     = 1e-9;   // feasible dual value <= L + this
inline constexpr double kMartingaleDual  = 1e-8;   // martingale residual of dual measures
inline constexpr double kGibbsMartingale = 1e-6;   // residual before the exact tilt polish
inline constexpr double kGridInvariance  = 1e-9;   // V between m=2 and m=5
inline constexpr double kReformulation   = 1e-12;  // transfer identity (exact closed form)
inline constexpr double kDominanceCert   = 1e-10;  // transfers_to_strategy certificate

// Pricing
inline constexpr double kSuperhedgeLp    = 1e-7;   // two superhedge LPs must agree
inline constexpr double kSweepMonotone   = 1e-7;   // gamma sweep monotonicity slack
inline constexpr double kShortfall       = 1e-7;   // shortfall bound slack
inline constexpr double kPropSuite       = 1e-8;   // property-suite equalities
inline constexpr double kPropScaling     = 1e-7;   // volume-scaling property

// Divergence guard for the static-position search
inline constexpr double kStaticDiverge   = 1e6;

}  // namespace rhedge::tol
