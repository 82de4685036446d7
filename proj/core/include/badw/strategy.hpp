#pragma once

#include "badw/diophantine.hpp"
#include "badw/fractal.hpp"
#include "badw/games.hpp"
#include "badw/linalg.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace badw {

// One inequality the parameters are supposed to satisfy, in log form.
struct ParamCondition {
  std::string name;
  Real lhs, rhs;  // satisfied iff lhs <= rhs
  bool ok = false;
};

struct ParamOptions {
  std::optional<long> overrideS;
  // Keep going when beta cannot be refined far enough; the result is flagged.
  bool allowNonCompliant = false;
  int maxM = 64;
};

struct StrategyParams {
  WeightVector w;
  int d = 0, t = 0;
  long s = 0;
  long sFormula = 0;
  Real eta, alphaPrime;
  Real betaSeed, beta, logBeta, logB;  // b = beta^{-1/(1+w_1)}
  long M = 1;                          // beta = betaSeed^M
  Real r0, alpha, A;
  Real gamma, Cprime;  // configured nondivergence constants
  std::vector<ParamCondition> conditions;
  bool compliant = true;
  std::string banner;  // empty when compliant

  Real b() const { return exp(logB); }
  Real budget(int i) const { return cantor_budget(beta, alphaPrime, i); }
};

// Closed forms for s and eta.
long formula_s(const WeightVector& w);
Real formula_eta(const WeightVector& w, long s, const Real& alpha, const Real& gamma);

// Fails with ParamInfeasible when eta <= 0, alpha' < 0, or (unless allowed) when
// no M <= maxM satisfies every condition.
StrategyParams derive_params(const WeightVector& w, const Real& alpha, const Real& A, const Real& gamma,
                             const Real& Cprime, const Real& r0, const Real& betaSeed, const ParamOptions& opt = {});

struct DangerousSetSpec {
  long k = 0, ell = 0, n = 0;
  Real eps;
};

// Raw specs whose union is A_{n+1,i} (several for n = 0, at most one otherwise).
std::vector<DangerousSetSpec> raw_specs(const StrategyParams& p, long n, int i);
// Family indices i with a nonempty spec list, i <= maxI.
std::vector<int> active_indices(const StrategyParams& p, long n, int maxI);

struct DangerCheck {
  bool dangerous = false;
  Real systole;
};

// d_l a_k u_x Z^{d+1} outside K_eps. The lattice is reduced at the precision
// the distortion of d_l a_k actually needs.
DangerCheck danger_check(const RVec& x, const DangerousSetSpec& spec, const StrategyParams& p);
bool is_dangerous(const RVec& x, const DangerousSetSpec& spec, const StrategyParams& p);

// Relative change of every lattice vector of d_l a_k u_x Z^{d+1} when x moves
// by at most delta.
Real perturbation_factor(const DangerousSetSpec& spec, const StrategyParams& p, const Real& delta);

struct AuditEntry {
  long n = 0;
  int i = 0;
  bool exact = true;
  long clusters = 0;  // clusters examined
  long count = 0;     // exact: cover size; sampled: clusters hit
  Real estimate;      // exact: count; sampled: upper confidence bound on the cover size
  Real budget;
  Real headroom;      // budget - estimate
  bool pass = false;
};

struct AuditOptions {
  long exactLimit = 10000;  // largest cluster count examined exhaustively
  long samples = 500;
  double delta = 1e-6;      // failure probability of each sampled bound
  std::uint64_t seed = 1;
};

struct AuditReport {
  std::vector<AuditEntry> entries;
  bool allPass = true;
};

// Alice's strategy on a tree measure whose game beta is tree beta^M. Dangerous
// sets are sampled on the node centres two tree levels below the cover radius;
// every cover ball then blocks exactly one node of Bob's next scale.
class BadwStrategy : public AliceStrategy {
public:
  BadwStrategy(StrategyParams p, TreeMeasure mu);
  ~BadwStrategy() override;

  std::string name() const override { return "badw"; }
  AliceMove move(const GameView& g) override;

  const StrategyParams& params() const;
  const TreeMeasure& measure() const;
  // Proxies of family (n, i) in the cluster `c` that survive the overlap removal.
  std::vector<NodeRef> surviving_proxies(long n, int i, const NodeRef& c);
  // Depth of the clusters / proxies of family (n, i) in the tree.
  int cluster_depth(long n, int i) const;
  // Balls of the efficient cover of family (n, i) meeting the node `region`
  // (a node inside the B_n of Alice's move n+1).
  std::vector<Ball> family_near(long n, int i, const NodeRef& region);
  // SVP calls so far.
  long svp_calls() const;

private:
  friend AuditReport audit_legality(BadwStrategy&, const GameTranscript&, const AuditOptions&);
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Budget check for one family.
AuditEntry audit_family(long n, int i, long count, const StrategyParams& p);
// Every family (n, i) that became active within the transcript.
AuditReport audit_legality(BadwStrategy& S, const GameTranscript& t, const AuditOptions& opt = {});

struct KeyLemmaQuintuple {
  long h = 0, k = 0, ell = 0, m = 0, n = 0;
};

struct KeyLemmaReport {
  bool applicable = false;    // assumptions hold (or the n = 0 regime applies)
  std::string why;            // reason when not applicable
  Real tau;
  long samples = 0;
  Real massA;                 // estimate of mu(A^{k,l,n}_eps) / mu(B_n)
  Real bound1;                // C' eps^gamma
  bool result1 = false;
  Real r, epsPrime;
  Real massNbhd;              // estimate of mu(A_{eps'}(2 B_n)) / mu(B_n), which contains B(A, r)
  Real bound2;                // C' eps'^gamma
  bool result2 = false;
};

// Sampling check of the measure bounds at the node Bn of mu.
KeyLemmaReport verify_keylemma_empirical(const KeyLemmaQuintuple& q, const RVec& xTilde, const NodeRef& Bn,
                                         const TreeMeasure& mu, const Real& eps, const Real& r, const StrategyParams& p,
                                         long samples, std::uint64_t seed);

// Decay of mu(A^{k,l,0}_eps) over a list of eps in the n = 0 regime. gammaEmp is
// the least-squares slope of log mass against log eps over the eps with hits;
// both bounds are then rechecked at gamma = min(gammaEmp / 2, gammaCap).
struct KeyLemmaSweep {
  long k = 0, ell = 0;
  std::vector<Real> eps;
  std::vector<KeyLemmaReport> reports;  // bounds at gammaCfg once fitted
  int fitPoints = 0;
  std::optional<Real> gammaEmp;         // absent with fewer than two usable points
  Real gammaCfg;
  bool result1 = false, result2 = false;
  bool pass = false;                    // gammaEmp > 0 and both results at every eps
};

KeyLemmaSweep keylemma_sweep(long k, long ell, const std::vector<Real>& eps, const TreeMeasure& mu, const NodeRef& Bn,
                             const Real& r, const StrategyParams& p, long samples, std::uint64_t seed,
                             const Real& gammaCap = Real("0.1"));
std::string keylemma_sweep_to_json(const KeyLemmaSweep& s);

struct CertificateCheck {
  long n = 0, ell = 0, k = 0;
  Real systole, threshold;
  bool pass = false;
};

struct Certificate {
  RVec xhat;
  long horizon = 0, Nextra = 0;
  std::vector<CertificateCheck> visited;
  Real epsilonStar;
  bool orbitAboveEpsStar = false;
  OrbitReport orbit;        // up to horizon + Nextra
  Real floorAtHorizon;      // orbit minimum up to the horizon
  Real stability;           // |floor(horizon + Nextra) - floor(horizon)| / floor(horizon)
  std::optional<BadnessReport> badness;
  bool pass = false;
};

// Specs enforced by round `horizon`: every (n, i) with n + 1 + i <= horizon.
std::vector<DangerousSetSpec> visited_specs(const StrategyParams& p, long horizon);

// CertificateFailure (listing every violated check) unless all checks pass.
Certificate outcome_certificate(const RVec& xhat, const std::vector<DangerousSetSpec>& visited, const StrategyParams& p,
                                long horizon, long Nextra, long badnessQ = 0);
// The same checks, reported instead of thrown.
Certificate evaluate_certificate(const RVec& xhat, const std::vector<DangerousSetSpec>& visited,
                                 const StrategyParams& p, long horizon, long Nextra, long badnessQ = 0);
std::string certificate_to_json(const Certificate& c, const StrategyParams& p);

// log d_l a_{n+1+s l} for 0 <= n' <= n, 0 <= l <= lmax, in units of -log beta.
struct DiagCoord {
  long n = 0, ell = 0, k = 0;
  bool firstTurn = false;  // l >= (n+1)/s: handled by Alice's first move
  RVec logs;
};
std::vector<DiagCoord> diag_coords(const WeightVector& w, long s, long n, long lmax);

std::string params_to_json(const StrategyParams& p);
std::string audit_to_json(const AuditReport& a);

// End-to-end run: triangle-tree support, Alice = BadwStrategy, Bob = tree_bob.
// Numbers are given as rationals or decimals so the run fixes its own precision.
struct BadwRunConfig {
  std::string w = "2/3,1/3";
  std::string betaSeed = "1/16777216";
  std::string r0 = "1/2";
  std::string gamma = "1/10";
  std::string Cprime = "10";
  std::optional<long> overrideS;
  bool allowNonCompliant = true;
  int rounds = 25;
  std::uint64_t seed = 1;
  unsigned precision = 1536;
  bool audit = true;
  AuditOptions auditOptions;  // its seed is replaced by `seed`
  long Nextra = -1;           // -1: same as rounds
  long badnessQ = 10000;
};

struct BadwRun {
  StrategyParams params;
  GameTranscript transcript;
  std::string transcriptJsonl;
  std::optional<AuditReport> audit;
  std::optional<Certificate> certificate;
  std::string certificateJson;
  bool bobDefaulted = false;
  long svpCalls = 0;
};

// The parameters run_badw derives (at the caller's working precision).
StrategyParams badw_run_params(const BadwRunConfig& c);
BadwRun run_badw(const BadwRunConfig& c);

}  // namespace badw
