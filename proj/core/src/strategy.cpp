#include "badw/strategy.hpp"

#include "badw/lattice.hpp"

#include "json.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <tuple>

namespace badw {

namespace {

Int ceil_q(const Rational& q) {
  Int n = numerator(q), d = denominator(q);
  Int f = n / d;
  if (f * d != n && n > 0) f += 1;
  return f;
}

Real weight(const WeightVector& w, int i) { return i < w.d() ? w.w[i] : Real(0); }

std::string spec_str(const DangerousSetSpec& s) {
  return "(k=" + std::to_string(s.k) + ", l=" + std::to_string(s.ell) + ", n=" + std::to_string(s.n) + ")";
}

DiagonalElement spec_diag(const DangerousSetSpec& s, const StrategyParams& p) {
  return make_d_log(s.ell, p.logBeta, p.t, p.d) * make_a_log(s.k, p.logB, p.w);
}

}  // namespace

// ---------------------------------------------------------------------------
// Parameters

long formula_s(const WeightVector& w) {
  require(w.sorted && w.strict, Errc::InvalidArgument, "weights must be positive and sorted decreasingly");
  const int d = w.d(), t = w.t;
  if (w.exact) {
    const QVec& q = *w.exact;
    const Rational w1 = q[0], wt1 = t < d ? q[t] : Rational(0);
    const Int a = ceil_q((1 + w1) / (w1 - wt1));
    const Int b = ceil_q((2 * (1 + w1) + 1) / w1);
    return std::max<long>({5L, a.convert_to<long>(), b.convert_to<long>()});
  }
  const Real w1 = w.w[0], wt1 = weight(w, t);
  const long a = static_cast<long>(ceil((1 + w1) / (w1 - wt1)).convert_to<double>());
  const long b = static_cast<long>(ceil((2 * (1 + w1) + 1) / w1).convert_to<double>());
  return std::max({5L, a, b});
}

Real formula_eta(const WeightVector& w, long s, const Real& alpha, const Real& gamma) {
  const int d = w.d();
  const Real w1 = w.w[0], wd = w.w[d - 1];
  const Real den = 2 * d * (1 + w1);
  return std::min({Real(1) / (4 * (d + 1)), wd * s / den, (w1 * s - 2 * (1 + w1)) / den, alpha / gamma});
}

StrategyParams derive_params(const WeightVector& w, const Real& alpha, const Real& A, const Real& gamma,
                             const Real& Cprime, const Real& r0, const Real& betaSeed, const ParamOptions& opt) {
  require(w.sorted && w.strict, Errc::InvalidArgument, "weights must be positive and sorted decreasingly");
  require(betaSeed > 0 && betaSeed < 1, Errc::InvalidArgument, "beta seed must lie in (0, 1)");
  require(gamma > 0 && Cprime > 0, Errc::InvalidArgument, "gamma and C' must be positive");
  require(alpha > 0 && A >= 1 && r0 > 0, Errc::InvalidArgument, "need alpha > 0, A >= 1, r0 > 0");
  require(opt.maxM >= 1, Errc::InvalidArgument, "maxM must be >= 1");
  StrategyParams p;
  p.w = w;
  p.d = w.d();
  p.t = w.t;
  p.sFormula = formula_s(w);
  p.s = opt.overrideS.value_or(p.sFormula);
  require(p.s >= 2, Errc::InvalidArgument, "s must be >= 2");
  p.eta = formula_eta(w, p.s, alpha, gamma);
  if (!(p.eta > 0))
    fail(Errc::ParamInfeasible, "eta = " + to_decimal(p.eta) + " <= 0 for s = " + std::to_string(p.s));
  p.alphaPrime = alpha - gamma * p.eta / (4 * (p.s - 1));
  if (!(p.alphaPrime >= 0 && p.alphaPrime < alpha))
    fail(Errc::ParamInfeasible, "alpha' = " + to_decimal(p.alphaPrime) + " outside [0, alpha)");
  p.betaSeed = betaSeed;
  p.r0 = r0;
  p.alpha = alpha;
  p.A = A;
  p.gamma = gamma;
  p.Cprime = Cprime;

  const int d = p.d;
  const Real w1 = w.w[0], wd = w.w[d - 1];
  const Real den = 2 * d * (1 + w1);
  const Real e1 = (w1 * p.s - 2 * (1 + w1)) / den, e2 = wd * p.s / den;
  const Real lsq2d = log(sqrt(Real(2)) * d);
  const Real lconst = log(A * A * Cprime * pow(Real(2), gamma + 1) * pow(3 / r0, alpha));

  auto beta_conditions = [&](const Real& lb) {
    std::vector<ParamCondition> c;
    c.push_back({"beta-vs-sqrt2d-a", lsq2d, -e1 * lb, false});
    c.push_back({"beta-vs-sqrt2d-b", lsq2d, -e2 * lb, false});
    c.push_back({"beta-vs-r0", log(sqrt(Real(d + 1)) / r0), -lb / (2 * (d + 1)), false});
    c.push_back({"beta-vs-half", gamma * p.eta / (p.s - 1) * lb, -log(Real(2)), false});
    c.push_back({"beta-vs-constants", gamma * p.eta / (p.s - 1) * lb, -lconst, false});
    for (auto& x : c) x.ok = x.lhs <= x.rhs;
    return c;
  };
  std::vector<ParamCondition> fixed;
  fixed.push_back({"r0-vs-dimension", log(r0), -log(Real(d)) / 2, false});
  fixed.push_back({"r0-vs-ahlfors", log(r0), -log(A) / alpha, false});
  for (auto& x : fixed) x.ok = x.lhs <= x.rhs;
  const bool fixedOk = std::all_of(fixed.begin(), fixed.end(), [](const auto& c) { return c.ok; });

  const Real ls = log(betaSeed);
  std::optional<long> all, first3;
  for (long M = 1; M <= opt.maxM; ++M) {
    auto c = beta_conditions(ls * M);
    if (!first3 && c[0].ok && c[1].ok && c[2].ok) first3 = M;
    if (std::all_of(c.begin(), c.end(), [](const auto& x) { return x.ok; })) {
      all = M;
      break;
    }
  }
  p.M = all ? *all : first3.value_or(1);
  p.logBeta = ls * p.M;
  p.beta = exp(p.logBeta);
  p.logB = -p.logBeta / (1 + w1);
  p.conditions = beta_conditions(p.logBeta);
  p.conditions.insert(p.conditions.end(), fixed.begin(), fixed.end());
  p.compliant = all.has_value() && fixedOk;
  if (!p.compliant) {
    std::string failed;
    for (const auto& c : p.conditions)
      if (!c.ok) failed += (failed.empty() ? "" : ", ") + c.name;
    if (!all) failed += std::string(failed.empty() ? "" : "; ") + "no M <= " + std::to_string(opt.maxM) + " fixes beta";
    if (!opt.allowNonCompliant) fail(Errc::ParamInfeasible, "parameters fail: " + failed);
    p.banner = "parameters not compliant with the closed-form conditions (" + failed + ")";
  }
  if (p.s < p.sFormula) {
    p.compliant = false;
    p.banner += std::string(p.banner.empty() ? "" : "; ") + "s overridden below " + std::to_string(p.sFormula);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Dangerous sets

std::vector<DangerousSetSpec> raw_specs(const StrategyParams& p, long n, int i) {
  std::vector<DangerousSetSpec> out;
  require(n >= 0 && i >= 0, Errc::InvalidArgument, "negative index");
  const long s = p.s;
  if (n == 0) {
    // n' + (s-1) l = i with l >= (n'+1)/s
    for (long ell = 1; (s - 1) * ell <= i; ++ell) {
      const long np = i - (s - 1) * ell;
      if (s * ell < np + 1) continue;
      out.push_back({np + 1 + s * ell, ell, 0, exp(p.eta * ell * p.logBeta)});
    }
  } else if (i % (s - 1) == 0) {
    const long ell = i / (s - 1);
    if (ell > 0 && s * ell < n + 1) out.push_back({n + 1 + s * ell, ell, n, exp(p.eta * ell * p.logBeta)});
  }
  return out;
}

std::vector<int> active_indices(const StrategyParams& p, long n, int maxI) {
  std::vector<int> out;
  for (int i = 0; i <= maxI; ++i)
    if (!raw_specs(p, n, i).empty()) out.push_back(i);
  return out;
}

namespace {

DangerCheck danger_check_impl(const RVec& x, const DangerousSetSpec& spec, const StrategyParams& p,
                              std::vector<ZVec>* warm) {
  require(static_cast<int>(x.size()) == p.d, Errc::InvalidShape, "point has the wrong dimension");
  const FactoredGroupElement g{spec_diag(spec, p), {x}};
  const auto& logs = g.diag.logs;
  const Real spread = (*std::max_element(logs.begin(), logs.end()) - *std::min_element(logs.begin(), logs.end())) /
                      log(Real(2));
  // 64 bits for the verdict plus 32 for a warm LLL start (see shortest_vector).
  const double need = std::ceil(spread.convert_to<double>()) + 64 + (warm ? 32 : 0);
  if (need + 32 > precision())
    fail(Errc::PrecisionExhausted, "spec " + spec_str(spec) + " needs " + std::to_string(static_cast<long>(need)) +
                                       " bits, working precision is " + std::to_string(precision()));
  Real sys;
  try {
    PrecisionScope scope(static_cast<unsigned>(need));
    FactoredGroupElement low;
    for (const auto& l : logs) low.diag.logs.push_back(at_working(l));
    for (const auto& v : x) low.unip.x.push_back(at_working(v));
    const auto L = Lattice::from_columns(low.matrix());
    const Real s = warm ? shortest_vector(L, *warm).norm : shortest_vector(L).norm;
    sys = s;
  } catch (const Error& e) {
    if (e.code() == Errc::PrecisionExhausted) fail(Errc::PrecisionExhausted, "spec " + spec_str(spec) + ": " + e.what());
    throw;
  }
  DangerCheck out;
  out.systole = at_working(sys);
  out.dangerous = out.systole < spec.eps;
  return out;
}

}  // namespace

DangerCheck danger_check(const RVec& x, const DangerousSetSpec& spec, const StrategyParams& p) {
  return danger_check_impl(x, spec, p, nullptr);
}

bool is_dangerous(const RVec& x, const DangerousSetSpec& spec, const StrategyParams& p) {
  return danger_check(x, spec, p).dangerous;
}

Real perturbation_factor(const DangerousSetSpec& spec, const StrategyParams& p, const Real& delta) {
  // u_y = (d a u_{y-x} (d a)^{-1}) u_x and the conjugate is I + E with
  // E_{0i} = (D_0 / D_i)(y - x)_i.
  const auto D = spec_diag(spec, p);
  Real m = D.logs[0] - D.logs[1];
  for (int i = 2; i < D.dim(); ++i) m = std::max(m, D.logs[0] - D.logs[i]);
  return exp(m) * delta;
}

// ---------------------------------------------------------------------------
// Strategy

namespace {

enum class Verdict : std::int8_t { Safe, Dangerous, Band };

using CacheKey = std::tuple<NodePath, long, long>;  // node, k, l

}  // namespace

struct BadwStrategy::Impl {
  StrategyParams p;
  TreeMeasure mu;
  int m = 1;  // tree levels per game step
  std::map<long, NodeRef> bobNodes;  // B_n of each Alice move
  std::map<CacheKey, Verdict> clusterCache;
  std::map<CacheKey, bool> proxyCache;
  // Last reduced basis per (k, l). Consecutive checks are at nearby points, so
  // starting LLL from it saves most of the swaps.
  std::map<std::pair<long, long>, std::vector<ZVec>> warm;
  long svps = 0;

  DangerCheck check(const RVec& x, const DangerousSetSpec& s) {
    ++svps;
    return danger_check_impl(x, s, p, &warm[{s.k, s.ell}]);
  }

  // Whole-node classification from the centre and the perturbation bound.
  Verdict cluster_verdict(const NodeRef& c, const DangerousSetSpec& s) {
    const CacheKey key{c.path, s.k, s.ell};
    if (auto it = clusterCache.find(key); it != clusterCache.end()) return it->second;
    const Real e = perturbation_factor(s, p, mu.radius(c.depth)) + ldexp(Real(1), -64);
    const Real sys = check(c.center, s).systole;
    Verdict v = Verdict::Band;
    if (sys * (1 + e) < s.eps) v = Verdict::Dangerous;
    else if (e < 1 && sys * (1 - e) >= s.eps) v = Verdict::Safe;
    clusterCache.emplace(key, v);
    return v;
  }

  bool proxy_dangerous(const NodeRef& x, const DangerousSetSpec& s) {
    const CacheKey key{x.path, s.k, s.ell};
    if (auto it = proxyCache.find(key); it != proxyCache.end()) return it->second;
    const bool d = check(x.center, s).dangerous;
    proxyCache.emplace(key, d);
    return d;
  }

  // Membership of each proxy of `c` in the union of the specs.
  void mark(const NodeRef& c, const std::vector<NodeRef>& proxies, const std::vector<DangerousSetSpec>& specs,
            std::vector<char>& in, const std::vector<char>* only) {
    for (const auto& s : specs) {
      const Verdict v = cluster_verdict(c, s);
      if (v == Verdict::Safe) continue;
      for (std::size_t q = 0; q < proxies.size(); ++q) {
        if (in[q] || (only && !(*only)[q])) continue;
        in[q] = v == Verdict::Dangerous || proxy_dangerous(proxies[q], s);
      }
    }
  }

  std::vector<NodeRef> survivors(long n, int i, const NodeRef& c) {
    const auto specs = raw_specs(p, n, i);
    if (specs.empty()) return {};
    const auto proxies = mu.children(c);
    require(!proxies.empty(), Errc::PreconditionViolated, "tree too shallow for the proxies");
    std::vector<char> raw(proxies.size(), 0);
    mark(c, proxies, specs, raw, nullptr);
    if (std::none_of(raw.begin(), raw.end(), [](char b) { return b; })) return {};
    // Remove points of earlier raw sets whose covers are enforced no later than
    // this family.
    std::vector<char> earlier(proxies.size(), 0);
    for (long np = 0; np < n; ++np)
      for (int ip = 0; np + ip <= n + i; ++ip) {
        const auto es = raw_specs(p, np, ip);
        if (!es.empty()) mark(c, proxies, es, earlier, &raw);
      }
    std::vector<NodeRef> out;
    for (std::size_t q = 0; q < proxies.size(); ++q)
      if (raw[q] && !earlier[q]) out.push_back(proxies[q]);
    return out;
  }

  int cluster_depth(long n, int i) const { return static_cast<int>((n + 1 + i) * m + 1); }
  Real packing_radius(long n, int i) const { return mu.radius(static_cast<int>((n + 1 + i) * m)) / 3; }

  // Descendants of `node` at `depth`, in path order.
  void descend(const NodeRef& node, int depth, std::vector<NodeRef>& out) const {
    if (node.depth == depth) {
      out.push_back(node);
      return;
    }
    for (const auto& c : mu.children(node)) descend(c, depth, out);
  }

  const NodeRef& bob_node(long n) const {
    auto it = bobNodes.find(n);
    require(it != bobNodes.end(), Errc::PreconditionViolated, "no Alice move was made at B_" + std::to_string(n));
    return it->second;
  }
};

namespace {

bool is_prefix(const NodePath& a, const NodePath& b) {
  return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

class BadwProvider : public FamilyProvider {
public:
  BadwProvider(BadwStrategy& S, long n) : S_(S), n_(n) {}
  std::vector<Ball> meeting(int i, const Ball& region) override {
    if (raw_specs(S_.params(), n_, i).empty()) return {};
    return S_.family_near(n_, i, S_.measure().locate(region));
  }
  std::optional<long> size(int) const override { return std::nullopt; }

private:
  BadwStrategy& S_;
  long n_;
};

}  // namespace

BadwStrategy::BadwStrategy(StrategyParams p, TreeMeasure mu) : impl_(std::make_unique<Impl>()) {
  impl_->p = std::move(p);
  impl_->mu = std::move(mu);
  const auto& P = impl_->p;
  require(impl_->mu.dim() == P.d, Errc::InvalidShape, "measure and weights differ in dimension");
  const long m = lround((P.logBeta / log(impl_->mu.beta())).convert_to<double>());
  require(m >= 1 && abs(log(impl_->mu.beta()) * m - P.logBeta) <= slack() * abs(P.logBeta), Errc::PreconditionViolated,
          "game beta must be an integer power of the tree beta");
  require(abs(impl_->mu.r0() - P.r0) <= slack() * P.r0, Errc::PreconditionViolated, "tree r0 differs from the parameters");
  impl_->m = static_cast<int>(m);
}

BadwStrategy::~BadwStrategy() = default;

const StrategyParams& BadwStrategy::params() const { return impl_->p; }
const TreeMeasure& BadwStrategy::measure() const { return impl_->mu; }
long BadwStrategy::svp_calls() const { return impl_->svps; }
int BadwStrategy::cluster_depth(long n, int i) const { return impl_->cluster_depth(n, i); }

AliceMove BadwStrategy::move(const GameView& g) {
  require(g.variant().kind == GameKind::CantorPotential, Errc::InvalidArgument, "the strategy plays the Cantor game");
  require(abs(g.beta() - impl_->p.beta) <= slack() * impl_->p.beta, Errc::PreconditionViolated,
          "game beta differs from the parameters");
  const NodeRef node = impl_->mu.locate(g.current());
  require(node.depth == g.n * impl_->m, Errc::PreconditionViolated, "B_n is not a node of the matching depth");
  impl_->bobNodes[g.n] = node;
  AliceMove a = AliceMove::cantor({});
  a.lazy = std::make_shared<BadwProvider>(*this, g.n);
  return a;
}

std::vector<NodeRef> BadwStrategy::surviving_proxies(long n, int i, const NodeRef& c) {
  require(c.depth == impl_->cluster_depth(n, i), Errc::InvalidArgument, "cluster has the wrong depth");
  return impl_->survivors(n, i, c);
}

std::vector<Ball> BadwStrategy::family_near(long n, int i, const NodeRef& region) {
  auto& I = *impl_;
  const NodeRef& Bn = I.bob_node(n);
  require(is_prefix(Bn.path, region.path) && region.depth <= I.cluster_depth(n, i) - 1, Errc::PreconditionViolated,
          "region is not a node inside B_n");
  std::vector<NodeRef> clusters;
  I.descend(region, I.cluster_depth(n, i), clusters);
  std::vector<RVec> S;
  for (const auto& c : clusters)
    for (const auto& q : I.survivors(n, i, c)) S.push_back(q.center);
  if (S.empty()) return {};
  return efficient_cover(S, I.packing_radius(n, i)).balls;
}

// ---------------------------------------------------------------------------
// Legality audit

AuditEntry audit_family(long n, int i, long count, const StrategyParams& p) {
  AuditEntry e;
  e.n = n;
  e.i = i;
  e.exact = true;
  e.count = count;
  e.estimate = Real(count);
  e.budget = p.budget(i);
  e.headroom = e.budget - e.estimate;
  e.pass = e.estimate <= e.budget;
  return e;
}

AuditReport audit_legality(BadwStrategy& S, const GameTranscript& t, const AuditOptions& opt) {
  require(opt.samples >= 1 && opt.delta > 0 && opt.delta < 1, Errc::InvalidArgument, "bad audit options");
  auto& I = *S.impl_;
  const StrategyParams& p = I.p;
  const long R = t.bob_moves();
  std::mt19937_64 rng(opt.seed);
  AuditReport rep;
  for (long n = 0; n < static_cast<long>(t.rounds.size()); ++n) {
    for (int i : active_indices(p, n, static_cast<int>(R - n - 1))) {
      const NodeRef& Bn = I.bob_node(n);
      const int depth = I.cluster_depth(n, i);
      const int levels = depth - Bn.depth;
      const Real total = pow(Real(I.mu.branching()), levels);
      AuditEntry e;
      if (total <= opt.exactLimit) {
        std::vector<NodeRef> clusters;
        I.descend(Bn, depth, clusters);
        std::vector<RVec> pts;
        for (const auto& c : clusters)
          for (const auto& q : I.survivors(n, i, c)) pts.push_back(q.center);
        const long count = pts.empty() ? 0 : static_cast<long>(efficient_cover(pts, I.packing_radius(n, i)).balls.size());
        e = audit_family(n, i, count, p);
        e.clusters = static_cast<long>(clusters.size());
      } else {
        // Every cover ball sits on a distinct cluster with a surviving proxy, so
        // the cover size is at most (hit fraction) x (cluster count).
        long hits = 0;
        std::uniform_int_distribution<int> pick(0, I.mu.branching() - 1);
        for (long k = 0; k < opt.samples; ++k) {
          NodeRef c = Bn;
          for (int l = 0; l < levels; ++l) c = I.mu.child(c, pick(rng));
          if (!I.survivors(n, i, c).empty()) ++hits;
        }
        const Real phat = Real(hits) / opt.samples;
        const Real ucb = std::min(Real(1), phat + sqrt(log(1 / Real(opt.delta)) / (2 * opt.samples)));
        e.n = n;
        e.i = i;
        e.exact = false;
        e.clusters = opt.samples;
        e.count = hits;
        e.estimate = ucb * total;
        e.budget = p.budget(i);
        e.headroom = e.budget - e.estimate;
        e.pass = e.estimate <= e.budget;
      }
      rep.allPass = rep.allPass && e.pass;
      rep.entries.push_back(std::move(e));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Key lemma

KeyLemmaReport verify_keylemma_empirical(const KeyLemmaQuintuple& q, const RVec& xTilde, const NodeRef& Bn,
                                         const TreeMeasure& mu, const Real& eps, const Real& r, const StrategyParams& p,
                                         long samples, std::uint64_t seed) {
  require(samples >= 1 && eps > 0, Errc::InvalidArgument, "need samples >= 1 and eps > 0");
  require(q.k >= 0 && q.ell >= 0 && q.h >= 0 && q.m >= 0 && q.n >= 0, Errc::InvalidArgument, "negative quintuple");
  const Real rn = mu.radius(Bn.depth);
  require(r > 0 && r <= rn * (1 + slack()), Errc::InvalidArgument, "need 0 < r <= radius of B_n");
  KeyLemmaReport rep;
  const Real w1 = p.w.w[0], wd = p.w.w[p.d - 1];
  rep.tau = std::min(Real(q.k - q.ell - q.m - q.n) - Real(q.h) / (1 + w1), Real(q.h) * wd / (1 + w1));
  const bool firstRegime = q.n == 0 && Real(q.k) * w1 >= (1 + w1) * q.ell;
  if (!firstRegime) {
    require(rep.tau >= 0, Errc::PreconditionViolated, "tau = " + to_decimal(rep.tau) + " < 0");
    const Real t1 = sqrt(Real(p.d + 1)) * exp(Real(q.m) / (p.d + 1) * p.logBeta) / p.r0;
    const Real t2 = sqrt(Real(2)) * p.d * exp(rep.tau / p.d * p.logBeta);
    if (danger_check(xTilde, {q.k, q.ell + q.m, q.n, t1}, p).dangerous) rep.why = "first assumption unmet";
    else if (q.k < q.h || danger_check(xTilde, {q.k - q.h, q.ell, q.n, t2}, p).dangerous)
      rep.why = "second assumption unmet";
  }
  rep.applicable = rep.why.empty();
  rep.r = r;
  const Real bk = std::max(exp(Real(q.ell - q.k) * p.logBeta), exp((1 + weight(p.w, p.t)) * q.k * p.logB));
  rep.epsPrime = (1 + bk * r) * eps;
  rep.bound1 = p.Cprime * pow(eps, p.gamma);
  rep.bound2 = p.Cprime * pow(rep.epsPrime, p.gamma);

  const DangerousSetSpec spec{q.k, q.ell, q.n, eps};
  std::mt19937_64 rng(seed);
  long hits = 0;
  for (long k = 0; k < samples; ++k)
    if (danger_check(random_leaf(mu, Bn, rng).center, spec, p).dangerous) ++hits;
  rep.samples = samples;
  rep.massA = Real(hits) / samples;

  // B(A, r) lies in A_{eps'}(2 B_n); sample that set from an ancestor containing 2 B_n.
  NodeRef anc = Bn;
  while (anc.depth > 0 && distance(anc.center, Bn.center) + 2 * rn > mu.radius(anc.depth)) {
    NodePath up(anc.path.begin(), anc.path.end() - 1);
    anc = mu.at(up);
  }
  const DangerousSetSpec wide{q.k, q.ell, q.n, rep.epsPrime};
  std::mt19937_64 rng2(seed ^ 0x9e3779b97f4a7c15ULL);
  long hits2 = 0;
  for (long k = 0; k < samples; ++k) {
    const NodeRef y = random_leaf(mu, anc, rng2);
    if (distance(y.center, Bn.center) <= 2 * rn && danger_check(y.center, wide, p).dangerous) ++hits2;
  }
  rep.massNbhd = Real(hits2) / samples * pow(Real(mu.branching()), Bn.depth - anc.depth);
  rep.result1 = rep.massA <= rep.bound1;
  rep.result2 = rep.massNbhd <= rep.bound2;
  return rep;
}

KeyLemmaSweep keylemma_sweep(long k, long ell, const std::vector<Real>& eps, const TreeMeasure& mu, const NodeRef& Bn,
                             const Real& r, const StrategyParams& p, long samples, std::uint64_t seed,
                             const Real& gammaCap) {
  require(!eps.empty() && gammaCap > 0, Errc::InvalidArgument, "need eps values and a positive gamma cap");
  require(Real(k) * p.w.w[0] >= (1 + p.w.w[0]) * ell, Errc::PreconditionViolated,
          "k w_1 < (1 + w_1) l: outside the n = 0 regime");
  KeyLemmaSweep out;
  out.k = k;
  out.ell = ell;
  out.eps = eps;
  Real sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t j = 0; j < eps.size(); ++j) {
    // one seed for every eps: the sample points are shared and the masses nested
    out.reports.push_back(verify_keylemma_empirical({0, k, ell, 0, 0}, Bn.center, Bn, mu, eps[j], r, p, samples, seed));
    const auto& rep = out.reports.back();
    if (rep.massA > 0) {
      const Real x = log(eps[j]), y = log(rep.massA);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
      ++out.fitPoints;
    }
  }
  const int m = out.fitPoints;
  if (m >= 2 && sxx * m - sx * sx > 0) out.gammaEmp = (sxy * m - sx * sy) / (sxx * m - sx * sx);
  out.gammaCfg = out.gammaEmp ? std::min(*out.gammaEmp / 2, gammaCap) : gammaCap;
  out.result1 = out.result2 = true;
  for (std::size_t j = 0; j < eps.size(); ++j) {
    auto& rep = out.reports[j];
    rep.bound1 = p.Cprime * pow(eps[j], out.gammaCfg);
    rep.bound2 = p.Cprime * pow(rep.epsPrime, out.gammaCfg);
    rep.result1 = rep.massA <= rep.bound1;
    rep.result2 = rep.massNbhd <= rep.bound2;
    out.result1 = out.result1 && rep.result1;
    out.result2 = out.result2 && rep.result2;
  }
  out.pass = out.gammaEmp && *out.gammaEmp > 0 && out.gammaCfg > 0 && out.result1 && out.result2;
  return out;
}

// ---------------------------------------------------------------------------
// Certificate

std::vector<DangerousSetSpec> visited_specs(const StrategyParams& p, long horizon) {
  std::vector<DangerousSetSpec> out;
  for (long n = 0; n < horizon; ++n)
    for (int i = 0; n + 1 + i <= horizon; ++i)
      for (auto& s : raw_specs(p, n, i)) out.push_back(std::move(s));
  return out;
}

Certificate evaluate_certificate(const RVec& xhat, const std::vector<DangerousSetSpec>& visited,
                                 const StrategyParams& p, long horizon, long Nextra, long badnessQ) {
  require(horizon >= 1 && Nextra >= 0, Errc::InvalidArgument, "need horizon >= 1 and Nextra >= 0");
  Certificate c;
  c.xhat = xhat;
  c.horizon = horizon;
  c.Nextra = Nextra;
  bool ok = true;
  for (const auto& s : visited) {
    const auto r = danger_check(xhat, s, p);
    c.visited.push_back({s.n, s.ell, s.k, r.systole, s.eps, !r.dangerous});
    ok = ok && !r.dangerous;
  }
  const Real w1 = p.w.w[0];
  c.epsilonStar = exp(p.logBeta * (p.eta + Real(p.s + 1) / (1 + w1) + Real(p.d + 1 - p.t) / (p.d + 1)));
  c.orbit = dani_orbit_min_log(xhat, p.w, p.logB, horizon + Nextra);
  c.floorAtHorizon = c.orbit.perStep.front().second;
  for (const auto& [n, sys] : c.orbit.perStep)
    if (n <= horizon) c.floorAtHorizon = std::min(c.floorAtHorizon, sys);
  c.stability = abs(c.orbit.minSystole - c.floorAtHorizon) / c.floorAtHorizon;
  c.orbitAboveEpsStar = c.orbit.minSystole >= c.epsilonStar;
  if (badnessQ > 0) c.badness = badness_constant(xhat, p.w, badnessQ);
  c.pass = ok && c.orbitAboveEpsStar;
  return c;
}

Certificate outcome_certificate(const RVec& xhat, const std::vector<DangerousSetSpec>& visited, const StrategyParams& p,
                                long horizon, long Nextra, long badnessQ) {
  Certificate c = evaluate_certificate(xhat, visited, p, horizon, Nextra, badnessQ);
  if (c.pass) return c;
  std::string msg;
  for (const auto& v : c.visited)
    if (!v.pass)
      msg += "(n=" + std::to_string(v.n) + ", l=" + std::to_string(v.ell) + ", systole=" + to_decimal(v.systole) +
             ", threshold=" + to_decimal(v.threshold) + ") ";
  if (!c.orbitAboveEpsStar) msg += "orbit minimum " + to_decimal(c.orbit.minSystole) + " below eps*";
  fail(Errc::CertificateFailure, msg);
}

namespace {

using nlohmann::ordered_json;

std::string short_dec(const Real& x) {
  // systoles come from reduced-precision reductions; 30 digits are plenty
  std::ostringstream os;
  os.precision(30);
  os << x;
  return os.str();
}

ordered_json vec_json(const RVec& v) {
  ordered_json a = ordered_json::array();
  for (const auto& x : v) a.push_back(to_decimal(x));
  return a;
}

ordered_json params_json(const StrategyParams& p) {
  ordered_json j;
  j["w"] = p.w.str();
  j["d"] = p.d;
  j["t"] = p.t;
  j["s"] = p.s;
  j["sFormula"] = p.sFormula;
  j["eta"] = short_dec(p.eta);
  j["alpha"] = short_dec(p.alpha);
  j["alphaPrime"] = short_dec(p.alphaPrime);
  j["betaSeed"] = to_decimal(p.betaSeed);
  j["M"] = p.M;
  j["beta"] = to_decimal(p.beta);
  j["logB"] = short_dec(p.logB);
  j["r0"] = to_decimal(p.r0);
  j["A"] = short_dec(p.A);
  j["gamma"] = short_dec(p.gamma);
  j["Cprime"] = short_dec(p.Cprime);
  ordered_json cs = ordered_json::array();
  for (const auto& c : p.conditions)
    cs.push_back({{"name", c.name}, {"lhs", short_dec(c.lhs)}, {"rhs", short_dec(c.rhs)}, {"ok", c.ok}});
  j["conditions"] = cs;
  j["compliant"] = p.compliant;
  if (!p.banner.empty()) j["banner"] = p.banner;
  return j;
}

}  // namespace

std::string params_to_json(const StrategyParams& p) { return params_json(p).dump(2); }

std::string certificate_to_json(const Certificate& c, const StrategyParams& p) {
  ordered_json j;
  j["xhat"] = vec_json(c.xhat);
  j["params"] = params_json(p);
  ordered_json v = ordered_json::array();
  for (const auto& x : c.visited)
    v.push_back({{"n", x.n}, {"ell", x.ell}, {"k", x.k}, {"systole", short_dec(x.systole)},
                 {"threshold", short_dec(x.threshold)}, {"pass", x.pass}});
  j["visited"] = v;
  j["epsilonStar"] = short_dec(c.epsilonStar);
  ordered_json o;
  o["N"] = c.orbit.N;
  o["minSystole"] = short_dec(c.orbit.minSystole);
  o["argminN"] = c.orbit.argmin_n;
  o["horizon"] = c.horizon;
  o["floorAtHorizon"] = short_dec(c.floorAtHorizon);
  o["stability"] = short_dec(c.stability);
  o["aboveEpsilonStar"] = c.orbitAboveEpsStar;
  ordered_json steps = ordered_json::array();
  for (const auto& [n, s] : c.orbit.perStep) steps.push_back({{"n", n}, {"systole", short_dec(s)}});
  o["perStep"] = steps;
  j["orbitReport"] = o;
  if (c.badness)
    j["badnessReport"] = {{"cQ", short_dec(c.badness->cQ)}, {"argminQ", c.badness->argmin_q}, {"Q", c.badness->Q}};
  j["pass"] = c.pass;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Figure coordinates

std::vector<DiagCoord> diag_coords(const WeightVector& w, long s, long n, long lmax) {
  require(s >= 1 && n >= 0 && lmax >= 0, Errc::InvalidArgument, "need s >= 1, n >= 0, lmax >= 0");
  const Real logBeta = -1, logB = 1 / (1 + w.w[0]);
  std::vector<DiagCoord> out;
  for (long np = 0; np <= n; ++np)
    for (long ell = 0; ell <= lmax; ++ell) {
      DiagCoord c;
      c.n = np;
      c.ell = ell;
      c.k = np + 1 + s * ell;
      c.firstTurn = s * ell >= np + 1;
      c.logs = (make_d_log(ell, logBeta, w.t, w.d()) * make_a_log(c.k, logB, w)).logs;
      out.push_back(std::move(c));
    }
  return out;
}

std::string keylemma_sweep_to_json(const KeyLemmaSweep& s) {
  ordered_json j;
  j["k"] = s.k;
  j["ell"] = s.ell;
  j["n"] = 0;
  j["fitPoints"] = s.fitPoints;
  j["gammaEmp"] = s.gammaEmp ? ordered_json(short_dec(*s.gammaEmp)) : ordered_json(nullptr);
  j["gammaCfg"] = short_dec(s.gammaCfg);
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < s.reports.size(); ++i) {
    const auto& r = s.reports[i];
    rows.push_back({{"eps", short_dec(s.eps[i])}, {"samples", r.samples}, {"massA", short_dec(r.massA)},
                    {"bound1", short_dec(r.bound1)}, {"result1", r.result1}, {"epsPrime", short_dec(r.epsPrime)},
                    {"massNbhd", short_dec(r.massNbhd)}, {"bound2", short_dec(r.bound2)}, {"result2", r.result2}});
  }
  j["rows"] = rows;
  j["result1"] = s.result1;
  j["result2"] = s.result2;
  j["pass"] = s.pass;
  return j.dump(2);
}

std::string audit_to_json(const AuditReport& a) {
  ordered_json j;
  j["allPass"] = a.allPass;
  ordered_json es = ordered_json::array();
  for (const auto& e : a.entries)
    es.push_back({{"n", e.n}, {"i", e.i}, {"mode", e.exact ? "exact" : "sampled"}, {"clusters", e.clusters},
                  {"count", e.count}, {"estimate", short_dec(e.estimate)}, {"budget", short_dec(e.budget)},
                  {"headroom", short_dec(e.headroom)}, {"pass", e.pass}});
  j["entries"] = es;
  return j.dump(2);
}

namespace {

Real parse_number(const std::string& s) {
  if (s.find('/') != std::string::npos) return to_real(parse_rational(s));
  return from_decimal(s);
}

}  // namespace

StrategyParams badw_run_params(const BadwRunConfig& c) {
  const WeightVector w = WeightVector::parse(c.w);
  require(w.d() == 2, Errc::InvalidArgument, "the triangle-tree support is planar: d must be 2");
  const Real betaSeed = parse_number(c.betaSeed), r0 = parse_number(c.r0);
  ParamOptions po;
  po.overrideS = c.overrideS;
  po.allowNonCompliant = c.allowNonCompliant;
  const TreeMeasure probe = triangle_tree(betaSeed, r0, 1);
  return derive_params(w, probe.alpha(), closed_form_ahlfors(probe), parse_number(c.gamma), parse_number(c.Cprime),
                       r0, betaSeed, po);
}

BadwRun run_badw(const BadwRunConfig& c) {
  require(c.rounds >= 1, Errc::InvalidArgument, "rounds must be >= 1");
  PrecisionScope scope(c.precision);
  BadwRun run;
  run.params = badw_run_params(c);
  const StrategyParams& p = run.params;
  const WeightVector& w = p.w;
  const TreeMeasure mu = triangle_tree(p.betaSeed, p.r0, static_cast<int>(c.rounds * p.M + 2));

  BadwStrategy alice(p, mu);
  auto bob = tree_bob(mu);
  run.transcript = play(GameVariant::cantor(p.alpha), p.beta, mu.ball(mu.root()), alice, *bob, c.rounds);
  auto& t = run.transcript;
  t.meta["alice"] = "badw";
  t.meta["bob"] = "tree";
  t.meta["w"] = w.str();
  t.meta["seed"] = std::to_string(c.seed);
  t.meta["version"] = BADW_VERSION;
  if (!p.banner.empty()) t.meta["banner"] = p.banner;
  run.bobDefaulted = t.status == GameStatus::AliceWinsByDefault;
  run.transcriptJsonl = transcript_to_jsonl(t);

  if (c.audit) {
    AuditOptions ao = c.auditOptions;
    ao.seed = c.seed;
    run.audit = audit_legality(alice, t, ao);
  }
  if (t.status == GameStatus::Outcome) {
    run.certificate = evaluate_certificate(t.outcome, visited_specs(p, c.rounds), p, c.rounds,
                                           c.Nextra < 0 ? c.rounds : c.Nextra, c.badnessQ);
    run.certificateJson = certificate_to_json(*run.certificate, p);
  }
  run.svpCalls = alice.svp_calls();
  return run;
}

}  // namespace badw
