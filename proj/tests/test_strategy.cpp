#include "badw/strategy.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace badw;

namespace {

// The end-to-end support: triangle tree with beta = 2^-24, r0 = 1/2.
struct TriangleSetup {
  TreeMeasure mu;
  StrategyParams p;
};

TriangleSetup triangle(int depth, bool lenient = true) {
  TreeMeasure mu = triangle_tree(ldexp(Real(1), -24), Real(1) / 2, depth);
  ParamOptions o;
  o.allowNonCompliant = lenient;
  auto p = derive_params(WeightVector::parse("2/3,1/3"), mu.alpha(), closed_form_ahlfors(mu), Real("0.1"), Real(10),
                         Real(1) / 2, mu.beta(), o);
  return {std::move(mu), std::move(p)};
}

Int ceil_div(const Rational& q) {
  Int n = numerator(q), d = denominator(q);
  Int f = n / d;
  if (f * d != n && n > 0) f += 1;
  return f;
}

// s and eta straight from the closed forms, in exact arithmetic.
long oracle_s(const QVec& w) {
  const Rational w1 = w[0];
  std::size_t t = 1;
  while (t < w.size() && w[t] == w1) ++t;
  const Rational wt1 = t < w.size() ? w[t] : Rational(0);
  Int s = 5;
  s = std::max(s, ceil_div((1 + w1) / (w1 - wt1)));
  s = std::max(s, ceil_div((2 * (1 + w1) + 1) / w1));
  return s.convert_to<long>();
}

Rational oracle_eta_without_alpha(const QVec& w, long s) {
  const long d = static_cast<long>(w.size());
  const Rational w1 = w[0], wd = w.back(), den = 2 * d * (1 + w1);
  return std::min<Rational>({Rational(1, 4 * (d + 1)), wd * s / den, (w1 * s - 2 * (1 + w1)) / den});
}

// (k, l) of every raw spec enforced by (n, i), from the index constraints.
std::set<std::pair<long, long>> oracle_specs(long n, long i, long s) {
  std::set<std::pair<long, long>> out;
  if (n == 0) {
    for (long np = 0; np <= i; ++np)
      for (long l = 1; np + (s - 1) * l <= i; ++l)
        if (np + (s - 1) * l == i && s * l >= np + 1) out.insert({np + 1 + s * l, l});
  } else {
    for (long l = 1; s * l < n + 1; ++l)
      if ((s - 1) * l == i) out.insert({n + 1 + s * l, l});
  }
  return out;
}

// Double-precision systole by scanning a coefficient box (small distortions only).
double brute_systole(const RMat& B, int R) {
  double best = 1e300;
  const int n = static_cast<int>(B.size());
  std::vector<std::vector<double>> b(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b[i][j] = B[i][j].convert_to<double>();
  for (int a = -R; a <= R; ++a)
    for (int c = -R; c <= R; ++c)
      for (int e = -R; e <= R; ++e) {
        if (!a && !c && !e) continue;
        double s2 = 0;
        for (int i = 0; i < n; ++i) {
          const double v = b[i][0] * a + b[i][1] * c + b[i][2] * e;
          s2 += v * v;
        }
        best = std::min(best, std::sqrt(s2));
      }
  return best;
}

NodeRef random_node(const TreeMeasure& mu, int depth, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, mu.branching() - 1);
  NodeRef c = mu.root();
  while (c.depth < depth) c = mu.child(c, pick(rng));
  return c;
}

void descend(const TreeMeasure& mu, const NodeRef& n, int depth, std::vector<NodeRef>& out) {
  if (n.depth == depth) {
    out.push_back(n);
    return;
  }
  for (const auto& c : mu.children(n)) descend(mu, c, depth, out);
}

}  // namespace

TEST(Params, HandDerivedS) {
  EXPECT_EQ(formula_s(WeightVector::parse("2/3,1/3")), 7);
  EXPECT_EQ(formula_s(WeightVector::parse("1/2,1/2")), 8);
  EXPECT_EQ(WeightVector::parse("1/2,1/2").t, 2);
}

TEST(Params, EtaTakesTheDimensionBranch) {
  PrecisionScope scope(1024);
  auto [mu, p] = triangle(3);
  EXPECT_EQ(p.s, 7);
  EXPECT_EQ(p.t, 1);
  // branches 1/12, 7/20, 1/5 and alpha/gamma = 0.66
  EXPECT_LE(abs(p.eta - Real(1) / 12), slack());
  EXPECT_LE(abs(p.alphaPrime - (p.alpha - p.gamma * p.eta / 24)), slack());
  EXPECT_GE(p.alphaPrime, 0);
  EXPECT_LT(p.alphaPrime, p.alpha);
  EXPECT_LE(abs(p.logB + p.logBeta * 3 / 5), slack() * abs(p.logB));
  EXPECT_LE(abs(p.budget(6) - pow(p.beta, -p.alphaPrime * 7)), slack() * p.budget(6));
}

TEST(Params, RandomRationalWeights) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + trial % 4;
    std::uniform_int_distribution<int> u(1, 9);
    std::vector<int> parts(d);
    int total = 0;
    for (auto& x : parts) total += x = u(rng);
    std::sort(parts.rbegin(), parts.rend());
    QVec q;
    for (int x : parts) q.emplace_back(x, total);
    const auto w = WeightVector::from_rationals(q);
    const Real alpha = Real(u(rng)) / 10, gamma = Real(u(rng)) / 10;
    auto p = derive_params(w, alpha, Real(2), gamma, Real(10), Real("0.01"), Real("0.001"),
                           ParamOptions{std::nullopt, true, 64});
    EXPECT_EQ(p.s, oracle_s(q)) << w.str();
    EXPECT_GE(p.s, 5);
    const Real eta = std::min(to_real(oracle_eta_without_alpha(q, p.s)), alpha / gamma);
    EXPECT_LE(abs(p.eta - eta), slack()) << w.str();
    EXPECT_GT(p.eta, 0);
    EXPECT_GE(p.alphaPrime, 0);
    EXPECT_LT(p.alphaPrime, alpha);
  }
}

TEST(Params, ConditionsReportedAndStrictModeRefuses) {
  PrecisionScope scope(1024);
  auto [mu, p] = triangle(3);
  EXPECT_FALSE(p.compliant);
  EXPECT_EQ(p.M, 1);
  EXPECT_EQ(p.conditions.size(), 7u);
  std::set<std::string> failed;
  for (const auto& c : p.conditions) {
    EXPECT_EQ(c.ok, c.lhs <= c.rhs) << c.name;
    if (!c.ok) failed.insert(c.name);
  }
  EXPECT_EQ(failed, (std::set<std::string>{"beta-vs-half", "beta-vs-constants", "r0-vs-ahlfors"}));
  EXPECT_NE(p.banner.find("not compliant with the closed-form conditions"), std::string::npos);
  try {
    triangle(3, false);
    FAIL() << "strict mode accepted non-compliant parameters";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ParamInfeasible);
  }
}

TEST(Params, FigureValueOfSIsInfeasible) {
  // s = 2 makes the third eta branch negative for w = (2/3, 1/3).
  auto w = WeightVector::parse("2/3,1/3");
  ParamOptions o;
  o.overrideS = 2;
  o.allowNonCompliant = true;
  try {
    derive_params(w, Real("0.5"), Real(2), Real("0.1"), Real(10), Real("0.01"), Real("0.001"), o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ParamInfeasible);
  }
}

TEST(Specs, HandExamples) {
  PrecisionScope scope(1024);
  auto [mu, p] = triangle(3);
  auto a = raw_specs(p, 7, 6);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].ell, 1);
  EXPECT_EQ(a[0].k, 15);
  EXPECT_LE(abs(a[0].eps - pow(p.beta, p.eta)), slack());
  auto b = raw_specs(p, 0, 6);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0].k, 8);
  EXPECT_EQ(b[0].ell, 1);
  for (int i = 0; i < 6; ++i) EXPECT_TRUE(raw_specs(p, 0, i).empty());
  // (n+1)/s <= 1 leaves no l
  for (long n = 1; n <= 6; ++n)
    for (int i = 0; i <= 60; ++i) EXPECT_TRUE(raw_specs(p, n, i).empty());
}

TEST(Specs, MatchIndexConstraints) {
  PrecisionScope scope(1024);
  auto [mu, p] = triangle(3);
  for (long n = 0; n <= 30; ++n)
    for (int i = 0; i <= 40; ++i) {
      std::set<std::pair<long, long>> got;
      for (const auto& s : raw_specs(p, n, i)) {
        got.insert({s.k, s.ell});
        EXPECT_EQ(s.n, n);
        EXPECT_LE(abs(s.eps - pow(p.beta, p.eta * s.ell)), slack());
      }
      EXPECT_EQ(got, oracle_specs(n, i, p.s)) << "n=" << n << " i=" << i;
      const auto act = active_indices(p, n, 40);
      EXPECT_EQ(std::count(act.begin(), act.end(), i) == 1, !got.empty());
    }
}

TEST(Danger, MatchesBruteForceAtSmallDistortion) {
  auto w = WeightVector::parse("2/3,1/3");
  auto p = derive_params(w, Real("0.5"), Real(2), Real("0.1"), Real(10), Real("0.01"), Real("0.5"),
                         ParamOptions{std::nullopt, true, 1});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0, 1);
  for (int trial = 0; trial < 30; ++trial) {
    DangerousSetSpec spec{1 + trial % 3, trial % 2, 0, Real("0.5")};
    RVec x{Real(U(rng)), Real(U(rng))};
    auto r = danger_check(x, spec, p);
    const auto D = make_d_log(spec.ell, p.logBeta, p.t, p.d) * make_a_log(spec.k, p.logB, p.w);
    const FactoredGroupElement g{D, {x}};
    EXPECT_NEAR(r.systole.convert_to<double>(), brute_systole(g.matrix(), 12), 1e-9);
    EXPECT_EQ(r.dangerous, r.systole < spec.eps);
  }
}

TEST(Danger, RationalPointsCollapse) {
  PrecisionScope scope(1024);
  auto [mu, p] = triangle(3);
  // (q; p) with x = p/q is fixed by u_x up to its first coordinate, then contracted
  for (auto [a, b, q] : {std::tuple{1, 1, 2}, {1, 2, 3}, {3, 1, 5}}) {
    RVec x{Real(a) / q, Real(b) / q};
    const DangerousSetSpec spec{15, 1, 7, pow(p.beta, p.eta)};
    auto r = danger_check(x, spec, p);
    EXPECT_TRUE(r.dangerous);
    // the integer vector (q, -a, -b) maps to (0, q D_1, q D_2) up to sign
    const auto D = make_d_log(spec.ell, p.logBeta, p.t, p.d) * make_a_log(spec.k, p.logB, p.w);
    const Real explicitNorm = q * sqrt(exp(2 * D.logs[1]) + exp(2 * D.logs[2]));
    EXPECT_LE(r.systole, explicitNorm * (1 + slack()));
  }
}

TEST(Danger, UnitThresholdAndMonotonicity) {
  PrecisionScope scope(1024);
  auto [mu, p] = triangle(3);
  std::mt19937_64 rng(8);
  int below = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const RVec x = random_node(mu, 3, rng).center;
    DangerousSetSpec one{10 + trial, 0, 0, Real(1)};
    auto r = danger_check(x, one, p);
    EXPECT_EQ(r.dangerous, r.systole < 1);
    below += r.dangerous;
    // dangerous at eps' implies dangerous at every eps >= eps'
    for (const Real f : {Real("0.5"), Real(2), Real(10)}) {
      DangerousSetSpec s = one;
      s.eps = r.systole * f;
      if (is_dangerous(x, s, p)) {
        s.eps *= 2;
        EXPECT_TRUE(is_dangerous(x, s, p));
      }
    }
  }
  EXPECT_GT(below, 0);
}

TEST(Danger, PerturbationFactorBoundsTheSystoleChange) {
  PrecisionScope scope(1024);
  auto [mu, p] = triangle(20);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int trial = 0; trial < 30; ++trial) {
    const DangerousSetSpec spec{8 + trial % 8, 1 + trial % 2, 0, Real(1)};
    const NodeRef c = random_node(mu, spec.k + 2, rng);
    const Real delta = mu.radius(c.depth);
    const Real e = perturbation_factor(spec, p, delta);
    ASSERT_LT(e, 1);
    const Real s0 = danger_check(c.center, spec, p).systole;
    for (int j = 0; j < 4; ++j) {
      RVec y = c.center;
      for (auto& v : y) v += delta * Real(U(rng)) / sqrt(Real(2));
      const Real s1 = danger_check(y, spec, p).systole;
      EXPECT_LE(abs(s1 - s0), (e + ldexp(Real(1), -60)) * s0) << "k=" << spec.k;
    }
  }
}

TEST(Danger, PrecisionExhaustedNamesTheDangerousSet) {
  auto [mu, p] = triangle(3);  // 256 bits cannot hold k = 40
  try {
    danger_check({Real("0.3"), Real("0.2")}, {40, 1, 0, Real(1)}, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::PrecisionExhausted);
    EXPECT_NE(std::string(e.what()).find("k=40"), std::string::npos);
  }
}

TEST(Strategy, SurvivorsAreRawMinusEarlierFamilies) {
  PrecisionScope scope(1536);
  auto [mu, p] = triangle(17);
  BadwStrategy S(p, mu);
  const long n = 7;
  const int i = 6;
  const int depth = S.cluster_depth(n, i);
  ASSERT_EQ(depth, 15);
  // the oracle: raw family specs and every spec enforced no later
  std::vector<DangerousSetSpec> own, earlier;
  for (auto [k, l] : oracle_specs(n, i, p.s)) own.push_back({k, l, n, pow(p.beta, p.eta * l)});
  for (long np = 0; np < n; ++np)
    for (long ip = 0; np + ip <= n + i; ++ip)
      for (auto [k, l] : oracle_specs(np, ip, p.s)) earlier.push_back({k, l, np, pow(p.beta, p.eta * l)});
  ASSERT_EQ(own.size(), 1u);
  ASSERT_FALSE(earlier.empty());

  std::mt19937_64 rng(4);
  int withRaw = 0, removed = 0, examined = 0;
  for (int tries = 0; tries < 600 && (withRaw < 6 || examined < 20); ++tries) {
    const NodeRef c = random_node(mu, depth, rng);
    const auto got = S.surviving_proxies(n, i, c);
    std::set<NodePath> expected;
    bool anyRaw = false;
    for (const auto& q : mu.children(c)) {
      bool raw = false;
      for (const auto& s : own) raw = raw || is_dangerous(q.center, s, p);
      if (!raw) continue;
      anyRaw = true;
      bool before = false;
      for (const auto& s : earlier) before = before || is_dangerous(q.center, s, p);
      if (before) ++removed;
      else expected.insert(q.path);
    }
    if (!anyRaw && examined >= 20) continue;
    ++examined;
    withRaw += anyRaw;
    std::set<NodePath> gotPaths;
    for (const auto& q : got) gotPaths.insert(q.path);
    EXPECT_EQ(gotPaths, expected);
  }
  EXPECT_GE(withRaw, 6);
  RecordProperty("removedByEarlier", removed);
}

TEST(Strategy, FamilyCoverCoversEverySurvivor) {
  PrecisionScope scope(1536);
  auto [mu, p] = triangle(10);
  BadwStrategy S(p, mu);
  GameTranscript t;
  t.variant = GameVariant::cantor(p.alpha);
  t.beta = p.beta;
  t.B0 = mu.ball(mu.root());
  auto a = S.move(GameView{t, 0});
  ASSERT_TRUE(a.lazy);
  EXPECT_FALSE(a.lazy->size(6).has_value());
  EXPECT_TRUE(a.lazy->meeting(5, t.B0).empty());

  std::mt19937_64 rng(2);
  int nonempty = 0;
  for (int trial = 0; trial < 12; ++trial) {
    const NodeRef region = random_node(mu, 3, rng);
    const auto balls = S.family_near(0, 6, region);
    std::vector<NodeRef> clusters;
    descend(mu, region, S.cluster_depth(0, 6), clusters);
    std::vector<RVec> surv;
    std::set<NodePath> hit;  // clusters with a surviving proxy
    for (const auto& c : clusters)
      for (const auto& q : S.surviving_proxies(0, 6, c)) {
        surv.push_back(q.center);
        hit.insert(c.path);
      }
    nonempty += !balls.empty();
    // Sibling clusters are more than two packing radii apart while a cluster is
    // far smaller than one, so the greedy cover takes one ball per hit cluster.
    EXPECT_EQ(balls.size(), hit.size());
    const Real r = schedule_radius(p.beta, p.r0, 7);
    for (std::size_t a = 0; a < balls.size(); ++a) {
      EXPECT_LE(abs(balls[a].radius - r), slack() * r);
      EXPECT_TRUE(std::any_of(surv.begin(), surv.end(), [&](const RVec& x) { return distance(x, balls[a].center) == 0; }));
      for (std::size_t b = 0; b < a; ++b) EXPECT_GT(distance(balls[a].center, balls[b].center), 2 * r / 3);
    }
    for (const auto& x : surv)
      EXPECT_TRUE(std::any_of(balls.begin(), balls.end(), [&](const Ball& B) { return contains(B, x); }));
  }
  EXPECT_GT(nonempty, 0);
}

TEST(Audit, InflatedCountReportsTheExcess) {
  PrecisionScope scope(1024);
  auto [mu, p] = triangle(3);
  const Real budget = p.budget(6);
  const long over = static_cast<long>(floor(budget).convert_to<double>()) + 5;
  auto e = audit_family(3, 6, over, p);
  EXPECT_FALSE(e.pass);
  EXPECT_EQ(e.headroom, budget - over);
  EXPECT_LT(e.headroom, 0);
  auto empty = audit_family(3, 6, 0, p);
  EXPECT_TRUE(empty.pass);
  EXPECT_EQ(empty.headroom, budget);
}

TEST(KeyLemma, NegativeTauIsRefused) {
  PrecisionScope scope(1024);
  auto [mu, p] = triangle(6);
  const NodeRef Bn = mu.child(mu.root(), 0);
  try {
    verify_keylemma_empirical({0, 2, 3, 0, 1}, Bn.center, Bn, mu, Real("0.5"), mu.radius(1), p, 10, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::PreconditionViolated);
  }
}

TEST(KeyLemma, SaturatedEpsilon) {
  PrecisionScope scope(1024);
  auto [mu, p] = triangle(6);
  const NodeRef Bn = mu.root();
  // every lattice has systole below 10^6, so A is all of B_n
  auto r = verify_keylemma_empirical({0, 8, 1, 0, 0}, Bn.center, Bn, mu, Real(1000000), mu.radius(0), p, 20, 3);
  EXPECT_TRUE(r.applicable);
  EXPECT_EQ(r.massA, 1);
  EXPECT_GE(r.bound1, 1);
  EXPECT_TRUE(r.result1);
  EXPECT_GE(r.epsPrime, Real(1000000));
  EXPECT_TRUE(r.result2);
}

TEST(Certificate, VacuousHorizonKeepsTheOrbit) {
  PrecisionScope scope(1024);
  auto [mu, p] = triangle(3);
  EXPECT_TRUE(visited_specs(p, 1).empty());
  RVec x{Real("0.3"), Real("0.2")};
  auto c = evaluate_certificate(x, visited_specs(p, 1), p, 1, 0);
  EXPECT_TRUE(c.visited.empty());
  EXPECT_FALSE(c.orbit.perStep.empty());
  EXPECT_EQ(c.pass, c.orbitAboveEpsStar);
  // closed form of eps*
  const Real expo = p.eta + Real(8) * 3 / 5 + Real(2) / 3;
  EXPECT_LE(abs(c.epsilonStar / pow(p.beta, expo) - 1), slack() * 16);
}

TEST(Certificate, ShortRunIsCertifiedAndStableUnderTinyShifts) {
  BadwRunConfig cfg;
  cfg.rounds = 12;
  cfg.audit = false;
  cfg.badnessQ = 0;
  auto run = run_badw(cfg);
  ASSERT_EQ(run.transcript.status, GameStatus::Outcome);
  EXPECT_FALSE(run.bobDefaulted);
  ASSERT_TRUE(run.certificate);
  EXPECT_TRUE(run.certificate->pass);
  EXPECT_FALSE(run.certificate->visited.empty());

  PrecisionScope scope(cfg.precision);
  const auto& p = run.params;
  const auto visited = visited_specs(p, cfg.rounds);
  const Real delta = 10 * run.transcript.outcomeRadius;
  RVec y = run.transcript.outcome;
  y[0] += delta;
  auto moved = evaluate_certificate(y, visited, p, cfg.rounds, 0);
  ASSERT_EQ(moved.visited.size(), run.certificate->visited.size());
  for (std::size_t j = 0; j < visited.size(); ++j) {
    const Real e = perturbation_factor(visited[j], p, delta) + ldexp(Real(1), -60);
    const Real s0 = run.certificate->visited[j].systole;
    EXPECT_LE(abs(moved.visited[j].systole - s0), e * s0);
  }
  EXPECT_THROW(outcome_certificate(RVec{Real(1) / 2, Real(1) / 3}, visited, p, cfg.rounds, 0), Error);
}

TEST(Certificate, RerunIsByteIdentical) {
  BadwRunConfig cfg;
  cfg.rounds = 10;
  cfg.audit = false;
  cfg.badnessQ = 100;
  auto a = run_badw(cfg), b = run_badw(cfg);
  EXPECT_EQ(a.transcriptJsonl, b.transcriptJsonl);
  EXPECT_EQ(a.certificateJson, b.certificateJson);
  EXPECT_TRUE(validate_transcript(a.transcript).ok);
}

TEST(DiagCoords, FigureParameters) {
  auto w = WeightVector::parse("2/3,1/3");
  auto cs = diag_coords(w, 2, 5, 1);
  ASSERT_EQ(cs.size(), 12u);
  for (const auto& c : cs) {
    EXPECT_EQ(c.k, c.n + 1 + 2 * c.ell);
    EXPECT_EQ(c.firstTurn, 2 * c.ell >= c.n + 1);
    Real sum = 0;
    for (const auto& v : c.logs) sum += v;
    EXPECT_LE(abs(sum), slack());
  }
  // n = 5, l = 1, k = 8: (24/5 - 1/3, -16/5 + 2/3, -8/5 - 1/3)
  const auto& last = cs.back();
  ASSERT_EQ(last.n, 5);
  ASSERT_EQ(last.ell, 1);
  EXPECT_LE(abs(last.logs[0] - Real(67) / 15), slack());
  EXPECT_LE(abs(last.logs[1] + Real(38) / 15), slack());
  EXPECT_LE(abs(last.logs[2] + Real(29) / 15), slack());
  EXPECT_FALSE(last.firstTurn);
  EXPECT_TRUE(cs[1].firstTurn);  // n = 0, l = 1
}

TEST(KeyLemma, SweepFitsPositiveExponent) {
  auto mu = product_disc_tree(6);
  ParamOptions o;
  o.allowNonCompliant = true;
  o.maxM = 1;
  auto p = derive_params(WeightVector::parse("2/3,1/3"), mu.alpha(), closed_form_ahlfors(mu), Real("0.1"), Real(10),
                         mu.r0(), mu.beta(), o);
  std::vector<Real> eps;
  for (int e = 1; e <= 8; ++e) eps.push_back(ldexp(Real(1), -e));
  const Real r = mu.radius(2);
  auto s = keylemma_sweep(10, 1, eps, mu, mu.root(), r, p, 400, 5);
  ASSERT_TRUE(s.gammaEmp.has_value());
  EXPECT_GT(*s.gammaEmp, 0);
  EXPECT_GE(s.fitPoints, 2);
  EXPECT_EQ(s.gammaCfg, std::min(*s.gammaEmp / 2, Real("0.1")));
  EXPECT_TRUE(s.pass);
  // shared sample points: the masses are nested like the sets
  for (std::size_t j = 1; j < s.reports.size(); ++j) EXPECT_LE(s.reports[j].massA, s.reports[j - 1].massA);
  EXPECT_THROW(keylemma_sweep(2, 1, eps, mu, mu.root(), r, p, 10, 5), Error);
}
