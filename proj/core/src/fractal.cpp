#include "badw/fractal.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace badw {

namespace {

Real r_pow(const Real& b, int e) { return pow(b, e); }

RVec axpy(const RVec& x, const RVec& o, const Real& s) {
  RVec y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += o[i] * s;
  return y;
}

RVec sub(const RVec& a, const RVec& b) {
  RVec c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

// Hodge dual of v_1 ^ ... ^ v_{d-1} in R^d: a normal to their span.
RVec dual_normal(const std::vector<RVec>& dirs, int d) {
  if (d == 1) return RVec{Real(1)};
  auto w = wedge(dirs);
  RVec n(d);
  for (int m = 0; m < d; ++m) {
    std::vector<int> I;
    for (int k = 0; k < d; ++k)
      if (k != m) I.push_back(k);
    n[m] = w.at(I);
    if (m % 2 == 1) n[m] = -n[m];
  }
  return n;
}

HyperplaneNbhd oriented(RVec n, const RVec& through) {
  for (const auto& a : n) {
    if (a == 0) continue;
    if (a < 0)
      for (auto& b : n) b = -b;
    break;
  }
  return hyperplane_at(std::move(n), through, Real(0));
}

Real uniform01(std::mt19937_64& rng) { return Real(std::uniform_real_distribution<double>(0.0, 1.0)(rng)); }

// log-uniform on [lo, hi]
Real log_uniform(const Real& lo, const Real& hi, std::mt19937_64& rng) {
  return exp(log(lo) + uniform01(rng) * (log(hi) - log(lo)));
}

}  // namespace

// ---------------------------------------------------------------------------
// TreeMeasure

TreeMeasure TreeMeasure::from_nodes(const Real& beta, const Real& r0, int N, std::vector<TreeNode> nodes) {
  require(beta > 0 && beta < 1, Errc::InvalidArgument, "beta must lie in (0,1)");
  require(r0 > 0, Errc::InvalidArgument, "r0 must be positive");
  require(N > 1, Errc::InvalidArgument, "branching must exceed 1");
  require(!nodes.empty() && nodes[0].parent == -1 && nodes[0].depth == 0, Errc::InvalidShape, "node 0 must be the root");
  TreeMeasure t;
  t.beta_ = beta;
  t.r0_ = r0;
  t.N_ = N;
  t.d_ = static_cast<int>(nodes[0].center.size());
  require(t.d_ >= 1 && t.d_ <= kMaxDim, Errc::InvalidShape, "dimension out of range");
  int L = -1;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    require(static_cast<int>(n.center.size()) == t.d_, Errc::InvalidShape, "centre dimension mismatch");
    if (n.children.empty()) {
      require(L < 0 || L == n.depth, Errc::InvalidShape, "leaves at different depths");
      L = n.depth;
      continue;
    }
    require(static_cast<int>(n.children.size()) == N, Errc::InvalidShape, "node without exactly N children");
    const Ball parent{n.center, t.radius(n.depth)};
    for (std::size_t a = 0; a < n.children.size(); ++a) {
      const int c = n.children[a];
      require(c > static_cast<int>(i) && c < static_cast<int>(nodes.size()), Errc::InvalidShape, "bad child index");
      require(nodes[c].parent == static_cast<int>(i) && nodes[c].depth == n.depth + 1, Errc::InvalidShape,
              "child links inconsistent");
      const Ball cb{nodes[c].center, t.radius(n.depth + 1)};
      require(ball_inside(cb, parent), Errc::InvalidShape, "child not contained in parent");
      for (std::size_t b = 0; b < a; ++b)
        require(balls_disjoint(cb, Ball{nodes[n.children[b]].center, cb.radius}), Errc::InvalidShape,
                "sibling balls overlap");
    }
  }
  t.L_ = L;
  t.nodes_ = std::move(nodes);
  t.root_ = t.nodes_[0].center;
  return t;
}

TreeMeasure TreeMeasure::self_similar(const Real& beta, const Real& r0, const RVec& root, std::vector<RVec> offsets,
                                      int depth) {
  require(beta > 0 && beta < 1, Errc::InvalidArgument, "beta must lie in (0,1)");
  require(r0 > 0, Errc::InvalidArgument, "r0 must be positive");
  require(offsets.size() > 1, Errc::InvalidArgument, "branching must exceed 1");
  require(depth >= 0, Errc::InvalidArgument, "depth must be >= 0");
  const int d = static_cast<int>(root.size());
  require(d >= 1 && d <= kMaxDim, Errc::InvalidShape, "dimension out of range");
  const Ball unit{RVec(d, Real(0)), Real(1)};
  for (std::size_t a = 0; a < offsets.size(); ++a) {
    require(static_cast<int>(offsets[a].size()) == d, Errc::InvalidShape, "offset dimension mismatch");
    require(ball_inside(Ball{offsets[a], beta}, unit), Errc::InvalidShape, "child not contained in parent");
    for (std::size_t b = 0; b < a; ++b)
      require(balls_disjoint(Ball{offsets[a], beta}, Ball{offsets[b], beta}), Errc::InvalidShape,
              "sibling balls overlap");
  }
  TreeMeasure t;
  t.beta_ = beta;
  t.r0_ = r0;
  t.N_ = static_cast<int>(offsets.size());
  t.L_ = depth;
  t.d_ = d;
  t.implicit_ = true;
  t.offsets_ = std::move(offsets);
  t.root_ = root;
  return t;
}

Real TreeMeasure::alpha() const { return -log(Real(N_)) / log(beta_); }

Real TreeMeasure::radius(int depth) const { return r0_ * r_pow(beta_, depth); }

Rational TreeMeasure::node_mass(int depth) const { return Rational(Int(1), mp::pow(Int(N_), depth)); }

NodeRef TreeMeasure::root() const {
  NodeRef r;
  r.center = root_;
  r.index = implicit_ ? -1 : 0;
  return r;
}

NodeRef TreeMeasure::child(const NodeRef& n, int c) const {
  require(n.depth < L_ && c >= 0 && c < N_, Errc::InvalidArgument, "no such child");
  NodeRef k;
  k.depth = n.depth + 1;
  k.path = n.path;
  k.path.push_back(static_cast<std::uint16_t>(c));
  if (!(radius(k.depth) > slack() * (1 + norm(n.center))))
    fail(Errc::PrecisionExhausted, "node radius at depth " + std::to_string(k.depth) + " is below the working precision");
  if (implicit_) {
    k.center = axpy(n.center, offsets_[c], radius(n.depth));
  } else {
    k.index = nodes_[n.index].children[c];
    k.center = nodes_[k.index].center;
  }
  return k;
}

std::vector<NodeRef> TreeMeasure::children(const NodeRef& n) const {
  std::vector<NodeRef> out;
  if (n.depth >= L_) return out;
  for (int c = 0; c < N_; ++c) out.push_back(child(n, c));
  return out;
}

NodeRef TreeMeasure::at(const NodePath& path) const {
  NodeRef n = root();
  for (auto c : path) n = child(n, c);
  return n;
}

NodeRef TreeMeasure::locate(const Ball& B) const {
  require(B.dim() == d_ && B.radius > 0, Errc::InvalidArgument, "ball does not match the tree");
  const long depth = lround((log(B.radius / r0_) / log(beta_)).convert_to<double>());
  require(depth >= 0 && depth <= L_, Errc::PreconditionViolated, "ball radius is not a tree radius");
  NodeRef n = root();
  for (long l = 0; l < depth; ++l) {
    NodeRef best;
    Real bestDist;
    for (int c = 0; c < N_; ++c) {
      NodeRef k = child(n, c);
      Real dist = distance(k.center, B.center);
      if (c == 0 || dist < bestDist) {
        best = std::move(k);
        bestDist = std::move(dist);
      }
    }
    n = std::move(best);
  }
  const Real r = radius(n.depth);
  require(abs(r - B.radius) <= slack() * r && distance(n.center, B.center) <= slack() * (r + norm(B.center)),
          Errc::PreconditionViolated, "ball is not a tree node");
  return n;
}

Real TreeMeasure::min_sibling_gap() const {
  Real best = std::numeric_limits<Real>::infinity();
  if (implicit_) {
    for (std::size_t a = 0; a < offsets_.size(); ++a)
      for (std::size_t b = 0; b < a; ++b) best = std::min(best, distance(offsets_[a], offsets_[b]) - 2 * beta_);
    return best;
  }
  for (const auto& n : nodes_) {
    const Real rho = radius(n.depth);
    for (std::size_t a = 0; a < n.children.size(); ++a)
      for (std::size_t b = 0; b < a; ++b)
        best = std::min(best, (distance(nodes_[n.children[a]].center, nodes_[n.children[b]].center) - 2 * beta_ * rho) /
                                  rho);
  }
  return best;
}

TreeMeasure TreeMeasure::materialize() const {
  if (!implicit_) return *this;
  std::vector<TreeNode> nodes;
  std::vector<NodeRef> queue{root()};
  nodes.push_back({-1, 0, root_, {}});
  for (std::size_t i = 0; i < queue.size(); ++i) {
    for (auto& c : children(queue[i])) {
      nodes[i].children.push_back(static_cast<int>(nodes.size()));
      nodes.push_back({static_cast<int>(i), c.depth, c.center, {}});
      queue.push_back(std::move(c));
    }
  }
  return from_nodes(beta_, r0_, N_, std::move(nodes));
}

TreeMeasure TreeMeasure::with_depth(int L) const {
  require(implicit_, Errc::InvalidArgument, "only self-similar trees change depth");
  require(L >= 0, Errc::InvalidArgument, "depth must be >= 0");
  TreeMeasure t = *this;
  t.L_ = L;
  return t;
}

// ---------------------------------------------------------------------------
// Exact masses

Rational tree_measure_where(const TreeMeasure& mu, const std::function<int(const Ball&)>& classify,
                            const std::function<bool(const RVec&)>& leaf_in) {
  std::function<Rational(const NodeRef&)> rec = [&](const NodeRef& n) -> Rational {
    const int c = classify(mu.ball(n));
    if (c > 0) return mu.node_mass(n.depth);
    if (c < 0) return Rational(0);
    if (n.depth == mu.depth()) return leaf_in(n.center) ? mu.node_mass(n.depth) : Rational(0);
    Rational s = 0;
    for (const auto& k : mu.children(n)) s += rec(k);
    return s;
  };
  return rec(mu.root());
}

Rational tree_measure_of_ball(const TreeMeasure& mu, const Ball& B) {
  return tree_measure_where(
      mu,
      [&](const Ball& b) {
        const Real dist = distance(b.center, B.center);
        if (dist + b.radius <= B.radius) return 1;
        if (dist > B.radius + b.radius) return -1;
        return 0;
      },
      [&](const RVec& x) { return distance(x, B.center) <= B.radius; });
}

Rational tree_measure_of_slab_in_ball(const TreeMeasure& mu, const HyperplaneNbhd& H, const Ball& B) {
  return tree_measure_where(
      mu,
      [&](const Ball& b) {
        const Real dist = distance(b.center, B.center);
        const Real sd = abs(H.signed_distance(b.center));
        if (dist > B.radius + b.radius || sd > H.width + b.radius) return -1;
        if (dist + b.radius <= B.radius && sd + b.radius <= H.width) return 1;
        return 0;
      },
      [&](const RVec& x) { return distance(x, B.center) <= B.radius && abs(H.signed_distance(x)) <= H.width; });
}

Rational tree_measure_of_neighbourhood(const TreeMeasure& mu, const std::vector<RVec>& S, const Real& r) {
  return tree_measure_where(
      mu,
      [&](const Ball& b) {
        bool all_far = true;
        for (const auto& s : S) {
          const Real dist = distance(b.center, s);
          if (dist + b.radius <= r) return 1;
          if (dist <= r + b.radius) all_far = false;
        }
        return all_far ? -1 : 0;
      },
      [&](const RVec& x) {
        for (const auto& s : S)
          if (distance(x, s) <= r) return true;
        return false;
      });
}

// ---------------------------------------------------------------------------
// Verifiers

Real closed_form_ahlfors(const TreeMeasure& mu) {
  const Real a = mu.alpha();
  const Real M = pow(Real(4), mu.dim());
  return std::max(pow(2 * mu.r0() / mu.beta(), a), M * pow(1 / (2 * mu.r0() * mu.beta()), a));
}

AhlforsReport verify_ahlfors(const TreeMeasure& mu, long samples, std::uint64_t seed) {
  require(samples >= 1, Errc::InvalidArgument, "samples must be >= 1");
  std::mt19937_64 rng(seed);
  AhlforsReport rep;
  rep.M = pow(Real(4), mu.dim());
  rep.closedFormA = closed_form_ahlfors(mu);
  rep.samples = samples;
  rep.empiricalA = 0;
  const Real a = mu.alpha();
  const Real lo = mu.radius(mu.depth()), hi = 2 * mu.r0();
  for (long k = 0; k < samples; ++k) {
    const NodeRef leaf = random_leaf(mu, mu.root(), rng);
    const Real r = mu.depth() == 0 ? hi : log_uniform(lo, hi, rng);
    const Real m = to_real(tree_measure_of_ball(mu, Ball{leaf.center, r}));
    const Real ra = pow(r, a);
    const Real worst = std::max(m / ra, ra / m);
    if (worst > rep.empiricalA) {
      rep.empiricalA = worst;
      rep.worstX = leaf.center;
      rep.worstR = r;
    }
  }
  rep.withinClosedForm = rep.empiricalA <= rep.closedFormA * (1 + slack());
  return rep;
}

DecayReport verify_absolute_decay(const TreeMeasure& mu, long trials, std::uint64_t seed) {
  require(trials >= 1, Errc::InvalidArgument, "trials must be >= 1");
  require(mu.depth() >= 2, Errc::InvalidArgument, "tree too shallow for decay sampling");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const int d = mu.dim();
  DecayReport rep;
  rep.trials = trials;
  rep.closedDelta = log(Real(d) / Real(d + 1)) / log(mu.beta());
  rep.closedD = pow(2 / mu.beta(), rep.closedDelta) * (d + 1);
  rep.fittedD = 0;
  rep.fittedDelta = std::numeric_limits<Real>::infinity();
  const Real floor_r = mu.radius(mu.depth());
  for (long k = 0; k < trials; ++k) {
    const NodeRef leaf = random_leaf(mu, mu.root(), rng);
    const Real r = log_uniform(mu.radius(mu.depth() - 1), mu.r0(), rng);
    const Real rp = log_uniform(floor_r, r, rng);
    // Hyperplane through a support point near x at scale r.
    int n = 0;
    while (n < mu.depth() && mu.radius(n + 1) >= r) ++n;
    NodePath prefix(leaf.path.begin(), leaf.path.begin() + n);
    const NodeRef y = random_leaf(mu, mu.at(prefix), rng);
    RVec normal(d);
    for (auto& v : normal) v = Real(gauss(rng));
    if (norm(normal) == 0) normal[0] = 1;
    HyperplaneNbhd H = hyperplane_at(normal, y.center, rp);
    const Ball B{leaf.center, r};
    const Rational slab = tree_measure_of_slab_in_ball(mu, H, B);
    const Rational ball = tree_measure_of_ball(mu, B);
    const Real ratio = to_real(slab / ball);
    const Real q = rp / r;
    if (ratio > rep.closedD * pow(q, rep.closedDelta) * (1 + slack())) ++rep.violations;
    if (ratio > 0 && rp < r) {
      ++rep.nontrivial;
      rep.fittedD = std::max(rep.fittedD, ratio / pow(q, rep.closedDelta));
      rep.fittedDelta = std::min(rep.fittedDelta, log(ratio / rep.closedD) / log(q));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Covers and hyperplanes

CoverResult efficient_cover(const std::vector<RVec>& S, const Real& r) {
  require(r > 0, Errc::InvalidArgument, "r must be positive");
  CoverResult out;
  for (std::size_t i = 0; i < S.size(); ++i) {
    bool free = true;
    for (auto j : out.centres)
      if (!(distance(S[i], S[j]) > 2 * r)) {
        free = false;
        break;
      }
    if (free) out.centres.push_back(i);
  }
  for (auto j : out.centres) out.balls.push_back(Ball{S[j], 3 * r});
  return out;
}

CoverResult efficient_cover(const std::vector<RVec>& S, const Real& r, const TreeMeasure& mu) {
  CoverResult out = efficient_cover(S, r);
  out.bound = closed_form_ahlfors(mu) * to_real(tree_measure_of_neighbourhood(mu, S, r)) / pow(r, mu.alpha());
  return out;
}

HyperplaneNbhd hyperplane_through(const std::vector<RVec>& points) {
  require(!points.empty(), Errc::InvalidShape, "no points");
  const int d = static_cast<int>(points.front().size());
  require(static_cast<int>(points.size()) == d, Errc::InvalidShape, "need exactly d points");
  std::vector<RVec> dirs;
  Real scale = 1;
  for (int k = 1; k < d; ++k) {
    dirs.push_back(sub(points[k], points[0]));
    scale *= std::max(Real(1), norm(dirs.back()));
  }
  RVec n = dual_normal(dirs, d);
  if (!(norm(n) > slack() * scale)) fail(Errc::Degenerate, "points are not in general position");
  return oriented(std::move(n), points[0]);
}

HyperplaneNbhd hyperplane_through_with_fallback(const std::vector<RVec>& points, const RVec& anchor) {
  const int d = static_cast<int>(anchor.size());
  require(static_cast<int>(points.size()) <= d, Errc::InvalidShape, "more than d points");
  const RVec base = points.empty() ? anchor : points.front();
  std::vector<RVec> dirs;
  for (std::size_t k = 1; k < points.size(); ++k) dirs.push_back(sub(points[k], base));
  auto rank_ok = [&](const std::vector<RVec>& v) {
    if (v.empty()) return true;
    Real scale = 1;
    for (const auto& x : v) scale *= std::max(Real(1), norm(x));
    return norm(wedge(v)) > slack() * scale;
  };
  if (!rank_ok(dirs)) fail(Errc::Degenerate, "points are not affinely independent");
  for (int e = 0; e < d && static_cast<int>(dirs.size()) < d - 1; ++e) {
    RVec u(d, Real(0));
    u[e] = 1;
    auto trial = dirs;
    trial.push_back(u);
    if (rank_ok(trial)) dirs = std::move(trial);
  }
  return oriented(dual_normal(dirs, d), base);
}

// ---------------------------------------------------------------------------
// Diffuse sets

RVec diffuse_query(const DiffuseOracle& K, const RVec& x, const Real& r, const HyperplaneNbhd& H) {
  require(K.beta0 > 0, Errc::PreconditionViolated, "oracle beta0 is not set");
  auto got = K.select(x, r, H, K.beta0);
  if (!got) fail(Errc::OracleViolation, K.name + ": no point of K found for the query");
  const Ball b{*got, K.beta0 * r};
  HyperplaneNbhd Hn = H;
  Hn.width = K.beta0 * r;
  if (!ball_inside(b, Ball{x, r}) || !ball_avoids(b, Hn))
    fail(Errc::OracleViolation, K.name + ": returned point violates the selection containment");
  return *got;
}

namespace {

// Endpoints of level-g middle-thirds intervals meeting [lo, hi].
void cantor_points(const Real& lo, const Real& hi, int g, std::vector<Real>& out) {
  const Real third = Real(1) / 3;
  struct Frame {
    Real a;
    Real len;
    int level;
  };
  std::vector<Frame> stack{{Real(0), Real(1), 0}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (f.a > hi || f.a + f.len < lo) continue;
    if (f.level == g) {
      if (f.a >= lo && f.a <= hi) out.push_back(f.a);
      if (f.a + f.len >= lo && f.a + f.len <= hi) out.push_back(f.a + f.len);
      continue;
    }
    const Real l = f.len * third;
    stack.push_back({f.a + 2 * l, l, f.level + 1});
    stack.push_back({f.a, l, f.level + 1});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

}  // namespace

DiffuseOracle cantor_grid_oracle(int d) {
  require(d >= 1 && d <= 3, Errc::InvalidArgument, "grid oracle supports d <= 3");
  DiffuseOracle K;
  K.d = d;
  K.beta0 = 0;
  K.r0 = Real(1) / 3;
  K.base = RVec(d, Real(0));
  K.name = "middle-thirds^" + std::to_string(d);
  K.select = [d](const RVec& x, const Real& r, const HyperplaneNbhd& H, const Real& beta0) -> std::optional<RVec> {
    int g = 0;
    Real len = 1;
    while (len > beta0 * r / 4) {
      len /= 3;
      ++g;
    }
    std::vector<std::vector<Real>> axis(d);
    for (int i = 0; i < d; ++i) cantor_points(x[i] - r, x[i] + r, g, axis[i]);
    std::optional<RVec> best;
    Real best_sd = -1;
    std::vector<std::size_t> idx(d, 0);
    for (;;) {
      RVec p(d);
      bool empty = false;
      for (int i = 0; i < d; ++i) {
        if (axis[i].empty()) {
          empty = true;
          break;
        }
        p[i] = axis[i][idx[i]];
      }
      if (empty) break;
      const Real sd = abs(H.signed_distance(p));
      if (distance(p, x) + beta0 * r <= r && sd >= 2 * beta0 * r && sd > best_sd) {
        best_sd = sd;
        best = p;
      }
      int i = 0;
      while (i < d && ++idx[i] == axis[i].size()) idx[i++] = 0;
      if (i == d) break;
    }
    return best;
  };
  return K;
}

Real discover_beta0(DiffuseOracle& K, long trials, std::uint64_t seed) {
  require(trials >= 1, Errc::InvalidArgument, "trials must be >= 1");
  std::normal_distribution<double> gauss;
  Real candidate = Real(1) / 3;
  for (int k = 1; k <= 40; ++k) {
    candidate *= Real(4) / 5;
    std::mt19937_64 rng(seed);
    bool ok = true;
    for (long t = 0; t < trials && ok; ++t) {
      // random point of C^d, random scale, hyperplane through a point near x
      RVec x(K.d);
      for (auto& xi : x) {
        Real v = 0, p = 1;
        for (int l = 0; l < 40; ++l) {
          p /= 3;
          if (rng() & 1) v += 2 * p;
        }
        xi = v;
      }
      const Real r = log_uniform(K.r0 / 1000, K.r0, rng);
      RVec normal(K.d), through = x;
      for (auto& v : normal) v = Real(gauss(rng));
      for (auto& v : through) v += r * (2 * uniform01(rng) - 1) / 2;
      if (norm(normal) == 0) normal[0] = 1;
      auto H = hyperplane_at(normal, through, Real(0));
      ok = K.select(x, r, H, candidate).has_value();
    }
    if (ok) {
      K.beta0 = candidate;
      return candidate;
    }
  }
  fail(Errc::OracleViolation, K.name + ": no beta0 passed the sampled queries");
}

TreeMeasure build_measure_from_diffuse(const DiffuseOracle& K, int L, std::optional<Real> betaPrime,
                                       MeasureBuildLog* log) {
  require(L >= 1, Errc::InvalidArgument, "depth must be >= 1");
  require(K.beta0 > 0 && K.beta0 < Real(1) / 3, Errc::PreconditionViolated, "oracle beta0 must lie in (0, 1/3)");
  const Real bp = betaPrime ? *betaPrime : K.beta0 / 3;
  require(bp > 0 && bp <= K.beta0, Errc::InvalidArgument, "beta' must lie in (0, beta0]");
  const Real beta = bp / 2;
  MeasureBuildLog local;
  MeasureBuildLog& lg = log ? *log : local;
  lg.betaPrime = bp;
  lg.beta = beta;

  std::vector<TreeNode> nodes{{-1, 0, K.base, {}}};
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].depth == L) continue;
    const int n = nodes[i].depth;
    const RVec x = nodes[i].center;
    const Real rho = K.r0 * pow(beta, n);
    std::vector<RVec> pts;
    for (int k = 0; k <= K.d; ++k) {
      HyperplaneNbhd H = hyperplane_through_with_fallback(pts, x);
      H.width = K.beta0 * rho;
      pts.push_back(diffuse_query(K, x, rho, H));
      ++lg.containmentChecks;
    }
    const Real child_r = rho * beta;
    for (std::size_t a = 0; a < pts.size(); ++a)
      for (std::size_t b = 0; b < a; ++b) {
        ++lg.disjointChecks;
        if (!balls_disjoint(Ball{pts[a], child_r}, Ball{pts[b], child_r}))
          fail(Errc::OracleViolation, "selected children overlap");
      }
    for (auto& p : pts) {
      nodes[i].children.push_back(static_cast<int>(nodes.size()));
      nodes.push_back({static_cast<int>(i), n + 1, std::move(p), {}});
    }
  }
  return TreeMeasure::from_nodes(beta, K.r0, K.d + 1, std::move(nodes));
}

// ---------------------------------------------------------------------------
// Serialisation

namespace {

using nlohmann::json;

json vec_json(const RVec& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(to_decimal(x));
  return a;
}

RVec json_vec(const json& a) {
  RVec v;
  for (const auto& s : a) v.push_back(from_decimal(s.get<std::string>()));
  return v;
}

}  // namespace

std::string tree_to_json(const TreeMeasure& mu) {
  json j;
  j["format"] = "badw-tree";
  j["version"] = 1;
  j["mode"] = mu.implicit() ? "self-similar" : "explicit";
  j["precisionBits"] = precision();
  j["beta"] = to_decimal(mu.beta());
  j["r0"] = to_decimal(mu.r0());
  j["N"] = mu.branching();
  j["depth"] = mu.depth();
  j["d"] = mu.dim();
  if (mu.implicit()) {
    j["root"] = vec_json(mu.root().center);
    json offs = json::array();
    for (const auto& o : mu.offsets()) offs.push_back(vec_json(o));
    j["offsets"] = offs;
  } else {
    json nodes = json::array();
    for (const auto& n : mu.nodes()) nodes.push_back({{"parent", n.parent}, {"center", vec_json(n.center)}});
    j["nodes"] = nodes;
  }
  return j.dump();
}

TreeMeasure tree_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::InvalidArgument, std::string("tree JSON: ") + e.what());
  }
  if (j.value("format", "") != "badw-tree" || j.value("version", 0) != 1)
    fail(Errc::InvalidArgument, "tree JSON: unknown format or version");
  try {
    const Real beta = from_decimal(j.at("beta").get<std::string>());
    const Real r0 = from_decimal(j.at("r0").get<std::string>());
    const int N = j.at("N").get<int>();
    if (j.at("mode").get<std::string>() == "self-similar") {
      std::vector<RVec> offs;
      for (const auto& o : j.at("offsets")) offs.push_back(json_vec(o));
      return TreeMeasure::self_similar(beta, r0, json_vec(j.at("root")), std::move(offs), j.at("depth").get<int>());
    }
    std::vector<TreeNode> nodes;
    for (const auto& n : j.at("nodes")) {
      TreeNode t;
      t.parent = n.at("parent").get<int>();
      t.center = json_vec(n.at("center"));
      if (t.parent >= 0) {
        require(t.parent < static_cast<int>(nodes.size()), Errc::InvalidShape, "parent after child");
        t.depth = nodes[t.parent].depth + 1;
        nodes[t.parent].children.push_back(static_cast<int>(nodes.size()));
      }
      nodes.push_back(std::move(t));
    }
    return TreeMeasure::from_nodes(beta, r0, N, std::move(nodes));
  } catch (const json::exception& e) {
    fail(Errc::InvalidArgument, std::string("tree JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Presets

TreeMeasure middle_thirds_tree(int L) {
  return TreeMeasure::self_similar(Real(1) / 3, Real(1) / 2, {Real(1) / 2}, {{Real(-2) / 3}, {Real(2) / 3}}, L)
      .materialize();
}

TreeMeasure dyadic_tree(int L) {
  return TreeMeasure::self_similar(Real(1) / 2, Real(1) / 2, {Real(1) / 2}, {{Real(-1) / 2}, {Real(1) / 2}}, L)
      .materialize();
}

TreeMeasure product_disc_tree(int L) {
  const Real o = Real(2) / 3 / sqrt(Real(2));
  return TreeMeasure::self_similar(Real(1) / 3, Real(1) / 2, {Real(1) / 2, Real(1) / 2},
                                   {{-o, -o}, {-o, o}, {o, -o}, {o, o}}, L)
      .materialize();
}

TreeMeasure triangle_tree(const Real& beta, const Real& r0, int L) {
  std::vector<RVec> offs;
  for (int c = 0; c < 3; ++c) {
    const Real th = 1 + 2 * pi() * c / 3;
    offs.push_back({cos(th) / 2, sin(th) / 2});
  }
  return TreeMeasure::self_similar(beta, r0, {Real(0), Real(0)}, std::move(offs), L);
}

}  // namespace badw
