#include "badw/games.hpp"

#include "json.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <sstream>

namespace badw {

namespace {

bool rel_equal(const Real& a, const Real& b) { return abs(a - b) <= slack() * abs(b); }

std::optional<Violation> violation(const std::string& role, int step, const std::string& inv, const std::string& detail) {
  return Violation{role, step, inv, detail};
}

RVec gaussian_vector(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> g(0, 1);
  RVec v(d);
  for (;;) {
    for (auto& x : v) x = g(rng);
    if (norm(v) > 0) return v;
  }
}

RVec uniform_in_ball(std::mt19937_64& rng, const RVec& c, const Real& r) {
  std::uniform_real_distribution<double> u(0, 1);
  RVec v = gaussian_vector(rng, static_cast<int>(c.size()));
  const Real s = r * pow(Real(u(rng)), Real(1) / static_cast<int>(c.size())) / norm(v);
  for (std::size_t i = 0; i < c.size(); ++i) v[i] = c[i] + v[i] * s;
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Types

GameVariant GameVariant::haw() { return {GameKind::HAW, Real(0)}; }
GameVariant GameVariant::restricted() { return {GameKind::RestrictedHAW, Real(0)}; }
GameVariant GameVariant::cantor(const Real& alpha) { return {GameKind::CantorPotential, alpha}; }

std::string GameVariant::name() const {
  switch (kind) {
    case GameKind::HAW: return "HAW";
    case GameKind::RestrictedHAW: return "RestrictedHAW";
    case GameKind::CantorPotential: return "CantorPotential";
  }
  return "?";
}

AliceMove AliceMove::hyperplane(HyperplaneNbhd h) {
  AliceMove m;
  m.nbhd = std::move(h);
  return m;
}

AliceMove AliceMove::cantor(std::vector<BallFamily> families) {
  AliceMove m;
  m.families = std::move(families);
  return m;
}

const Ball& GameTranscript::ball(int n) const {
  if (n == 0) return B0;
  require(n >= 1 && n <= static_cast<int>(rounds.size()) && rounds[n - 1].bob, Errc::InvalidArgument,
          "no Bob ball B_" + std::to_string(n));
  return *rounds[n - 1].bob;
}

int GameTranscript::bob_moves() const {
  int k = 0;
  for (const auto& r : rounds)
    if (r.bob) ++k;
  return k;
}

IllegalMoveError::IllegalMoveError(Violation v, GameTranscript attempted)
    : Error(Errc::IllegalMove, v.role + " step " + std::to_string(v.step) + ": " + v.invariant +
                                   (v.detail.empty() ? "" : " (" + v.detail + ")")),
      v_(std::move(v)),
      attempted_(std::move(attempted)) {}

Real schedule_radius(const Real& beta, const Real& r0, long n) { return r0 * pow(beta, n); }

Real cantor_budget(const Real& beta, const Real& alpha, int i) { return pow(beta, -alpha * (i + 1)); }

// ---------------------------------------------------------------------------
// Invariants

std::optional<Violation> check_setup(const GameTranscript& t) {
  if (!(t.beta > 0 && t.beta < 1)) return violation("setup", 0, "beta-range", "beta must lie in (0, 1)");
  if (t.variant.kind == GameKind::HAW && !(3 * t.beta < 1))
    return violation("setup", 0, "beta-range", "HAW needs beta < 1/3");
  if (t.variant.kind == GameKind::CantorPotential && !(t.variant.alpha >= 0))
    return violation("setup", 0, "alpha-range", "alpha must be >= 0");
  if (t.B0.dim() < 1 || !(t.B0.radius > 0)) return violation("setup", 0, "ball", "B0 needs a positive radius");
  return std::nullopt;
}

std::optional<Violation> check_alice(const GameTranscript& t, int n, const AliceMove& a) {
  const int step = n + 1, d = t.B0.dim();
  const Real& r0 = t.B0.radius;
  if (t.variant.kind == GameKind::CantorPotential) {
    if (a.nbhd) return violation("alice", step, "move-kind", "Cantor moves are ball families");
    int prev = -1;
    for (const auto& f : a.families) {
      if (f.i <= prev) return violation("alice", step, "family-index", "indices must be increasing and >= 0");
      prev = f.i;
      const Real radius = schedule_radius(t.beta, r0, n + 1 + f.i);
      for (const auto& b : f.balls) {
        if (b.dim() != d) return violation("alice", step, "dimension", "family " + std::to_string(f.i));
        if (!rel_equal(b.radius, radius))
          return violation("alice", step, "family-radius", "family " + std::to_string(f.i) + " needs beta^{n+1+i} r0");
      }
      const Real budget = cantor_budget(t.beta, t.variant.alpha, f.i) * (1 + slack());
      if (Real(static_cast<long>(f.balls.size())) > budget)
        return violation("alice", step, "family-count",
                         "family " + std::to_string(f.i) + " has " + std::to_string(f.balls.size()) + " balls");
      if (f.declaredSize) {
        if (*f.declaredSize < static_cast<long>(f.balls.size()))
          return violation("alice", step, "family-count", "declared size below the materialised count");
        if (Real(*f.declaredSize) > budget)
          return violation("alice", step, "family-count",
                           "family " + std::to_string(f.i) + " declares " + std::to_string(*f.declaredSize) + " balls");
      }
    }
    return std::nullopt;
  }
  if (!a.nbhd || !a.families.empty()) return violation("alice", step, "move-kind", "a hyperplane neighbourhood is required");
  const auto& h = *a.nbhd;
  if (h.dim() != d) return violation("alice", step, "dimension", "");
  if (abs(norm(h.normal) - 1) > slack()) return violation("alice", step, "normal", "normal must be a unit vector");
  if (!(h.width > 0)) return violation("alice", step, "width", "width must be positive");
  if (t.variant.kind == GameKind::RestrictedHAW) {
    if (!rel_equal(h.width, schedule_radius(t.beta, r0, n + 1)))
      return violation("alice", step, "width", "width must be beta^{n+1} r0");
  } else {
    if (h.width > t.beta * t.ball(n).radius * (1 + slack()))
      return violation("alice", step, "width", "width must be at most beta r_n");
  }
  return std::nullopt;
}

std::vector<Ball> active_balls(const GameTranscript& t, int n) {
  std::vector<Ball> out;
  for (int j = 1; j <= n + 1 && j <= static_cast<int>(t.rounds.size()); ++j) {
    const int i = n + 1 - j;
    for (const auto& f : t.rounds[j - 1].alice.families)
      if (f.i == i) out.insert(out.end(), f.balls.begin(), f.balls.end());
  }
  return out;
}

std::optional<Violation> check_bob(const GameTranscript& t, int n, const Ball& b) {
  const int step = n + 1;
  const Ball& Bn = t.ball(n);
  if (b.dim() != t.B0.dim()) return violation("bob", step, "dimension", "");
  if (!(b.radius > 0)) return violation("bob", step, "radius", "radius must be positive");
  if (t.variant.kind == GameKind::HAW) {
    if (b.radius < t.beta * Bn.radius * (1 - slack())) return violation("bob", step, "radius", "needs r_{n+1} >= beta r_n");
  } else if (!rel_equal(b.radius, schedule_radius(t.beta, t.B0.radius, n + 1))) {
    return violation("bob", step, "radius", "needs r_{n+1} = beta^{n+1} r0");
  }
  if (!ball_inside(b, Bn)) return violation("bob", step, "containment", "B_{n+1} must lie in B_n");
  if (t.variant.kind == GameKind::CantorPotential) {
    for (const auto& A : active_balls(t, n))
      if (!balls_disjoint(b, A)) return violation("bob", step, "avoidance", "B_{n+1} meets an active Alice ball");
  } else {
    const auto& a = t.rounds.at(n).alice;
    if (!a.nbhd || !ball_avoids(b, *a.nbhd)) return violation("bob", step, "avoidance", "B_{n+1} meets A_{n+1}");
  }
  return std::nullopt;
}

bool restricted_ball_exists(const Ball& Bn, const HyperplaneNbhd& A, const Real& rho) {
  // The farthest admissible centre from H sits (r - rho) away from the centre
  // along the normal; closed sets, so touching is not enough.
  return abs(A.signed_distance(Bn.center)) + (Bn.radius - rho) > A.width + rho;
}

ValidationResult validate_transcript(const GameTranscript& t) {
  auto bad = [](Violation v) { return ValidationResult{false, std::move(v)}; };
  if (auto v = check_setup(t)) return bad(*v);
  const int R = static_cast<int>(t.rounds.size());
  for (int n = 0; n < R; ++n) {
    const Round& rd = t.rounds[n];
    if (auto v = check_alice(t, n, rd.alice)) return bad(*v);
    if (!rd.bob) {
      if (n + 1 != R) return bad({"bob", n + 1, "missing-move", "only the final round may lack a Bob ball"});
      break;
    }
    if (auto v = check_bob(t, n, *rd.bob)) return bad(*v);
  }
  const bool open_end = R > 0 && !t.rounds.back().bob;
  switch (t.status) {
    case GameStatus::Running:
      break;
    case GameStatus::AliceWinsByDefault: {
      if (!open_end) return bad({"bob", R, "default-claim", "a default needs a final round without Bob ball"});
      const int n = R - 1;
      if (t.variant.kind == GameKind::HAW)
        return bad({"bob", R, "default-claim", "beta < 1/3 always leaves a legal ball"});
      if (t.variant.kind == GameKind::RestrictedHAW &&
          restricted_ball_exists(t.ball(n), *t.rounds[n].alice.nbhd, schedule_radius(t.beta, t.B0.radius, n + 1)))
        return bad({"bob", R, "default-claim", "a legal ball exists"});
      break;
    }
    case GameStatus::Outcome: {
      if (open_end) return bad({"bob", R, "missing-move", "outcome with an unanswered Alice move"});
      const Ball& last = t.ball(R);
      if (t.outcome.size() != last.center.size() || distance(t.outcome, last.center) > slack() * (1 + norm(last.center)) ||
          !rel_equal(t.outcomeRadius, last.radius))
        return bad({"setup", R, "outcome", "outcome must be the last Bob ball"});
      break;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Engine

namespace {

void materialise(GameTranscript& t, int n) {
  // Families that become active at step n+1 are only needed inside B_n.
  const Ball& Bn = t.ball(n);
  for (int j = 1; j <= n + 1; ++j) {
    AliceMove& a = t.rounds[j - 1].alice;
    if (!a.lazy) continue;
    const int i = n + 1 - j;
    BallFamily f;
    f.i = i;
    f.balls = a.lazy->meeting(i, Bn);
    f.declaredSize = a.lazy->size(i);
    f.region = Bn;
    if (f.balls.empty() && !f.declaredSize) continue;
    auto pos = std::find_if(a.families.begin(), a.families.end(), [&](const BallFamily& g) { return g.i >= i; });
    require(pos == a.families.end() || pos->i != i, Errc::InvalidArgument, "family materialised twice");
    a.families.insert(pos, std::move(f));
    if (auto v = check_alice(t, j - 1, a)) throw IllegalMoveError(*v, t);
  }
}

}  // namespace

GameTranscript play(const GameVariant& variant, const Real& beta, const Ball& B0, AliceStrategy& alice,
                    BobStrategy& bob, int maxRounds) {
  require(maxRounds >= 1, Errc::InvalidArgument, "maxRounds must be >= 1");
  GameTranscript t;
  t.variant = variant;
  t.beta = beta;
  t.B0 = B0;
  if (auto v = check_setup(t)) throw IllegalMoveError(*v, t);
  for (int n = 0; n < maxRounds; ++n) {
    const GameView view{t, n};
    AliceMove a = alice.move(view);
    auto va = check_alice(t, n, a);
    t.rounds.push_back({std::move(a), std::nullopt});
    if (va) throw IllegalMoveError(*va, t);
    if (variant.kind == GameKind::CantorPotential) materialise(t, n);
    const std::vector<Ball> active =
        variant.kind == GameKind::CantorPotential ? active_balls(t, n) : std::vector<Ball>{};

    std::optional<Ball> b;
    std::string why;
    try {
      b = bob.move(view, t.rounds.back().alice, active);
    } catch (const Error& e) {
      if (e.code() != Errc::NoLegalMove) throw;
      why = e.what();
    }
    if (!b) {
      const int step = n + 1;
      t.status = GameStatus::AliceWinsByDefault;
      if (variant.kind == GameKind::HAW)
        throw IllegalMoveError({"bob", step, "default-claim", "beta < 1/3 always leaves a legal ball"}, t);
      if (variant.kind == GameKind::RestrictedHAW) {
        if (restricted_ball_exists(t.ball(n), *t.rounds.back().alice.nbhd, schedule_radius(beta, B0.radius, n + 1)))
          throw IllegalMoveError({"bob", step, "default-claim", "a legal ball exists"}, t);
        t.note = "no ball of radius beta^{n+1} r0 fits in B_n outside A_{n+1} (checked exactly)";
      } else {
        t.note = "Bob found no legal ball among its candidates" + (why.empty() ? std::string() : ": " + why);
      }
      return t;
    }
    auto vb = check_bob(t, n, *b);
    t.rounds.back().bob = std::move(b);
    if (vb) throw IllegalMoveError(*vb, t);
  }
  const Ball& last = t.ball(maxRounds);
  t.status = GameStatus::Outcome;
  t.outcome = last.center;
  t.outcomeRadius = last.radius;
  return t;
}

// ---------------------------------------------------------------------------
// JSONL

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

json ball_json(const Ball& b) { return {{"c", vec_json(b.center)}, {"r", to_decimal(b.radius)}}; }
Ball json_ball(const json& j) { return {json_vec(j.at("c")), from_decimal(j.at("r").get<std::string>())}; }

const char* status_name(GameStatus s) {
  switch (s) {
    case GameStatus::Running: return "running";
    case GameStatus::AliceWinsByDefault: return "aliceWinsByDefault";
    case GameStatus::Outcome: return "outcome";
  }
  return "?";
}

}  // namespace

std::string transcript_to_jsonl(const GameTranscript& t) {
  std::ostringstream os;
  json h;
  h["type"] = "header";
  h["format"] = "badw-transcript";
  h["version"] = 1;
  h["variant"] = t.variant.name();
  if (t.variant.kind == GameKind::CantorPotential) h["alpha"] = to_decimal(t.variant.alpha);
  h["beta"] = to_decimal(t.beta);
  h["precisionBits"] = precision();
  h["B0"] = ball_json(t.B0);
  h["meta"] = t.meta;
  os << h.dump() << '\n';
  for (std::size_t n = 0; n < t.rounds.size(); ++n) {
    const auto& rd = t.rounds[n];
    json a;
    if (rd.alice.nbhd)
      a["nbhd"] = {{"normal", vec_json(rd.alice.nbhd->normal)},
                   {"offset", to_decimal(rd.alice.nbhd->offset)},
                   {"width", to_decimal(rd.alice.nbhd->width)}};
    if (t.variant.kind == GameKind::CantorPotential) {
      json fams = json::array();
      for (const auto& f : rd.alice.families) {
        json fj;
        fj["i"] = f.i;
        json bs = json::array();
        for (const auto& b : f.balls) bs.push_back(ball_json(b));
        fj["balls"] = bs;
        if (f.region) fj["region"] = ball_json(*f.region);
        if (f.declaredSize) fj["declaredSize"] = *f.declaredSize;
        fams.push_back(fj);
      }
      a["families"] = fams;
    }
    json r;
    r["type"] = "round";
    r["step"] = n + 1;
    r["alice"] = a;
    r["bob"] = rd.bob ? ball_json(*rd.bob) : json(nullptr);
    os << r.dump() << '\n';
  }
  json s;
  s["type"] = "status";
  s["status"] = status_name(t.status);
  if (t.status == GameStatus::Outcome) {
    s["outcome"] = vec_json(t.outcome);
    s["radius"] = to_decimal(t.outcomeRadius);
  }
  if (!t.note.empty()) s["note"] = t.note;
  os << s.dump() << '\n';
  return os.str();
}

GameTranscript transcript_from_jsonl(const std::string& text) {
  GameTranscript t;
  std::istringstream is(text);
  std::string line;
  bool header = false, status = false;
  try {
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        require(j.at("format") == "badw-transcript" && j.at("version") == 1, Errc::InvalidArgument,
                "not a version-1 badw transcript");
        const unsigned bits = j.at("precisionBits").get<unsigned>();
        require(bits <= precision(), Errc::InvalidArgument,
                "transcript was written at " + std::to_string(bits) + " bits; raise the working precision");
        const std::string v = j.at("variant").get<std::string>();
        if (v == "HAW") t.variant = GameVariant::haw();
        else if (v == "RestrictedHAW") t.variant = GameVariant::restricted();
        else if (v == "CantorPotential") t.variant = GameVariant::cantor(from_decimal(j.at("alpha").get<std::string>()));
        else fail(Errc::InvalidArgument, "unknown variant " + v);
        t.beta = from_decimal(j.at("beta").get<std::string>());
        t.B0 = json_ball(j.at("B0"));
        if (j.contains("meta")) t.meta = j.at("meta").get<std::map<std::string, std::string>>();
        header = true;
      } else if (type == "round") {
        require(header, Errc::InvalidArgument, "round before header");
        require(j.at("step").get<std::size_t>() == t.rounds.size() + 1, Errc::InvalidArgument, "rounds out of order");
        Round rd;
        const json& a = j.at("alice");
        if (a.contains("nbhd")) {
          const json& h = a.at("nbhd");
          rd.alice.nbhd = HyperplaneNbhd{json_vec(h.at("normal")), from_decimal(h.at("offset").get<std::string>()),
                                         from_decimal(h.at("width").get<std::string>())};
        }
        if (a.contains("families"))
          for (const auto& fj : a.at("families")) {
            BallFamily f;
            f.i = fj.at("i").get<int>();
            for (const auto& b : fj.at("balls")) f.balls.push_back(json_ball(b));
            if (fj.contains("region")) f.region = json_ball(fj.at("region"));
            if (fj.contains("declaredSize")) f.declaredSize = fj.at("declaredSize").get<long>();
            rd.alice.families.push_back(std::move(f));
          }
        if (!j.at("bob").is_null()) rd.bob = json_ball(j.at("bob"));
        t.rounds.push_back(std::move(rd));
      } else if (type == "status") {
        const std::string s = j.at("status").get<std::string>();
        if (s == "running") t.status = GameStatus::Running;
        else if (s == "aliceWinsByDefault") t.status = GameStatus::AliceWinsByDefault;
        else if (s == "outcome") {
          t.status = GameStatus::Outcome;
          t.outcome = json_vec(j.at("outcome"));
          t.outcomeRadius = from_decimal(j.at("radius").get<std::string>());
        } else fail(Errc::InvalidArgument, "unknown status " + s);
        if (j.contains("note")) t.note = j.at("note").get<std::string>();
        status = true;
      } else {
        fail(Errc::InvalidArgument, "unknown line type " + type);
      }
    }
  } catch (const json::exception& e) {
    fail(Errc::InvalidArgument, std::string("malformed transcript: ") + e.what());
  }
  require(header && status, Errc::InvalidArgument, "transcript needs a header and a status line");
  return t;
}

// ---------------------------------------------------------------------------
// Strategies

namespace {

class CenterSplit : public PositionalAlice {
public:
  explicit CenterSplit(RVec normal) : normal_(std::move(normal)) {}
  std::string name() const override { return "center-split"; }
  HyperplaneNbhd on_ball(const Ball& B, const Real& beta) const override {
    RVec nrm = normal_;
    if (nrm.empty()) {
      nrm.assign(B.dim(), Real(0));
      nrm[0] = 1;
    }
    require(static_cast<int>(nrm.size()) == B.dim(), Errc::InvalidShape, "normal dimension");
    return hyperplane_at(std::move(nrm), B.center, beta * B.radius);
  }

private:
  RVec normal_;
};

class RandomAlice : public AliceStrategy {
public:
  explicit RandomAlice(std::uint64_t seed) : rng_(seed) {}
  std::string name() const override { return "random"; }
  AliceMove move(const GameView& g) override {
    const Ball& B = g.current();
    const Real& r0 = g.t.B0.radius;
    std::uniform_real_distribution<double> u(0, 1);
    if (g.variant().kind == GameKind::CantorPotential) {
      std::vector<BallFamily> fams;
      for (int i = 0; i <= 2; ++i) {
        const Real budget = cantor_budget(g.beta(), g.variant().alpha, i);
        const long cap = std::min<long>(3, static_cast<long>(floor(budget).convert_to<double>()));
        const long count = std::uniform_int_distribution<long>(0, cap)(rng_);
        BallFamily f{i, {}, std::nullopt, std::nullopt};
        const Real radius = schedule_radius(g.beta(), r0, g.n + 1 + i);
        for (long c = 0; c < count; ++c) f.balls.push_back({uniform_in_ball(rng_, B.center, B.radius), radius});
        if (!f.balls.empty()) fams.push_back(std::move(f));
      }
      return AliceMove::cantor(std::move(fams));
    }
    RVec nrm = gaussian_vector(rng_, B.dim());
    const RVec through = uniform_in_ball(rng_, B.center, B.radius);
    const Real width = g.variant().kind == GameKind::RestrictedHAW ? schedule_radius(g.beta(), r0, g.n + 1)
                                                                    : g.beta() * B.radius * (1 - Real(u(rng_)));
    return AliceMove::hyperplane(hyperplane_at(std::move(nrm), through, width));
  }

private:
  std::mt19937_64 rng_;
};

class EmptyAlice : public AliceStrategy {
public:
  std::string name() const override { return "empty"; }
  AliceMove move(const GameView& g) override {
    require(g.variant().kind == GameKind::CantorPotential, Errc::InvalidArgument,
            "the empty strategy only exists in the Cantor potential game");
    return AliceMove::cantor({});
  }
};

class RandomBob : public BobStrategy {
public:
  RandomBob(std::uint64_t seed, RandomBobOptions opt) : rng_(seed), opt_(opt) {}
  std::string name() const override { return "random"; }
  std::optional<Ball> move(const GameView& g, const AliceMove& a, const std::vector<Ball>& active) override {
    const Ball& B = g.current();
    std::uniform_real_distribution<double> u(0, 1);
    Real rho;
    if (g.variant().kind == GameKind::HAW) {
      const Real lo = g.beta() * B.radius;
      const Real hi = (B.radius - a.nbhd->width) / 2;
      rho = opt_.exactRatio ? lo : lo + (hi - lo) * Real(u(rng_));
    } else {
      rho = schedule_radius(g.beta(), g.t.B0.radius, g.n + 1);
    }
    auto legal = [&](const Ball& c) {
      if (a.nbhd) return ball_avoids(c, *a.nbhd);
      for (const auto& A : active)
        if (!balls_disjoint(c, A)) return false;
      return true;
    };
    for (int k = 0; k < opt_.tries; ++k) {
      Ball c{uniform_in_ball(rng_, B.center, B.radius - rho), rho};
      if (legal(c)) return c;
    }
    if (a.nbhd) {
      // Farthest admissible centre from the hyperplane.
      const Real sd = a.nbhd->signed_distance(B.center);
      const Real s = sd < 0 ? Real(-1) : Real(1);
      RVec y = B.center;
      for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * (B.radius - rho) * a.nbhd->normal[i];
      Ball c{y, rho};
      if (legal(c)) return c;
    }
    return std::nullopt;
  }

private:
  std::mt19937_64 rng_;
  RandomBobOptions opt_;
};

class DiffuseBob : public BobStrategy {
public:
  explicit DiffuseBob(DiffuseOracle K) : K_(std::move(K)) {}
  std::string name() const override { return "diffuse(" + K_.name + ")"; }
  std::optional<Ball> move(const GameView& g, const AliceMove& a, const std::vector<Ball>&) override {
    require(g.variant().kind == GameKind::RestrictedHAW, Errc::PreconditionViolated,
            "diffuse Bob plays the restricted game");
    require(g.beta() <= K_.beta0, Errc::PreconditionViolated, "game beta exceeds the oracle's beta0");
    const Ball& B = g.current();
    RVec x = diffuse_query(K_, B.center, B.radius, *a.nbhd);
    return Ball{std::move(x), schedule_radius(g.beta(), g.t.B0.radius, g.n + 1)};
  }

private:
  DiffuseOracle K_;
};

class TreeBob : public BobStrategy {
public:
  explicit TreeBob(TreeMeasure mu) : mu_(std::move(mu)) {}
  std::string name() const override { return "tree"; }

  std::optional<Ball> move(const GameView& g, const AliceMove&, const std::vector<Ball>& active) override {
    const int m = levels(g.beta());
    const Ball& B = g.current();
    const NodeRef node = locate(g, m);
    require((g.n + 1) * m <= mu_.depth(), Errc::PreconditionViolated, "tree is too shallow for this round");

    std::vector<NodeRef> cands{node};
    for (int l = 0; l < m; ++l) {
      std::vector<NodeRef> next;
      for (const auto& c : cands)
        for (auto& ch : mu_.children(c)) next.push_back(std::move(ch));
      cands = std::move(next);
    }
    const Real inf = std::numeric_limits<double>::infinity();
    std::optional<NodeRef> best;
    Real bestScore;
    for (const auto& c : cands) {
      const Ball cb = mu_.ball(c);
      if (!ball_inside(cb, B)) continue;
      Real score = inf;
      bool ok = true;
      for (const auto& A : active) {
        if (!balls_disjoint(cb, A)) {
          ok = false;
          break;
        }
        score = std::min(score, distance(cb.center, A.center) - A.radius);
      }
      if (!ok) continue;
      if (!best || score > bestScore ||
          (score == bestScore && std::lexicographical_compare(c.center.begin(), c.center.end(), best->center.begin(),
                                                              best->center.end()))) {
        best = c;
        bestScore = score;
      }
    }
    if (!best)
      fail(Errc::NoLegalMove, "every tree node of depth " + std::to_string((g.n + 1) * m) + " in B_" +
                                  std::to_string(g.n) + " meets an Alice ball");
    return mu_.ball(*best);
  }

private:
  int levels(const Real& beta) const {
    const Real m = log(beta) / log(mu_.beta());
    const long k = lround(m.convert_to<double>());
    require(k >= 1 && rel_equal(pow(mu_.beta(), k), beta), Errc::PreconditionViolated,
            "game beta must be an integer power of the tree beta");
    return static_cast<int>(k);
  }

  // The tree node carrying B_n.
  NodeRef locate(const GameView& g, int m) const {
    require(g.n * m <= mu_.depth(), Errc::PreconditionViolated, "B_n lies below the tree depth");
    NodeRef node = mu_.locate(g.current());
    require(node.depth == g.n * m, Errc::PreconditionViolated, "B_" + std::to_string(g.n) + " is not a tree node");
    return node;
  }

  TreeMeasure mu_;
};

class Transformed : public PositionalAlice {
public:
  Transformed(std::shared_ptr<const PositionalAlice> F, Real beta) : F_(std::move(F)), beta_(std::move(beta)) {}
  std::string name() const override { return "G[" + F_->name() + "]"; }
  HyperplaneNbhd on_ball(const Ball& B, const Real& beta) const override {
    require(rel_equal(beta, beta_), Errc::PreconditionViolated, "transform built for a different beta");
    const Real q = beta_ / 2;
    const long m = positional_scale(B.radius, beta_);
    HyperplaneNbhd h = F_->on_ball(Ball{B.center, pow(q, 2 * m)}, q * q);
    h.width = 2 * pow(q, 2 * m + 2);
    return h;
  }

private:
  std::shared_ptr<const PositionalAlice> F_;
  Real beta_;
};

}  // namespace

std::unique_ptr<PositionalAlice> center_split_alice(RVec normal) { return std::make_unique<CenterSplit>(std::move(normal)); }
std::unique_ptr<AliceStrategy> random_alice(std::uint64_t seed) { return std::make_unique<RandomAlice>(seed); }
std::unique_ptr<AliceStrategy> empty_alice() { return std::make_unique<EmptyAlice>(); }
std::unique_ptr<BobStrategy> random_bob(std::uint64_t seed, RandomBobOptions opt) {
  return std::make_unique<RandomBob>(seed, opt);
}
std::unique_ptr<BobStrategy> diffuse_bob(const DiffuseOracle& K) { return std::make_unique<DiffuseBob>(K); }
std::unique_ptr<BobStrategy> tree_bob(const TreeMeasure& mu) { return std::make_unique<TreeBob>(mu); }

// ---------------------------------------------------------------------------
// Positional transformation

long positional_scale(const Real& r, const Real& beta) {
  require(r > 0 && beta > 0 && beta < 1, Errc::InvalidArgument, "need r > 0 and 0 < beta < 1");
  const Real q = beta / 2;
  const Real L = log(r) / log(q);
  long m = static_cast<long>(ceil((L - 1) / 2).convert_to<double>());
  // Settle rounding at the window edges with the defining inequalities.
  for (int guard = 0; guard < 8; ++guard) {
    if (!(pow(q, 2 * m + 1) <= r)) ++m;
    else if (!(r < pow(q, 2 * m - 1))) --m;
    else return m;
  }
  fail(Errc::PrecisionExhausted, "could not place r in a (beta/2)^2 window");
}

std::unique_ptr<PositionalAlice> positional_transform(std::shared_ptr<const PositionalAlice> F, const Real& beta) {
  require(F && F->positional(), Errc::InvalidArgument, "F must be a positional strategy");
  require(beta > 0 && 3 * beta < 1, Errc::InvalidArgument, "the transform needs 0 < beta < 1/3");
  return std::make_unique<Transformed>(std::move(F), beta);
}

ExtractionResult extract_restricted_subgame(const GameTranscript& t, const Real& beta) {
  require(t.variant.kind == GameKind::HAW, Errc::InvalidArgument, "extraction reads a HAW transcript");
  require(rel_equal(t.beta, beta), Errc::InvalidArgument, "beta differs from the transcript");
  ExtractionResult out;
  const Real q = beta / 2, q2 = q * q;
  out.sub.variant = GameVariant::restricted();
  out.sub.beta = q2;
  const int N = t.bob_moves();
  if (N < 1) return out;
  auto r = [&](int n) -> const Real& { return t.ball(n).radius; };

  // k0: least k with (beta/2)^{2k} < r_1.
  long k0 = static_cast<long>(floor(log(r(1)) / (2 * log(q))).convert_to<double>()) + 1;
  while (pow(q, 2 * (k0 - 1)) < r(1)) --k0;
  while (!(pow(q, 2 * k0) < r(1))) ++k0;
  out.k0 = k0;

  int from = 1;
  for (long k = k0;; ++k) {
    const Real hi = pow(q, 2 * k) / 2, lo = pow(q, 2 * k + 1);
    if (r(N) >= hi) break;  // the transcript ends before this window
    int n = from;
    while (!(r(n) < hi)) ++n;
    if (r(n) < lo)
      fail(Errc::ExtractionGap, "no radius in [(beta/2)^{2k+1}, (beta/2)^{2k}/2) for k=" + std::to_string(k) +
                                    " (r_" + std::to_string(n) + " is already below)");
    out.indices.push_back(n);
    from = n + 1;
    if (from > N) break;
  }
  if (out.indices.empty()) return out;

  const Real r0 = pow(q, 2 * k0);
  out.sub.B0 = Ball{t.ball(static_cast<int>(out.indices[0])).center, r0};
  for (std::size_t j = 0; j + 1 < out.indices.size(); ++j) {
    const int nk = static_cast<int>(out.indices[j]);
    require(nk < static_cast<int>(t.rounds.size()) && t.rounds[nk].alice.nbhd, Errc::PreconditionViolated,
            "missing Alice move after B_" + std::to_string(nk));
    const HyperplaneNbhd& A = *t.rounds[nk].alice.nbhd;
    const long k = k0 + static_cast<long>(j);
    require(rel_equal(A.width, 2 * pow(q, 2 * k + 2)), Errc::PreconditionViolated,
            "A_" + std::to_string(nk + 1) + " was not produced by the positional transform");
    Round rd;
    rd.alice = AliceMove::hyperplane({A.normal, A.offset, schedule_radius(q2, r0, static_cast<long>(j) + 1)});
    rd.bob = Ball{t.ball(static_cast<int>(out.indices[j + 1])).center, schedule_radius(q2, r0, static_cast<long>(j) + 1)};
    out.sub.rounds.push_back(std::move(rd));
  }
  const Ball& last = out.sub.ball(static_cast<int>(out.sub.rounds.size()));
  out.sub.status = GameStatus::Outcome;
  out.sub.outcome = last.center;
  out.sub.outcomeRadius = last.radius;
  out.validation = validate_transcript(out.sub);
  return out;
}

}  // namespace badw
