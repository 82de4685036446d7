#pragma once

#include "badw/error.hpp"
#include "badw/fractal.hpp"
#include "badw/geometry.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace badw {

enum class GameKind { HAW, RestrictedHAW, CantorPotential };

struct GameVariant {
  GameKind kind = GameKind::RestrictedHAW;
  Real alpha;  // CantorPotential only

  static GameVariant haw();
  static GameVariant restricted();
  static GameVariant cantor(const Real& alpha);
  std::string name() const;
};

// One collection A_{n+1,i} of a Cantor potential move.
struct BallFamily {
  int i = 0;
  std::vector<Ball> balls;
  // Lazily produced families are only materialised where they can matter; the
  // list is then complete inside `region` and nowhere else.
  std::optional<Ball> region;
  std::optional<long> declaredSize;  // size of the whole family, when the provider knows it
};

// Source of lazily materialised families for one Alice move.
class FamilyProvider {
public:
  virtual ~FamilyProvider() = default;
  // Every ball of family i meeting `region`.
  virtual std::vector<Ball> meeting(int i, const Ball& region) = 0;
  virtual std::optional<long> size(int i) const = 0;
};

struct AliceMove {
  std::optional<HyperplaneNbhd> nbhd;      // HAW / RestrictedHAW
  std::vector<BallFamily> families;        // CantorPotential, sorted by i
  std::shared_ptr<FamilyProvider> lazy;    // not serialised; see BallFamily::region

  static AliceMove hyperplane(HyperplaneNbhd h);
  static AliceMove cantor(std::vector<BallFamily> families);
};

struct Round {
  AliceMove alice;   // A_{n+1}
  std::optional<Ball> bob;  // B_{n+1}; absent only when the game stopped on this round
};

enum class GameStatus { Running, AliceWinsByDefault, Outcome };

struct GameTranscript {
  GameVariant variant;
  Real beta;
  Ball B0;
  std::vector<Round> rounds;
  GameStatus status = GameStatus::Running;
  RVec outcome;       // centre of the last Bob ball
  Real outcomeRadius; // its radius: the error bound of the finite horizon
  std::string note;
  std::map<std::string, std::string> meta;

  // B_n (n = 0 is B0).
  const Ball& ball(int n) const;
  int bob_moves() const;
};

struct Violation {
  std::string role;  // "alice", "bob" or "setup"
  int step = 0;      // n+1 for A_{n+1} / B_{n+1}
  std::string invariant;
  std::string detail;
};

class IllegalMoveError : public Error {
public:
  IllegalMoveError(Violation v, GameTranscript attempted);
  const Violation& violation() const { return v_; }
  const GameTranscript& attempted() const { return attempted_; }

private:
  Violation v_;
  GameTranscript attempted_;
};

// Read-only view handed to strategies. Alice is about to play A_{n+1}; Bob's
// current ball is B_n.
struct GameView {
  const GameTranscript& t;
  int n = 0;

  const Ball& current() const { return t.ball(n); }
  const Real& beta() const { return t.beta; }
  const GameVariant& variant() const { return t.variant; }
};

class AliceStrategy {
public:
  virtual ~AliceStrategy() = default;
  virtual std::string name() const = 0;
  virtual bool positional() const { return false; }
  virtual AliceMove move(const GameView& g) = 0;
};

// Alice strategy depending only on Bob's last ball: F_beta(B).
class PositionalAlice : public AliceStrategy {
public:
  bool positional() const override { return true; }
  virtual HyperplaneNbhd on_ball(const Ball& B, const Real& beta) const = 0;
  AliceMove move(const GameView& g) override { return AliceMove::hyperplane(on_ball(g.current(), g.beta())); }
};

class BobStrategy {
public:
  virtual ~BobStrategy() = default;
  virtual std::string name() const = 0;
  // `active` lists the Cantor balls B_{n+1} has to avoid. An empty optional (or a
  // NoLegalMove error) means Bob claims that no legal ball exists.
  virtual std::optional<Ball> move(const GameView& g, const AliceMove& a, const std::vector<Ball>& active) = 0;
};

// r0 beta^n, the exact radius schedule.
Real schedule_radius(const Real& beta, const Real& r0, long n);
// beta^{-alpha(i+1)}: the Cantor family budget.
Real cantor_budget(const Real& beta, const Real& alpha, int i);

// Per-move checks shared by the engine and the validator. They return the
// violated invariant, if any. `t` holds the moves before step n+1.
std::optional<Violation> check_setup(const GameTranscript& t);
std::optional<Violation> check_alice(const GameTranscript& t, int n, const AliceMove& a);
std::optional<Violation> check_bob(const GameTranscript& t, int n, const Ball& b);
// Balls B_{n+1} must avoid: every A in A_{n+1-l,l}, 0 <= l <= n.
std::vector<Ball> active_balls(const GameTranscript& t, int n);
// Whether a ball of radius rho fits in Bn outside the closed neighbourhood A.
bool restricted_ball_exists(const Ball& Bn, const HyperplaneNbhd& A, const Real& rho);

struct ValidationResult {
  bool ok = true;
  std::optional<Violation> violation;
};

// Offline replay of every invariant; a pure function of the transcript.
ValidationResult validate_transcript(const GameTranscript& t);

GameTranscript play(const GameVariant& variant, const Real& beta, const Ball& B0, AliceStrategy& alice,
                    BobStrategy& bob, int maxRounds);

// JSONL: a header line, one line per round, a status line. Decimal strings.
std::string transcript_to_jsonl(const GameTranscript& t);
GameTranscript transcript_from_jsonl(const std::string& text);

// Strategies.

// Hyperplane through the centre of Bob's ball (normal e_1 unless given), width
// beta times the radius.
std::unique_ptr<PositionalAlice> center_split_alice(RVec normal = {});
// Random legal moves for every variant (Cantor families for i <= 2).
std::unique_ptr<AliceStrategy> random_alice(std::uint64_t seed);
// Cantor potential Alice who never blocks anything.
std::unique_ptr<AliceStrategy> empty_alice();

struct RandomBobOptions {
  bool exactRatio = false;  // HAW: always r_{n+1} = beta r_n
  int tries = 256;
};
std::unique_ptr<BobStrategy> random_bob(std::uint64_t seed, RandomBobOptions opt = {});

// Bob of the diffuse-set argument: each ball comes from the oracle.
std::unique_ptr<BobStrategy> diffuse_bob(const DiffuseOracle& K);

// Bob restricted to tree nodes. Game beta must be tree beta^m; Bob then descends
// m levels per move, greedily keeping away from Alice's balls.
std::unique_ptr<BobStrategy> tree_bob(const TreeMeasure& mu);

// m_r: the integer with (beta/2)^{2m+1} <= r < (beta/2)^{2m-1}.
long positional_scale(const Real& r, const Real& beta);

// G_beta: HAW strategy built from a positional restricted strategy F played at
// parameter (beta/2)^2.
std::unique_ptr<PositionalAlice> positional_transform(std::shared_ptr<const PositionalAlice> F, const Real& beta);

struct ExtractionResult {
  GameTranscript sub;           // RestrictedHAW at (beta/2)^2
  long k0 = 0;
  std::vector<long> indices;    // n_k for k = k0, k0+1, ...
  ValidationResult validation;  // the restricted validator on `sub`
};

// Subsequence B_{n_k} with (beta/2)^{2k+1} <= r_{n_k} < (beta/2)^{2k}/2, rebuilt
// as a restricted game (ExtractionGap when some window is skipped).
ExtractionResult extract_restricted_subgame(const GameTranscript& t, const Real& beta);

}  // namespace badw
