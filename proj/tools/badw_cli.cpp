// badw: command line harness over the core library.
//
// Every JSON output is {tool, version, command, config, result}; config is the
// resolved option set and can be fed back with --config. Exit codes: 0 success,
// 2 invalid options or config, 3 library error, 4 a verification verdict failed.

#include "badw/diophantine.hpp"
#include "badw/fractal.hpp"
#include "badw/games.hpp"
#include "badw/strategy.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace badw;
using nlohmann::ordered_json;

namespace {

// --- config files ------------------------------------------------------------

// JSON config: {"option": value, "subcommand": {"option": value}}. Values given
// on the command line win.
class JsonConfig : public CLI::Config {
public:
  std::string to_config(const CLI::App* app, bool defaultAlso, bool, std::string) const override {
    return dump(app, defaultAlso).dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    ordered_json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw CLI::ConversionError("config is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

  static ordered_json dump(const CLI::App* app, bool defaultAlso) {
    ordered_json j = ordered_json::object();
    for (const CLI::Option* o : app->get_options()) {
      const auto& names = o->get_lnames();
      if (names.empty() || names.front() == "help" || names.front() == "config" || names.front() == "dump-config")
        continue;
      std::vector<std::string> vals;
      if (o->count() > 0) vals = o->results();
      else if (defaultAlso && !o->get_default_str().empty()) vals = {o->get_default_str()};
      else continue;
      if (o->get_type_size() == 0) {
        j[names.front()] = o->as<bool>();
      } else if (o->get_expected_max() > 1) {
        j[names.front()] = vals;
      } else {
        j[names.front()] = vals.back();
      }
    }
    for (const CLI::App* sub : app->get_subcommands()) j[sub->get_name()] = dump(sub, defaultAlso);
    return j;
  }

private:
  static void collect(const ordered_json& j, std::vector<std::string> parents, std::vector<CLI::ConfigItem>& out) {
    for (const auto& [key, v] : j.items()) {
      if (v.is_object()) {
        auto p = parents;
        p.push_back(key);
        collect(v, p, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      auto text = [](const ordered_json& x) { return x.is_string() ? x.get<std::string>() : x.dump(); };
      if (v.is_array()) {
        for (const auto& x : v) item.inputs.push_back(text(x));
      } else {
        item.inputs.push_back(text(v));
      }
      out.push_back(std::move(item));
    }
  }
};

// --- errors --------------------------------------------------------------------

struct VerdictFailure {
  std::string code, message;
};

int report_error(const std::string& kind, const std::string& code, const std::string& message, int exitCode) {
  ordered_json e;
  e["error"] = {{"kind", kind}, {"code", code}, {"message", message}, {"exitCode", exitCode}};
  std::cerr << e.dump() << "\n";
  return exitCode;
}

[[noreturn]] void invalid(const std::string& msg) { throw CLI::ValidationError(msg); }

// --- parsing helpers -------------------------------------------------------------

std::vector<std::string> split(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

// "phi" = (sqrt5 - 1)/2, "sqrtN", "p/q" or a decimal.
std::optional<QuadraticIrrational> parse_quadratic(const std::string& s) {
  if (s == "phi") return QuadraticIrrational::golden();
  if (s.rfind("sqrt", 0) == 0) {
    const Int D(s.substr(4));
    const Int r = sqrt(D);
    if (D <= 0 || r * r == D) invalid("sqrt of a non-square positive integer expected: " + s);
    return QuadraticIrrational{Rational(0), Rational(1), D};
  }
  return std::nullopt;
}

Real parse_number(const std::string& s) {
  try {
    if (auto q = parse_quadratic(s)) return q->value();
    if (s.find('/') != std::string::npos) return to_real(parse_rational(s));
    return from_decimal(s);
  } catch (const CLI::Error&) {
    throw;
  } catch (const std::exception& e) {
    invalid("not a number: '" + s + "' (" + e.what() + ")");
  }
}

RVec parse_point(const std::string& s) {
  RVec x;
  for (const auto& t : split(s)) x.push_back(parse_number(t));
  if (x.empty()) invalid("empty point");
  return x;
}

WeightVector parse_weights(const std::string& s, int d) {
  if (s.empty()) {
    QVec q(d, Rational(1, d));
    return WeightVector::from_rationals(q);
  }
  const auto w = WeightVector::parse(s);
  if (w.d() != d) invalid("weights have " + std::to_string(w.d()) + " entries, point has " + std::to_string(d));
  return w;
}

ordered_json vec_json(const RVec& v) {
  ordered_json a = ordered_json::array();
  for (const auto& x : v) a.push_back(to_decimal(x));
  return a;
}

ordered_json parse_json_text(const std::string& s) { return ordered_json::parse(s); }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

TreeMeasure preset_measure(const std::string& name, int depth, const std::string& beta, const std::string& r0, int d,
                           std::uint64_t seed) {
  if (depth < 0) invalid("depth must be >= 0");
  if (name == "middle-thirds") return middle_thirds_tree(depth);
  if (name == "dyadic") return dyadic_tree(depth);
  if (name == "product-disc") return product_disc_tree(depth);
  if (name == "triangle") return triangle_tree(parse_number(beta), parse_number(r0), depth);
  if (name == "diffuse") {
    auto K = cantor_grid_oracle(d);
    discover_beta0(K, 200, seed);
    return build_measure_from_diffuse(K, depth);
  }
  invalid("unknown preset '" + name + "' (middle-thirds, dyadic, product-disc, triangle, diffuse)");
}

// --- command state -----------------------------------------------------------------

struct Common {
  unsigned precision = kDefaultPrecision;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* c, Common& o, bool needsSeed, unsigned defaultPrecision) {
  o.precision = defaultPrecision;
  c->add_option("--precision", o.precision, "working precision in bits")->capture_default_str()->check(
      CLI::Range(64u, 1u << 20));
  auto* s = c->add_option("--seed", o.seed, "random seed");
  if (needsSeed) s->required();
  c->add_option("--out", o.out, "output file (default: stdout)");
}

struct Emitter {
  const CLI::App* app = nullptr;
  std::string command;

  ordered_json config() const {
    return ordered_json::parse(app->config_to_str(true, false));
  }

  void json(const ordered_json& result, const std::string& out) const {
    ordered_json j;
    j["tool"] = "badw";
    j["version"] = BADW_VERSION;
    j["command"] = command;
    j["config"] = config();
    j["result"] = result;
    text(j.dump(2) + "\n", out);
  }

  void csv(const std::string& body, const std::string& out) const {
    std::string head = "# badw " + std::string(BADW_VERSION) + " " + command + "\n# config " + config().dump() + "\n";
    text(head + body, out);
  }

  static void text(const std::string& s, const std::string& out) {
    if (out.empty() || out == "-") std::cout << s;
    else write_file(out, s);
  }
};

ordered_json badness_json(const BadnessReport& r) {
  return {{"cQ", to_decimal(r.cQ)}, {"argminQ", r.argmin_q}, {"Q", r.Q}};
}

ordered_json orbit_json(const OrbitReport& r, bool steps) {
  ordered_json j = {{"minSystole", to_decimal(r.minSystole)}, {"argminN", r.argmin_n}, {"N", r.N}};
  if (steps) {
    ordered_json a = ordered_json::array();
    for (const auto& [n, s] : r.perStep) a.push_back({{"n", n}, {"systole", to_decimal(s)}});
    j["perStep"] = a;
  }
  return j;
}

// Transcript players.
std::unique_ptr<AliceStrategy> make_alice(const std::string& name, std::uint64_t seed, const Real& beta) {
  if (name == "center-split") return center_split_alice();
  if (name == "random") return random_alice(seed);
  if (name == "empty") return empty_alice();
  if (name == "transformed") {
    std::shared_ptr<const PositionalAlice> F(center_split_alice().release());
    return positional_transform(F, beta);
  }
  invalid("unknown alice '" + name + "' (center-split, random, empty, transformed)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Badly approximable vectors: games, strategies and certificates"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config file; command line values take precedence");
  bool dumpConfig = false;
  app.add_flag("--dump-config", dumpConfig, "print the resolved config and exit");
  app.require_subcommand(1);
  app.set_version_flag("--version", BADW_VERSION);

  // badness
  Common cb;
  std::string bx, bw;
  long bQ = 10000;
  std::optional<int> bd;
  auto* badness = app.add_subcommand("badness", "min over q <= Q of max_i q^{w_i} ||q x_i||");
  add_common(badness, cb, false, kDefaultPrecision);
  badness->add_option("--x", bx, "point: comma list of phi, sqrtN, p/q or decimals")->required();
  badness->add_option("--d", bd, "dimension (checked against --x)");
  badness->add_option("--w", bw, "weights, e.g. 2/3,1/3 (default: equal)");
  badness->add_option("--Q", bQ, "largest denominator")->capture_default_str()->check(CLI::PositiveNumber);

  // dani-orbit
  Common co;
  std::string ox, ow, ob = "2";
  long oN = 30;
  bool oCsv = false;
  auto* orbit = app.add_subcommand("dani-orbit", "min systole of a_n u_x Z^{d+1} over 1 <= n <= N");
  add_common(orbit, co, false, kDefaultPrecision);
  orbit->add_option("--x", ox, "point")->required();
  orbit->add_option("--w", ow, "weights (default: equal)");
  orbit->add_option("--b", ob, "base b > 1")->capture_default_str();
  orbit->add_option("--N", oN, "horizon")->capture_default_str()->check(CLI::PositiveNumber);
  orbit->add_flag("--csv", oCsv, "per-step trace as CSV");

  // build-measure
  Common cm;
  std::string mPreset = "middle-thirds", mBeta = "1/16777216", mR0 = "1/2";
  int mDepth = 8, mD = 1;
  auto* build = app.add_subcommand("build-measure", "build a tree measure and write it as JSON");
  add_common(build, cm, false, kDefaultPrecision);
  build->add_option("--preset", mPreset, "middle-thirds, dyadic, product-disc, triangle or diffuse")->capture_default_str();
  build->add_option("--depth", mDepth, "tree depth")->capture_default_str();
  build->add_option("--beta", mBeta, "triangle: contraction ratio")->capture_default_str();
  build->add_option("--r0", mR0, "triangle: root radius")->capture_default_str();
  build->add_option("--d", mD, "diffuse: dimension (Cantor set C^d)")->capture_default_str();

  // verify-measure
  Common cv;
  std::string vPreset = "middle-thirds", vFile, vBeta = "1/16777216", vR0 = "1/2";
  int vDepth = 8, vD = 1;
  long vSamples = 1000, vDecay = 0;
  auto* verify = app.add_subcommand("verify-measure", "Ahlfors regularity (and optionally absolute decay) by sampling");
  add_common(verify, cv, true, kDefaultPrecision);
  verify->add_option("--preset", vPreset, "preset name (see build-measure)")->capture_default_str();
  verify->add_option("--measure", vFile, "measure JSON written by build-measure");
  verify->add_option("--depth", vDepth, "preset depth")->capture_default_str();
  verify->add_option("--beta", vBeta, "triangle: contraction ratio")->capture_default_str();
  verify->add_option("--r0", vR0, "triangle: root radius")->capture_default_str();
  verify->add_option("--d", vD, "diffuse: dimension")->capture_default_str();
  verify->add_option("--samples", vSamples, "sampled (x, r) pairs")->capture_default_str()->check(CLI::PositiveNumber);
  verify->add_option("--decay-trials", vDecay, "hyperplane trials for absolute decay (0: skip)")->capture_default_str();

  // play
  Common cp;
  std::string pVariant = "restricted", pAlice = "center-split", pBob = "random", pBeta = "1/4", pAlpha = "1/2",
              pR0 = "1", pPreset = "middle-thirds";
  int pRounds = 20, pD = 1, pDepth = 12;
  auto* playCmd = app.add_subcommand("play", "play one game and write its JSONL transcript");
  add_common(playCmd, cp, true, kDefaultPrecision);
  playCmd->add_option("--variant", pVariant, "haw, restricted or cantor")->capture_default_str();
  playCmd->add_option("--alice", pAlice, "center-split, random, empty or transformed")->capture_default_str();
  playCmd->add_option("--bob", pBob, "random, random-exact, tree or diffuse")->capture_default_str();
  playCmd->add_option("--rounds", pRounds, "rounds")->capture_default_str()->check(CLI::PositiveNumber);
  playCmd->add_option("--beta", pBeta, "game beta")->capture_default_str();
  playCmd->add_option("--alpha", pAlpha, "cantor: budget exponent")->capture_default_str();
  playCmd->add_option("--d", pD, "dimension")->capture_default_str();
  playCmd->add_option("--r0", pR0, "radius of B0 (tree bob: the tree's)")->capture_default_str();
  playCmd->add_option("--preset", pPreset, "tree bob: measure preset")->capture_default_str();
  playCmd->add_option("--depth", pDepth, "tree bob: measure depth")->capture_default_str();

  // run-badw
  Common cr;
  BadwRunConfig rc;
  bool rStrict = false, rNoAudit = false;
  std::string rOutDir;
  auto* runCmd = app.add_subcommand("run-badw", "Cantor potential game: the badw strategy against tree_bob");
  add_common(runCmd, cr, true, 1536);
  runCmd->add_option("--w", rc.w, "weights (d = 2)")->capture_default_str();
  runCmd->add_option("--rounds", rc.rounds, "rounds")->capture_default_str()->check(CLI::PositiveNumber);
  runCmd->add_option("--beta-seed", rc.betaSeed, "tree beta")->capture_default_str();
  runCmd->add_option("--r0", rc.r0, "root radius")->capture_default_str();
  runCmd->add_option("--gamma", rc.gamma, "nondivergence exponent (configuration)")->capture_default_str();
  runCmd->add_option("--cprime", rc.Cprime, "nondivergence constant (configuration)")->capture_default_str();
  runCmd->add_option("--override-s", rc.overrideS, "use this s instead of the closed form");
  runCmd->add_flag("--strict", rStrict, "fail instead of running with non-compliant parameters");
  runCmd->add_flag("--no-audit", rNoAudit, "skip the legality audit");
  runCmd->add_option("--audit-exact-limit", rc.auditOptions.exactLimit, "largest family audited exhaustively")
      ->capture_default_str();
  runCmd->add_option("--audit-samples", rc.auditOptions.samples, "clusters sampled per larger family")
      ->capture_default_str();
  runCmd->add_option("--audit-delta", rc.auditOptions.delta, "failure probability per sampled bound")
      ->capture_default_str();
  runCmd->add_option("--nextra", rc.Nextra, "extra orbit horizon (-1: same as rounds)")->capture_default_str();
  runCmd->add_option("--badness-q", rc.badnessQ, "Q of the attached badness report (0: none)")->capture_default_str();
  runCmd->add_option("--out-dir", rOutDir, "write transcript.jsonl, certificate.json and audit.json here");

  // certify
  Common cc;
  BadwRunConfig kc;
  std::string cTranscript;
  long cNextra = -1, cQ = 10000;
  auto* certify = app.add_subcommand("certify", "outcome certificate for a run-badw transcript");
  add_common(certify, cc, false, 1536);
  certify->add_option("--transcript", cTranscript, "JSONL transcript")->required();
  certify->add_option("--w", kc.w, "weights")->capture_default_str();
  certify->add_option("--beta-seed", kc.betaSeed, "tree beta")->capture_default_str();
  certify->add_option("--r0", kc.r0, "root radius")->capture_default_str();
  certify->add_option("--gamma", kc.gamma, "nondivergence exponent")->capture_default_str();
  certify->add_option("--cprime", kc.Cprime, "nondivergence constant")->capture_default_str();
  certify->add_option("--override-s", kc.overrideS, "s used by the run");
  certify->add_option("--nextra", cNextra, "extra orbit horizon (-1: same as the run)")->capture_default_str();
  certify->add_option("--badness-q", cQ, "Q of the attached badness report (0: none)")->capture_default_str();

  // keylemma-sweep
  Common ck;
  std::string kPreset = "product-disc", kW = "2/3,1/3", kCprime = "10", kCap = "0.1";
  long kK = 10, kEll = 1, kSamples = 4000;
  int kDepth = 8, kEpsMin = 1, kEpsMax = 8, kRDepth = 2;
  auto* sweep = app.add_subcommand("keylemma-sweep", "decay of mu(A^{k,l,0}_eps) and the two measure bounds");
  add_common(sweep, ck, true, kDefaultPrecision);
  sweep->add_option("--preset", kPreset, "planar measure preset")->capture_default_str();
  sweep->add_option("--depth", kDepth, "measure depth")->capture_default_str();
  sweep->add_option("--w", kW, "weights")->capture_default_str();
  sweep->add_option("--k", kK, "k")->capture_default_str();
  sweep->add_option("--ell", kEll, "l")->capture_default_str();
  sweep->add_option("--eps-exp-min", kEpsMin, "eps runs over 2^-min .. 2^-max")->capture_default_str();
  sweep->add_option("--eps-exp-max", kEpsMax, "see --eps-exp-min")->capture_default_str();
  sweep->add_option("--samples", kSamples, "samples per eps")->capture_default_str()->check(CLI::PositiveNumber);
  sweep->add_option("--r-depth", kRDepth, "r = radius at this depth")->capture_default_str();
  sweep->add_option("--cprime", kCprime, "C'")->capture_default_str();
  sweep->add_option("--gamma-cap", kCap, "gamma = min(gamma_emp / 2, cap)")->capture_default_str();

  // export-diag-coords
  Common cx;
  std::string xW = "2/3,1/3", xFormat = "csv";
  long xS = 2, xN = 5, xL = 1;
  auto* diag = app.add_subcommand("export-diag-coords", "log d_l a_{n+1+sl} in units of -log beta");
  add_common(diag, cx, false, kDefaultPrecision);
  diag->add_option("--w", xW, "weights")->capture_default_str();
  diag->add_option("--s", xS, "s (any s >= 1, e.g. 2 for the illustrative geometry)")->capture_default_str();
  diag->add_option("--n", xN, "largest n")->capture_default_str();
  diag->add_option("--lmax", xL, "largest l")->capture_default_str();
  diag->add_option("--format", xFormat, "csv or json")->capture_default_str()->check(CLI::IsMember({"csv", "json"}));

  // --config and --dump-config may also follow the subcommand name.
  for (CLI::App* s : {badness, orbit, build, verify, playCmd, runCmd, certify, sweep, diag}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("validation", e.get_name(), e.what(), 2);
  }

  CLI::App* sub = app.get_subcommands().front();
  if (dumpConfig) {
    std::cout << app.config_to_str(true, false);
    return 0;
  }
  Emitter emit{&app, sub->get_name()};

  try {
    if (sub == badness) {
      PrecisionScope ps(cb.precision);
      const auto toks = split(bx);
      if (bd && *bd != static_cast<int>(toks.size())) invalid("--d does not match the length of --x");
      const auto w = parse_weights(bw, static_cast<int>(toks.size()));
      std::vector<QuadraticIrrational> exact;
      for (const auto& t : toks)
        if (auto q = parse_quadratic(t)) exact.push_back(*q);
      const bool symbolic = exact.size() == toks.size();
      const auto r = symbolic ? badness_constant(exact, w, bQ) : badness_constant(parse_point(bx), w, bQ);
      auto j = badness_json(r);
      j["path"] = symbolic ? "symbolic" : "numeric";
      emit.json(j, cb.out);
    } else if (sub == orbit) {
      PrecisionScope ps(co.precision);
      const RVec x = parse_point(ox);
      const auto w = parse_weights(ow, static_cast<int>(x.size()));
      const auto r = dani_orbit_min(x, w, parse_number(ob), oN);
      if (oCsv) {
        std::string body = "n,systole\n";
        for (const auto& [n, s] : r.perStep) body += std::to_string(n) + "," + to_decimal(s) + "\n";
        emit.csv(body, co.out);
      } else {
        emit.json(orbit_json(r, true), co.out);
      }
    } else if (sub == build) {
      PrecisionScope ps(cm.precision);
      const auto mu = preset_measure(mPreset, mDepth, mBeta, mR0, mD, cm.seed.value_or(1));
      ordered_json j = {{"preset", mPreset}, {"d", mu.dim()}, {"N", mu.branching()}, {"depth", mu.depth()},
                        {"beta", to_decimal(mu.beta())}, {"r0", to_decimal(mu.r0())}, {"alpha", to_decimal(mu.alpha())},
                        {"closedFormA", to_decimal(closed_form_ahlfors(mu))}};
      j["tree"] = parse_json_text(tree_to_json(mu));
      emit.json(j, cm.out);
    } else if (sub == verify) {
      PrecisionScope ps(cv.precision);
      TreeMeasure mu = [&] {
        if (vFile.empty()) return preset_measure(vPreset, vDepth, vBeta, vR0, vD, *cv.seed);
        auto j = ordered_json::parse(read_file(vFile));
        if (j.contains("result") && j["result"].contains("tree")) j = j["result"]["tree"];
        return tree_from_json(j.dump());
      }();
      const auto a = verify_ahlfors(mu, vSamples, *cv.seed);
      ordered_json j;
      j["ahlfors"] = {{"empiricalA", to_decimal(a.empiricalA)}, {"closedFormA", to_decimal(a.closedFormA)},
                      {"M", to_decimal(a.M)}, {"samples", a.samples}, {"withinClosedForm", a.withinClosedForm},
                      {"worstX", vec_json(a.worstX)}, {"worstR", to_decimal(a.worstR)}};
      bool ok = a.withinClosedForm;
      if (vDecay > 0) {
        const auto d = verify_absolute_decay(mu, vDecay, *cv.seed);
        j["absoluteDecay"] = {{"closedDelta", to_decimal(d.closedDelta)}, {"closedD", to_decimal(d.closedD)},
                              {"fittedD", to_decimal(d.fittedD)}, {"fittedDelta", to_decimal(d.fittedDelta)},
                              {"trials", d.trials}, {"nontrivial", d.nontrivial}, {"violations", d.violations}};
        ok = ok && d.violations == 0;
      }
      j["pass"] = ok;
      emit.json(j, cv.out);
      if (!ok) throw VerdictFailure{"MeasureCheckFailed", "sampled constants exceed the closed forms"};
    } else if (sub == playCmd) {
      PrecisionScope ps(cp.precision);
      const Real beta = parse_number(pBeta);
      GameVariant v;
      if (pVariant == "haw") v = GameVariant::haw();
      else if (pVariant == "restricted") v = GameVariant::restricted();
      else if (pVariant == "cantor") v = GameVariant::cantor(parse_number(pAlpha));
      else invalid("unknown variant '" + pVariant + "' (haw, restricted, cantor)");
      std::optional<TreeMeasure> mu;
      std::optional<DiffuseOracle> K;
      std::unique_ptr<BobStrategy> bob;
      Ball B0{RVec(pD, Real(0)), parse_number(pR0)};
      if (pBob == "random") bob = random_bob(*cp.seed);
      else if (pBob == "random-exact") bob = random_bob(*cp.seed, RandomBobOptions{true, 256});
      else if (pBob == "tree") {
        mu = preset_measure(pPreset, pDepth, "1/3", "1/2", pD, *cp.seed);
        bob = tree_bob(*mu);
        B0 = mu->ball(mu->root());
      } else if (pBob == "diffuse") {
        K = cantor_grid_oracle(pD);
        discover_beta0(*K, 200, *cp.seed);
        bob = diffuse_bob(*K);
        B0 = Ball{K->base, K->r0};
      } else {
        invalid("unknown bob '" + pBob + "' (random, random-exact, tree, diffuse)");
      }
      auto alice = make_alice(pAlice, *cp.seed, beta);
      auto t = play(v, beta, B0, *alice, *bob, pRounds);
      t.meta["alice"] = pAlice;
      t.meta["bob"] = pBob;
      t.meta["seed"] = std::to_string(*cp.seed);
      t.meta["version"] = BADW_VERSION;
      t.meta["config"] = emit.config().dump();
      const auto jsonl = transcript_to_jsonl(t);
      const auto val = validate_transcript(t);
      if (cp.out.empty() || cp.out == "-") {
        std::cout << jsonl;
      } else {
        write_file(cp.out, jsonl);
        ordered_json j = {{"transcript", cp.out}, {"bobMoves", t.bob_moves()}, {"valid", val.ok}, {"note", t.note}};
        emit.json(j, "");
      }
      if (!val.ok) throw VerdictFailure{"InvalidTranscript", val.violation->invariant + ": " + val.violation->detail};
    } else if (sub == runCmd) {
      rc.seed = *cr.seed;
      rc.precision = cr.precision;
      rc.allowNonCompliant = !rStrict;
      rc.audit = !rNoAudit;
      auto run = run_badw(rc);
      PrecisionScope ps(cr.precision);
      auto t = run.transcript;
      t.meta["config"] = emit.config().dump();
      const auto jsonl = transcript_to_jsonl(t);
      ordered_json j;
      j["params"] = parse_json_text(params_to_json(run.params));
      j["status"] = t.status == GameStatus::Outcome ? "outcome" : t.status == GameStatus::Running ? "running" : "default";
      j["bobMoves"] = t.bob_moves();
      j["bobDefaulted"] = run.bobDefaulted;
      j["svpCalls"] = run.svpCalls;
      if (run.audit) j["audit"] = parse_json_text(audit_to_json(*run.audit));
      if (run.certificate) j["certificate"] = parse_json_text(run.certificateJson);
      if (!rOutDir.empty()) {
        std::filesystem::create_directories(rOutDir);
        write_file(rOutDir + "/transcript.jsonl", jsonl);
        if (run.certificate) write_file(rOutDir + "/certificate.json", run.certificateJson + "\n");
        if (run.audit) write_file(rOutDir + "/audit.json", audit_to_json(*run.audit) + "\n");
        j["files"] = {rOutDir + "/transcript.jsonl", rOutDir + "/certificate.json", rOutDir + "/audit.json"};
      }
      emit.json(j, cr.out);
      if (run.bobDefaulted) throw Error(Errc::NoLegalMove, "Bob found no legal ball: " + t.note);
      if (run.audit && !run.audit->allPass) throw Error(Errc::BudgetExceeded, "legality audit failed");
      if (run.certificate && !run.certificate->pass) throw VerdictFailure{"CertificateFailure", "see result.certificate"};
    } else if (sub == certify) {
      PrecisionScope ps(cc.precision);
      const auto t = transcript_from_jsonl(read_file(cTranscript));
      if (t.status != GameStatus::Outcome) throw Error(Errc::PreconditionViolated, "transcript has no outcome");
      const auto p = badw_run_params(kc);
      const long horizon = t.bob_moves();
      const auto c = evaluate_certificate(t.outcome, visited_specs(p, horizon), p, horizon,
                                          cNextra < 0 ? horizon : cNextra, cQ);
      emit.json(parse_json_text(certificate_to_json(c, p)), cc.out);
      if (!c.pass) throw VerdictFailure{"CertificateFailure", "see result.visited and result.orbitReport"};
    } else if (sub == sweep) {
      PrecisionScope ps(ck.precision);
      if (kEpsMin < 0 || kEpsMax < kEpsMin) invalid("need 0 <= eps-exp-min <= eps-exp-max");
      const auto mu = preset_measure(kPreset, kDepth, "1/3", "1/2", 2, *ck.seed);
      ParamOptions o;
      o.allowNonCompliant = true;
      o.maxM = 1;
      const auto p = derive_params(WeightVector::parse(kW), mu.alpha(), closed_form_ahlfors(mu), parse_number(kCap),
                                   parse_number(kCprime), mu.r0(), mu.beta(), o);
      std::vector<Real> eps;
      for (int e = kEpsMin; e <= kEpsMax; ++e) eps.push_back(ldexp(Real(1), -e));
      const auto s = keylemma_sweep(kK, kEll, eps, mu, mu.root(), mu.radius(kRDepth), p, kSamples, *ck.seed,
                                    parse_number(kCap));
      emit.json(parse_json_text(keylemma_sweep_to_json(s)), ck.out);
      if (!s.pass) throw VerdictFailure{"KeyLemmaSweepFailed", "no positive exponent or a bound failed"};
    } else if (sub == diag) {
      const auto w = WeightVector::parse(xW);
      const auto cs = diag_coords(w, xS, xN, xL);
      if (xFormat == "csv") {
        std::string body = "n,ell,k,first_turn";
        for (int i = 0; i <= w.d(); ++i) body += ",log" + std::to_string(i);
        body += "\n";
        for (const auto& c : cs) {
          body += std::to_string(c.n) + "," + std::to_string(c.ell) + "," + std::to_string(c.k) + "," +
                  (c.firstTurn ? "1" : "0");
          for (const auto& v : c.logs) body += "," + to_decimal(v);
          body += "\n";
        }
        emit.csv(body, cx.out);
      } else {
        ordered_json a = ordered_json::array();
        for (const auto& c : cs)
          a.push_back({{"n", c.n}, {"ell", c.ell}, {"k", c.k}, {"firstTurn", c.firstTurn}, {"logs", vec_json(c.logs)}});
        emit.json({{"units", "-log beta"}, {"coords", a}}, cx.out);
      }
    }
  } catch (const CLI::ValidationError& e) {
    return report_error("validation", "InvalidOption", e.what(), 2);
  } catch (const VerdictFailure& f) {
    return report_error("verdict", f.code, f.message, 4);
  } catch (const Error& e) {
    if (e.code() == Errc::CertificateFailure) return report_error("verdict", "CertificateFailure", e.what(), 4);
    return report_error("module", std::string(errc_name(e.code())), e.what(), 3);
  } catch (const std::exception& e) {
    return report_error("module", "Internal", e.what(), 3);
  }
  return 0;
}
