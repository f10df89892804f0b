#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "symsynth/cli.hpp"
#include "symsynth/domain.hpp"
#include "symsynth/ltlf.hpp"

namespace {

namespace fs = std::filesystem;
namespace cli = symsynth::cli;
namespace manip = symsynth::manip;
namespace ltlf = symsynth::ltlf;
using nlohmann::json;

// fresh scratch directory per test case, removed on destruction
struct Scratch {
  static inline int counter = 0;
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() /
          ("symsynth-cli-" + std::to_string(::getpid()) + "-" +
           std::to_string(counter++));
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string path(const std::string& name) const {
    return (dir / name).string();
  }
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  json j;
  in >> j;
  return j;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// gripper starts loaded; both slots out of human reach, placement costs 1
manip::Instance direct_drop() {
  manip::Instance inst;
  inst.domain.locations = {{"l0", manip::Region::RobotOnly},
                           {"l1", manip::Region::RobotOnly}};
  inst.domain.objects = {{"b0", true}};
  inst.domain.init_placement = {manip::kNowhere};
  inst.domain.init_gripper = 0;
  inst.domain.cost_near = 1;
  inst.domain.cost_far = 1;
  inst.formula = "F(p_b0,l0)";
  return inst;
}

// every slot is shared, so the human can undo any placement forever
manip::Instance revocable() {
  manip::Instance inst;
  inst.domain.locations = {{"s0", manip::Region::Shared},
                           {"s1", manip::Region::Shared}};
  inst.domain.objects = {{"b0", true}};
  inst.domain.init_placement = {manip::kNowhere};
  inst.domain.init_gripper = 0;
  inst.formula = "F(p_b0,s0)";
  return inst;
}

json synth(const cli::RunConfig& rc, int expect_code) {
  std::ostringstream os;
  int code = cli::run_synth(rc, os);
  CAPTURE(os.str());
  REQUIRE(code == expect_code);
  return json::parse(os.str());
}

json rollout(const cli::RolloutConfig& ro, int expect_code = cli::kOk) {
  std::ostringstream os;
  int code = cli::run_rollout(ro, os);
  CAPTURE(os.str());
  REQUIRE(code == expect_code);
  return json::parse(os.str());
}

}  // namespace

TEST_CASE("synth solves the held-box drop identically across solvers") {
  Scratch t;
  manip::save_instance(t.path("inst.json"), direct_drop());
  for (auto solver : {cli::Solver::Explicit, cli::Solver::SymbolicMonolithic,
                      cli::Solver::SymbolicPartitioned}) {
    cli::RunConfig rc;
    rc.instance_path = t.path("inst.json");
    rc.solver = solver;
    rc.out_dir = t.path(std::string("out-") + cli::solver_name(solver));
    json rep = synth(rc, cli::kOk);
    CHECK(rep["minmax_value"] == 1);
    CHECK(rep["feasible"] == true);
    CHECK(rep["instance"]["product_states"] == 11);

    json art = read_json(rc.out_dir + "/strategy.json");
    REQUIRE(art["format"] == "symsynth-strategy-v1");
    bool drops = false;
    for (const auto& row : art["rows"])
      if (row["game_state"] == "R[b0@hand]" && row["task_state"] == 0)
        drops = row["action"] == "release(b0,l0)";
    CHECK(drops);
    CHECK(fs::exists(rc.out_dir + "/report.json"));
  }
}

TEST_CASE("regret synth applies the default budget rule") {
  Scratch t;
  manip::save_instance(t.path("inst.json"), manip::gen_two_region(0));

  cli::RunConfig rc;
  rc.instance_path = t.path("inst.json");
  rc.solver = cli::Solver::Explicit;
  rc.objective = cli::Objective::Regret;
  rc.out_dir = t.path("auto");
  json rep = synth(rc, cli::kOk);
  CHECK(rep["minmax_value"] == 9);
  CHECK(rep["budget"] == 12);  // ceil(1.25 * 9)
  CHECK(rep["budget_auto"] == true);
  CHECK(rep["regret_value"] == 4);

  rc.budget = 12;
  rc.out_dir = t.path("pinned");
  json rep2 = synth(rc, cli::kOk);
  CHECK(rep2["budget"] == 12);
  CHECK(rep2["budget_auto"] == false);
  CHECK(rep2["regret_value"] == 4);

  cli::RunConfig sc = rc;
  sc.budget.reset();
  sc.solver = cli::Solver::SymbolicMonolithic;
  sc.out_dir = t.path("sym");
  json rep3 = synth(sc, cli::kOk);
  CHECK(rep3["budget"] == 12);
  CHECK(rep3["budget_auto"] == true);
  CHECK(rep3["regret_value"] == 4);
  CHECK(rep3["variables"].contains("b"));
}

TEST_CASE("equal configs give byte-identical artifacts") {
  Scratch t;
  manip::save_instance(t.path("inst.json"), manip::gen_two_region(1));
  cli::RunConfig rc;
  rc.instance_path = t.path("inst.json");
  rc.solver = cli::Solver::Explicit;
  rc.objective = cli::Objective::Regret;
  rc.seed = 7;

  rc.out_dir = t.path("a");
  json ra = synth(rc, cli::kOk);
  rc.out_dir = t.path("b");
  json rb = synth(rc, cli::kOk);

  CHECK(read_text(t.path("a") + "/strategy.json") ==
        read_text(t.path("b") + "/strategy.json"));
  ra.erase("timing");
  rb.erase("timing");
  CHECK(ra == rb);
}

TEST_CASE("infeasibility and caps map to their exit codes") {
  Scratch t;
  manip::save_instance(t.path("undo.json"), revocable());
  manip::save_instance(t.path("drop.json"), direct_drop());

  cli::RunConfig rc;
  rc.instance_path = t.path("undo.json");
  rc.solver = cli::Solver::Explicit;
  rc.out_dir = t.path("o1");
  json rep = synth(rc, cli::kInfeasible);
  CHECK(rep["feasible"] == false);
  CHECK(rep["minmax_value"] == "inf");

  // a budget below the guaranteed payoff leaves no winning strategy
  cli::RunConfig tight;
  tight.instance_path = t.path("drop.json");
  tight.solver = cli::Solver::Explicit;
  tight.objective = cli::Objective::Regret;
  tight.budget = 0;
  tight.out_dir = t.path("o2");
  CHECK(synth(tight, cli::kInfeasible)["regret_value"] == "inf");

  cli::RunConfig small = rc;
  small.max_states = 5;
  small.out_dir = t.path("o3");
  CHECK(synth(small, cli::kCapExceeded)["cap"]["dimension"] == "arena states");

  small.max_states = 7;  // the arena fits, its task product does not
  small.out_dir = t.path("o4");
  CHECK(synth(small, cli::kCapExceeded)["cap"]["dimension"] == "product states");

  cli::RunConfig narrow = rc;
  narrow.solver = cli::Solver::SymbolicMonolithic;
  narrow.max_vars = 3;
  narrow.out_dir = t.path("o5");
  CHECK(synth(narrow, cli::kCapExceeded)["cap"]["dimension"] ==
        "decision variables");
}

TEST_CASE("translate emits matching DOT and JSON automata") {
  Scratch t;
  std::ostringstream os;
  cli::TranslateConfig tc;
  tc.formula = "F(p)";
  tc.out_dir = t.path("fp");
  REQUIRE(cli::run_translate(tc, os) == cli::kOk);
  json rep = json::parse(os.str());
  CHECK(rep["n_states"] == 2);
  std::string dot = read_text(tc.out_dir + "/dfa.dot");
  CHECK(dot.find("doublecircle") != std::string::npos);
  CHECK(dot.find("digraph") != std::string::npos);

  std::ostringstream os2;
  cli::TranslateConfig tt;
  tt.formula = "true";
  tt.out_dir = t.path("tt");
  REQUIRE(cli::run_translate(tt, os2) == cli::kOk);
  CHECK(json::parse(os2.str())["n_states"] == 1);

  // --formula also accepts a file holding the text
  {
    std::ofstream f(t.path("task.ltlf"));
    f << "F(p & F(q))\n";
  }
  std::ostringstream os3;
  cli::TranslateConfig tf;
  tf.formula = t.path("task.ltlf");
  tf.out_dir = t.path("ff");
  REQUIRE(cli::run_translate(tf, os3) == cli::kOk);
  CHECK(json::parse(os3.str())["formula"] == "F(p & F(q))");

  // the exported table accepts exactly the traces the semantics accept
  json d = read_json(tf.out_dir + "/dfa.json");
  auto formula = ltlf::parse_formula("F(p & F(q))");
  std::vector<ltlf::Letter> letters = {{}, {"p"}, {"q"}, {"p", "q"}};
  std::set<uint32_t> accepting;
  for (const auto& a : d["accepting"]) accepting.insert(a.get<uint32_t>());
  auto mask_of = [&](const ltlf::Letter& l) {
    uint32_t m = 0;
    for (size_t j = 0; j < d["atoms"].size(); j++)
      if (l.count(d["atoms"][j].get<std::string>())) m |= uint32_t(1) << j;
    return m;
  };
  std::vector<ltlf::Trace> traces = {{}};
  for (size_t len = 0; len < 3; len++) {
    std::vector<ltlf::Trace> next;
    for (const auto& tr : traces)
      if (tr.size() == len)
        for (const auto& l : letters) {
          auto e = tr;
          e.push_back(l);
          next.push_back(e);
        }
    traces.insert(traces.end(), next.begin(), next.end());
  }
  for (const auto& tr : traces) {
    uint32_t z = d["init"].get<uint32_t>();
    for (const auto& l : tr)
      z = d["delta"][z][mask_of(l)].get<uint32_t>();
    CHECK(accepting.count(z) == (ltlf::evaluate(formula, tr) ? 1u : 0u));
  }
}

TEST_CASE("rollouts replay the family strategies faithfully") {
  Scratch t;
  manip::save_instance(t.path("inst.json"), manip::gen_two_region(0));

  cli::RunConfig mm;
  mm.instance_path = t.path("inst.json");
  mm.solver = cli::Solver::Explicit;
  mm.out_dir = t.path("mm");
  synth(mm, cli::kOk);

  cli::RunConfig rg = mm;
  rg.objective = cli::Objective::Regret;
  rg.out_dir = t.path("rg");
  synth(rg, cli::kOk);

  cli::RolloutConfig adv;
  adv.strategy_path = t.path("mm") + "/strategy.json";
  adv.human = "adversarial";
  adv.count = 2;
  adv.out_dir = t.path("ro-adv");
  json ra = rollout(adv);
  CHECK(ra["payoff"]["min"] == 9);  // the guarantee is met exactly
  CHECK(ra["payoff"]["max"] == 9);
  CHECK(ra["accepted"] == 2);

  // a scripted human replaying the adversarial argmax reproduces the value
  json transcripts = read_json(adv.out_dir + "/transcripts.json");
  REQUIRE(transcripts.size() == 2);
  json script = json::array();
  int64_t cost_sum = 0;
  for (const auto& step : transcripts[0]["steps"]) {
    REQUIRE(step.contains("state"));
    REQUIRE(step.contains("task_state"));
    cost_sum += step["cost"].get<int64_t>();
    if (step["owner"] == "human") script.push_back(step["action"]);
  }
  CHECK(cost_sum == transcripts[0]["payoff"].get<int64_t>());
  {
    std::ofstream f(t.path("script.json"));
    f << script.dump();
  }
  cli::RolloutConfig scripted = adv;
  scripted.human = "script:" + t.path("script.json");
  scripted.count = 1;
  scripted.out_dir = t.path("ro-script");
  CHECK(rollout(scripted)["payoff"]["max"] == 9);

  // regret strategy: cooperation pays, adversaries stay within the budget
  cli::RolloutConfig coop;
  coop.strategy_path = t.path("rg") + "/strategy.json";
  coop.human = "cooperative";
  coop.out_dir = t.path("ro-coop");
  json rc_ = rollout(coop);
  CHECK(rc_["payoff"]["max"] == 1);
  CHECK(rc_["accepted"] == 1);

  cli::RolloutConfig radv = coop;
  radv.human = "adversarial";
  radv.out_dir = t.path("ro-radv");
  json rr = rollout(radv);
  CHECK(rr["payoff"]["max"] == 11);
  CHECK(rr["payoff"]["max"] <= 12);
  CHECK(rr["accepted"] == 1);

  // equal seeds reproduce random rollouts byte for byte
  cli::RolloutConfig rnd = coop;
  rnd.human = "random:3";
  rnd.count = 4;
  rnd.out_dir = t.path("ro-rnd1");
  rollout(rnd);
  rnd.out_dir = t.path("ro-rnd2");
  rollout(rnd);
  CHECK(read_text(t.path("ro-rnd1") + "/transcripts.json") ==
        read_text(t.path("ro-rnd2") + "/transcripts.json"));

  cli::RolloutConfig none = coop;
  none.count = 0;
  none.out_dir = t.path("ro-none");
  json rn = rollout(none);
  CHECK(rn["payoff"].is_null());
  CHECK(read_json(none.out_dir + "/transcripts.json").empty());
}

TEST_CASE("rollout validates the artifact against its instance") {
  Scratch t;
  manip::save_instance(t.path("inst.json"), direct_drop());
  cli::RunConfig rc;
  rc.instance_path = t.path("inst.json");
  rc.solver = cli::Solver::Explicit;
  rc.out_dir = t.path("out");
  synth(rc, cli::kOk);

  json art = read_json(t.path("out") + "/strategy.json");
  art["rows"][0]["action"] = "levitate(b0)";
  {
    std::ofstream f(t.path("bad.json"));
    f << art.dump();
  }
  cli::RolloutConfig ro;
  ro.strategy_path = t.path("bad.json");
  ro.out_dir = t.path("ro");
  std::ostringstream os;
  REQUIRE_THROWS_AS(cli::run_rollout(ro, os), cli::CliError);

  {
    std::ofstream f(t.path("notart.json"));
    f << "{\"rows\": []}";
  }
  ro.strategy_path = t.path("notart.json");
  REQUIRE_THROWS_AS(cli::run_rollout(ro, os), cli::CliError);
}

TEST_CASE("bench emits one record per instance and solver") {
  Scratch t;
  cli::BenchConfig bc;
  bc.scenario = "vary-L";
  bc.lo = 3;
  bc.hi = 4;
  bc.seeds = {0};
  bc.out_dir = t.path("b1");
  std::ostringstream os;
  REQUIRE(cli::run_bench(bc, os) == cli::kOk);

  std::vector<json> records, checks;
  std::istringstream lines(os.str());
  for (std::string line; std::getline(lines, line);) {
    json r = json::parse(line);
    (r.contains("check") ? checks : records).push_back(r);
  }
  REQUIRE(records.size() == 6);  // two parameter values, three solvers
  std::set<std::pair<int64_t, std::string>> keys;
  json l4_value;
  for (const auto& r : records) {
    keys.insert({r["param"].get<int64_t>(), r["solver"].get<std::string>()});
    if (r["param"] == 3) {
      CHECK(r["status"] == "error");  // the generator needs spare slots
    } else {
      CHECK(r["status"] == "ok");
      if (l4_value.is_null()) l4_value = r["minmax_value"];
      CHECK(r["minmax_value"] == l4_value);
    }
  }
  CHECK(keys.size() == 6);
  REQUIRE(checks.size() == 1);
  CHECK(checks[0]["check"] == "cross-solver");
  CHECK(checks[0]["ok"] == true);

  std::string csv = read_text(t.path("b1") + "/bench.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);  // header + records
  CHECK(fs::exists(t.path("b1") + "/bench.jsonl"));

  // a low state cap turns explicit runs into skip records, not failures
  cli::BenchConfig capped = bc;
  capped.lo = capped.hi = 4;
  capped.max_states = 150;
  capped.out_dir = t.path("b2");
  std::ostringstream os2;
  REQUIRE(cli::run_bench(capped, os2) == cli::kOk);
  std::istringstream lines2(os2.str());
  std::map<std::string, std::string> status;
  for (std::string line; std::getline(lines2, line);) {
    json r = json::parse(line);
    if (!r.contains("check"))
      status[r["solver"].get<std::string>()] = r["status"].get<std::string>();
  }
  CHECK(status["explicit"] == "skip");
  CHECK(status["symbolic-monolithic"] == "ok");
  CHECK(status["symbolic-partitioned"] == "ok");
}

TEST_CASE("bench vary-B sweeps regret budgets") {
  Scratch t;
  cli::BenchConfig bc;
  bc.scenario = "vary-B";
  bc.lo = 4;
  bc.hi = 6;
  bc.seeds = {0};
  bc.solvers = {cli::Solver::Explicit, cli::Solver::SymbolicMonolithic};
  bc.out_dir = t.path("b");
  std::ostringstream os;
  REQUIRE(cli::run_bench(bc, os) == cli::kOk);

  size_t runs = 0;
  bool saw_cross = false, saw_monotone = false;
  std::istringstream lines(os.str());
  for (std::string line; std::getline(lines, line);) {
    json r = json::parse(line);
    if (r.contains("check")) {
      if (r["check"] == "cross-solver") saw_cross = r["ok"] == true;
      if (r["check"] == "regret-monotone") saw_monotone = r["ok"] == true;
      continue;
    }
    runs++;
    CHECK(r["budget"] == r["param"]);
    CHECK(r.contains("regret_value"));
  }
  CHECK(runs == 6);
  CHECK(saw_cross);
  CHECK(saw_monotone);
}

#ifdef SYMSYNTH_CLI_BIN
TEST_CASE("the binary wires flags to the same flows") {
  Scratch t;
  manip::save_instance(t.path("drop.json"), direct_drop());
  manip::save_instance(t.path("undo.json"), revocable());
  auto run = [&](const std::string& args) {
    std::string cmd = std::string(SYMSYNTH_CLI_BIN) + " " + args + " > " +
                      t.path("stdout.txt") + " 2> " + t.path("stderr.txt");
    int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WEXITSTATUS(rc);
  };
  CHECK(run("translate --formula 'F(p)' --out " + t.path("td")) == 0);
  CHECK(run("synth --instance " + t.path("drop.json") +
            " --solver explicit --out " + t.path("sd")) == 0);
  CHECK(run("rollout --strategy " + t.path("sd") + "/strategy.json -n 0 --out " +
            t.path("rd")) == 0);
  CHECK(run("synth --instance " + t.path("undo.json") +
            " --solver explicit --out " + t.path("i1")) == 2);
  CHECK(run("synth --instance " + t.path("drop.json") +
            " --solver explicit --max-states 5 --out " + t.path("i2")) == 3);
  CHECK(run("synth --instance " + t.path("missing.json") + " --out " +
            t.path("i3")) == 1);
  CHECK(run("synth --solver explicit --out " + t.path("i4")) == 1);
  CHECK(run("frobnicate") != 0);
}
#endif
