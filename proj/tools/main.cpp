// Command-line shell: validate / solve / reduce / diagnose / compare over
// problem-definition files.  Every run writes a manifest sufficient to
// reproduce its CSV outputs byte-for-byte.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>

#include "teamci/diagnostics.hpp"
#include "teamci/errors.hpp"
#include "teamci/problem_io.hpp"
#include "teamci/report_io.hpp"
#include "teamci/solvers.hpp"

namespace fs = std::filesystem;
using namespace teamci;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitCap = 3;
constexpr int kExitIo = 4;

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

GridOptions parse_grid_option(const std::string& text, std::uint64_t cap) {
  GridOptions options;
  options.cap = cap;
  if (text == "deterministic") {
    options.mode = GridOptions::Mode::Deterministic;
    return options;
  }
  if (text.rfind("randomized:", 0) == 0) {
    options.mode = GridOptions::Mode::Randomized;
    options.resolution = static_cast<unsigned>(std::stoul(text.substr(11)));
    if (options.resolution < 1)
      throw CLI::ValidationError("--grid", "resolution must be >= 1");
    return options;
  }
  throw CLI::ValidationError("--grid", "expected 'deterministic' or 'randomized:<r>'");
}

// Collects output files and writes the manifest at the end of a run.
class Emitter {
 public:
  Emitter(fs::path out_dir, std::vector<std::string> argv_vec, std::string command,
          const fs::path& input)
      : out_dir_(std::move(out_dir)), start_(now_seconds()) {
    manifest_.argv = std::move(argv_vec);
    manifest_.command = std::move(command);
    manifest_.input_path = input.string();
    manifest_.input_digest = file_digest(input);
    fs::create_directories(out_dir_);
  }

  void option(const std::string& key, const std::string& value) {
    manifest_.options[key] = value;
  }

  void csv(const std::string& name, const CsvTable& table) {
    table.write(out_dir_ / name);
    manifest_.outputs.push_back(name);
  }

  void text(const std::string& name, const std::string& content) {
    write_text_file(out_dir_ / name, content);
    manifest_.outputs.push_back(name);
  }

  void finish() {
    manifest_.wall_seconds = now_seconds() - start_;
    manifest_.write(out_dir_ / "manifest.json");
  }

 private:
  fs::path out_dir_;
  RunManifest manifest_;
  double start_;
};

std::string row_descriptor(const Measure& row) {
  if (auto u = row.point_support()) return "d" + std::to_string(*u);
  std::string out = "(";
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (k) out += "|";
    out += format_g17(row.weight(k));
  }
  return out + ")";
}

std::string action_descriptor(const PrescriptionAction& lambda) {
  std::string out;
  for (std::size_t i = 0; i < lambda.parts.size(); ++i) {
    if (i) out += "/";
    for (std::size_t y = 0; y < lambda.parts[i].rows(); ++y) {
      if (y) out += ".";
      out += row_descriptor(lambda.parts[i].row(y));
    }
  }
  return out;
}

std::string profile_descriptor(const PolicyProfile& profile) {
  std::string out;
  for (int i = 0; i < profile.num_agents(); ++i) {
    if (i) out += ";";
    out += "a" + std::to_string(i) + "=";
    for (std::size_t r = 0; r < profile.part(i).rows(); ++r) {
      if (r) out += ",";
      out += row_descriptor(profile.part(i).row(r));
    }
  }
  return out;
}

std::string prescription_descriptor(const TeamProblem& problem, const Prescription& pres) {
  std::string out;
  for (std::size_t x0 = 0; x0 < pres.action_index.size(); ++x0) {
    if (x0) out += ";";
    out += problem.common_space()->atom(x0).label + ":";
    out += pres.action_index[x0] == Prescription::kUnassigned
               ? "-"
               : std::to_string(pres.action_index[x0]);
  }
  return out;
}

CsvTable solve_result_csv(const TeamProblem& problem, const SolveResult& result) {
  CsvTable table({"method", "value", "grid_size", "evaluations", "prescription", "profile"});
  table.add_row({result.method, format_g17(result.value),
                 std::to_string(result.grid ? result.grid->size() : 0),
                 std::to_string(result.evaluations),
                 result.prescription ? prescription_descriptor(problem, *result.prescription)
                                     : "-",
                 profile_descriptor(result.profile)});
  return table;
}

std::string solve_summary(const TeamProblem& problem, const SolveResult& result) {
  std::ostringstream os;
  os << "method: " << result.method << "\n";
  os << "problem: " << problem.name() << "\n";
  os << "value: " << format_g17(result.value) << "\n";
  os << "evaluations: " << result.evaluations << "\n";
  if (result.grid) os << "grid size: " << result.grid->size() << "\n";
  if (result.prescription)
    os << "prescription: " << prescription_descriptor(problem, *result.prescription) << "\n";
  os << "profile: " << profile_descriptor(result.profile) << "\n";
  os << "wall seconds: " << result.wall_seconds << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// diagnose helpers

int run_diagnose(const TeamProblem& problem, const std::string& kind, Emitter& emitter,
                 std::size_t x0, std::size_t n_max, std::size_t steps, double tol, double eps,
                 double r_factor, double ic_bound, const std::vector<double>& radii,
                 const GridOptions& grid_options, std::uint64_t seed) {
  if (kind == "escaping-mass") {
    SpacePtr action = escaping_mass_action_grid(n_max);
    SpacePtr base = escaping_mass_base_space();
    std::vector<TestFunction> bank;
    bank.push_back(TestFunction::from_fn(base, action, [](const Atom&, const Atom& u) {
      return std::exp(-u.coord[0] * u.coord[0]);
    }));
    EscapingMassReport report = escaping_mass_demo(n_max, bank);
    CsvTable table({"n", "pairing", "row_mass"});
    for (std::size_t n = 1; n <= n_max; ++n)
      table.add_row({std::to_string(n), format_g17(report.pairings[0][n - 1]),
                     format_g17(report.step_row_mass[n - 1])});
    emitter.csv("diagnose_escaping_mass.csv", table);
    emitter.text("diagnose_escaping_mass.txt", report.to_string());
    std::cout << report.to_string();
    return 0;
  }

  if (kind == "wstar") {
    // designed demonstration on agent 0's prescription components: a
    // geometric interpolation toward a corner, probed against the bank
    auto grid = build_lambda_grid(problem, grid_options);
    if (grid.size() < 2) throw std::invalid_argument("diagnose wstar: grid too small");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
    const Kernel& a = grid[pick(rng)].parts[0];
    const Kernel& b = grid[pick(rng)].parts[0];
    std::vector<Kernel> seq;
    for (std::size_t n = 1; n <= steps; ++n)
      seq.push_back(mix_kernels(a, b, std::pow(2.0, -static_cast<double>(n))));
    auto bank = default_test_bank(problem.observation_space(0), problem.action_space(0));
    ConvergenceReport report = check_wstar_convergence(
        seq, a, bank, problem.channel(0).reference, tol, steps > 8 ? steps - 8 : 0);
    CsvTable table({"function", "n", "pairing", "limit", "deviation"});
    for (std::size_t k = 0; k < report.per_function.size(); ++k)
      for (std::size_t n = 0; n < report.per_function[k].pairings.size(); ++n)
        table.add_row({std::to_string(k), std::to_string(n + 1),
                       format_g17(report.per_function[k].pairings[n]),
                       format_g17(report.per_function[k].limit_pairing),
                       format_g17(std::abs(report.per_function[k].pairings[n] -
                                           report.per_function[k].limit_pairing))});
    emitter.csv("diagnose_wstar.csv", table);
    emitter.text("diagnose_wstar.txt", report.to_string());
    std::cout << report.to_string();
    return report.converged ? 0 : kExitValidation;
  }

  if (kind == "tightness") {
    auto grid = build_lambda_grid(problem, grid_options);
    SpacePtr joint = joint_obs_action_space(problem);
    std::vector<Measure> family;
    family.reserve(grid.size());
    for (const auto& lambda : grid)
      family.push_back(prescription_joint_measure(problem, joint, lambda));
    auto schedule = coordinate_ball_schedule(joint, radii);
    TightnessReport report = tightness_check(family, schedule, eps);
    CsvTable table({"member", "set", "outside_mass"});
    for (std::size_t m = 0; m < family.size(); ++m)
      for (std::size_t s = 0; s < schedule.size(); ++s)
        table.add_row({std::to_string(m), report.set_names[s],
                       format_g17(report.outside_mass[m][s])});
    emitter.csv("diagnose_tightness.csv", table);
    emitter.text("diagnose_tightness.txt", report.to_string());
    std::cout << report.to_string();
    return 0;
  }

  if (kind == "ic") {
    // phi = c~ = c prod q_i over the (Y, U, X) factorization at x0
    const JointIndexer& obs = problem.obs_indexer();
    const JointIndexer& act = problem.act_indexer();
    std::vector<SpacePtr> parts;
    for (int i = 0; i < problem.num_agents(); ++i) parts.push_back(problem.action_space(i));
    SpacePtr u_space = FiniteSpace::product(parts);
    auto candidates = coordinate_ball_schedule(u_space, radii);
    std::vector<std::size_t> K(obs.total());
    for (std::size_t k = 0; k < K.size(); ++k) K[k] = k;
    std::vector<std::size_t> ybuf(problem.num_agents());
    auto phi = [&](std::size_t yj, std::size_t uj, std::size_t x) {
      obs.decode(yj, ybuf);
      double q = 1.0;
      for (int i = 0; i < problem.num_agents(); ++i) q *= problem.channel_q(i, ybuf[i], x);
      return problem.cost_value_joint(x, x0, yj, uj) * q;
    };
    auto result = ic_class_check(phi, obs.total(), act.total(),
                                 problem.state_space()->size(), K, ic_bound, candidates);
    CsvTable table({"candidate", "bound", "verdict", "achieved_min"});
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      bool hit = result && result->set_index == c;
      table.add_row({candidates[c].name, format_g17(ic_bound), hit ? "sufficient" : "-",
                     hit ? format_g17(result->achieved_min) : "-"});
    }
    emitter.csv("diagnose_ic.csv", table);
    std::ostringstream os;
    if (result) {
      os << "IC class holds: inf over K x L^c x X of c~ = " << format_g17(result->achieved_min)
         << " >= " << format_g17(ic_bound) << " with L = " << result->set_name << "\n";
    } else {
      os << "no scheduled L certifies the IC bound " << format_g17(ic_bound) << "\n";
    }
    emitter.text("diagnose_ic.txt", os.str());
    std::cout << os.str();
    return 0;
  }

  if (kind == "sublevel") {
    auto cp = reduce(problem, build_lambda_grid(problem, grid_options),
                     grid_options.describe());
    double row_min = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cp.grid.size(); ++j)
      row_min = std::min(row_min, cp.m(x0, j));
    const double r = r_factor * row_min;
    SpacePtr joint = joint_obs_action_space(problem);
    bool all_compact = true;
    for (int i = 0; i < problem.num_agents(); ++i)
      all_compact = all_compact && problem.action_space(i)->compact_flag();
    auto schedule =
        all_compact ? full_space_schedule(joint) : coordinate_ball_schedule(joint, radii);
    SublevelTightnessOptions options;
    options.ic_bound = ic_bound;
    options.ic_radii = radii;
    SublevelTightnessReport report =
        sublevel_tightness(problem, cp, x0, r, schedule, eps, options);
    CsvTable table({"grid_index", "m_value", "in_sublevel"});
    for (std::size_t j = 0; j < cp.grid.size(); ++j) {
      bool in = cp.m(x0, j) <= r;
      table.add_row({std::to_string(j), format_g17(cp.m(x0, j)), in ? "1" : "0"});
    }
    emitter.csv("diagnose_sublevel.csv", table);
    emitter.text("diagnose_sublevel.txt", report.to_string());
    std::cout << report.to_string();
    return 0;
  }

  if (kind == "lsc") {
    auto grid = build_lambda_grid(problem, grid_options);
    if (grid.size() < 2) throw std::invalid_argument("diagnose lsc: grid too small");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
    std::vector<LscSequence> sequences;
    const std::size_t n_sequences = 4;
    for (std::size_t s = 0; s < n_sequences; ++s) {
      LscSequence seq;
      const PrescriptionAction& limit = grid[pick(rng)];
      const PrescriptionAction& other = grid[pick(rng)];
      for (std::size_t n = 1; n <= steps; ++n) {
        PrescriptionAction term;
        for (std::size_t i = 0; i < limit.parts.size(); ++i)
          term.parts.push_back(mix_kernels(limit.parts[i], other.parts[i],
                                           std::pow(2.0, -static_cast<double>(n))));
        seq.terms.push_back(std::move(term));
      }
      seq.limit = limit;
      sequences.push_back(std::move(seq));
    }
    LscReport report =
        lsc_probe(problem, x0, sequences, tol, steps > 8 ? steps - 8 : 0);
    CsvTable table({"sequence", "n", "m_value", "m_limit"});
    for (std::size_t s = 0; s < report.sequences.size(); ++s)
      for (std::size_t n = 0; n < report.sequences[s].m_values.size(); ++n)
        table.add_row({std::to_string(s), std::to_string(n + 1),
                       format_g17(report.sequences[s].m_values[n]),
                       format_g17(report.sequences[s].m_limit)});
    emitter.csv("diagnose_lsc.csv", table);
    emitter.text("diagnose_lsc.txt", report.to_string());
    std::cout << report.to_string();
    return report.all_pass ? 0 : kExitValidation;
  }

  throw CLI::ValidationError("diagnose", "unknown kind '" + kind + "'");
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> argv_vec(argv, argv + argc);

  CLI::App app{"static team problems solved through their centralized reduction"};
  app.require_subcommand(1);

  std::string input;
  std::string out_dir = "out";
  std::string grid_text = "deterministic";
  std::string method = "ci";
  std::uint64_t cap = kDefaultEnumerationCap;
  std::uint64_t seed = 0;
  int max_iter = 100;
  double tol = 1e-9;

  auto* validate_cmd = app.add_subcommand("validate", "check a problem file");
  validate_cmd->add_option("file", input, "problem file")->required();

  auto* solve_cmd = app.add_subcommand("solve", "solve a team problem");
  solve_cmd->add_option("file", input, "problem file")->required();
  solve_cmd->add_option("--method", method, "brute | ci | pbp")
      ->check(CLI::IsMember({"brute", "ci", "pbp"}));
  solve_cmd->add_option("--grid", grid_text, "deterministic | randomized:<r>");
  solve_cmd->add_option("--cap", cap, "enumeration cap override");
  solve_cmd->add_option("--seed", seed, "rng seed (recorded; solvers are deterministic)");
  solve_cmd->add_option("--max-iter", max_iter, "pbp cycle limit");
  solve_cmd->add_option("--tol", tol, "pbp stopping tolerance");
  solve_cmd->add_option("--out", out_dir, "output directory");

  auto* reduce_cmd = app.add_subcommand("reduce", "emit the reduced M table");
  reduce_cmd->add_option("file", input, "problem file")->required();
  reduce_cmd->add_option("--grid", grid_text, "deterministic | randomized:<r>");
  reduce_cmd->add_option("--cap", cap, "enumeration cap override");
  reduce_cmd->add_option("--out", out_dir, "output directory");

  std::string kind;
  std::size_t x0 = 0;
  std::size_t n_max = 30;
  std::size_t steps = 48;
  double diag_tol = 1e-6;
  double eps = 1e-9;
  double r_factor = 2.0;
  double ic_bound = 1.0;
  std::vector<double> radii = {1.0, 2.0, 4.0, 8.0, 16.0};
  auto* diagnose_cmd = app.add_subcommand("diagnose", "numerical topology reports");
  diagnose_cmd->add_option("file", input, "problem file")->required();
  diagnose_cmd
      ->add_option("kind", kind, "wstar | escaping-mass | tightness | ic | sublevel | lsc")
      ->required()
      ->check(CLI::IsMember({"wstar", "escaping-mass", "tightness", "ic", "sublevel", "lsc"}));
  diagnose_cmd->add_option("--x0", x0, "common-information atom index");
  diagnose_cmd->add_option("--n-max", n_max, "escaping-mass step count");
  diagnose_cmd->add_option("--steps", steps, "sequence length");
  diagnose_cmd->add_option("--tol", diag_tol, "convergence tolerance");
  diagnose_cmd->add_option("--eps", eps, "tightness mass tolerance");
  diagnose_cmd->add_option("--r-factor", r_factor, "sub-level threshold factor over the row min");
  diagnose_cmd->add_option("--ic-bound", ic_bound, "IC growth bound");
  diagnose_cmd->add_option("--radii", radii, "compact-set ball radii");
  diagnose_cmd->add_option("--grid", grid_text, "deterministic | randomized:<r>");
  diagnose_cmd->add_option("--cap", cap, "enumeration cap override");
  diagnose_cmd->add_option("--seed", seed, "rng seed for designed sequences");
  diagnose_cmd->add_option("--out", out_dir, "output directory");

  auto* compare_cmd = app.add_subcommand("compare", "brute force vs centralized reduction");
  compare_cmd->add_option("file", input, "problem file")->required();
  compare_cmd->add_option("--grid", grid_text, "deterministic | randomized:<r>");
  compare_cmd->add_option("--cap", cap, "enumeration cap override");
  compare_cmd->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (validate_cmd->parsed()) {
      TeamProblem problem = load_problem(input);
      ValidationReport report = validate(problem);
      std::cout << report.to_string();
      return report.ok() ? 0 : kExitValidation;
    }

    TeamProblem problem = parse_problem(input);
    const std::uint64_t effective_cap =
        cap != kDefaultEnumerationCap ? cap : problem.enumeration_cap();
    GridOptions grid_options = parse_grid_option(grid_text, effective_cap);

    if (solve_cmd->parsed()) {
      Emitter emitter(out_dir, argv_vec, "solve", input);
      emitter.option("method", method);
      emitter.option("grid", grid_options.describe());
      emitter.option("cap", std::to_string(effective_cap));
      emitter.option("seed", std::to_string(seed));
      emitter.option("max_iter", std::to_string(max_iter));
      emitter.option("tol", format_g17(tol));

      SolveResult result = [&] {
        if (method == "brute") return brute_force(problem, effective_cap);
        if (method == "ci") return solve_common_information(problem, grid_options);
        return person_by_person(problem, all_first_action_profile(problem), max_iter, tol);
      }();

      emitter.csv("solve.csv", solve_result_csv(problem, result));
      if (!result.trace.empty()) {
        CsvTable trace({"step", "value"});
        for (std::size_t k = 0; k < result.trace.size(); ++k)
          trace.add_row({std::to_string(k), format_g17(result.trace[k])});
        emitter.csv("trace.csv", trace);
      }
      emitter.text("solve.txt", solve_summary(problem, result));
      emitter.finish();
      std::cout << solve_summary(problem, result);
      return 0;
    }

    if (reduce_cmd->parsed()) {
      Emitter emitter(out_dir, argv_vec, "reduce", input);
      emitter.option("grid", grid_options.describe());
      emitter.option("cap", std::to_string(effective_cap));
      CentralizedProblem cp =
          reduce(problem, build_lambda_grid(problem, grid_options), grid_options.describe());

      std::vector<std::string> columns = {"x0"};
      for (std::size_t j = 0; j < cp.grid.size(); ++j)
        columns.push_back("g" + std::to_string(j) + "=" + action_descriptor(cp.grid[j]));
      CsvTable table(columns);
      for (std::size_t atom = 0; atom < cp.common_space->size(); ++atom) {
        if (!cp.row_active[atom]) continue;  // zero-mass rows are omitted
        std::vector<std::string> row = {cp.common_space->atom(atom).label};
        for (std::size_t j = 0; j < cp.grid.size(); ++j)
          row.push_back(format_g17(cp.m(atom, j)));
        table.add_row(row);
      }
      emitter.csv("mtable.csv", table);
      emitter.finish();
      std::cout << "wrote M table: " << table.rows() << " active rows x " << cp.grid.size()
                << " prescription actions\n";
      return 0;
    }

    if (diagnose_cmd->parsed()) {
      Emitter emitter(out_dir, argv_vec, "diagnose", input);
      emitter.option("kind", kind);
      emitter.option("x0", std::to_string(x0));
      emitter.option("n_max", std::to_string(n_max));
      emitter.option("steps", std::to_string(steps));
      emitter.option("tol", format_g17(diag_tol));
      emitter.option("eps", format_g17(eps));
      emitter.option("r_factor", format_g17(r_factor));
      emitter.option("ic_bound", format_g17(ic_bound));
      std::string radii_text;
      for (double r : radii) radii_text += (radii_text.empty() ? "" : ",") + format_g17(r);
      emitter.option("radii", radii_text);
      emitter.option("grid", grid_options.describe());
      emitter.option("seed", std::to_string(seed));
      int code = run_diagnose(problem, kind, emitter, x0, n_max, steps, diag_tol, eps,
                              r_factor, ic_bound, radii, grid_options, seed);
      emitter.finish();
      return code;
    }

    if (compare_cmd->parsed()) {
      Emitter emitter(out_dir, argv_vec, "compare", input);
      emitter.option("grid", grid_options.describe());
      emitter.option("cap", std::to_string(effective_cap));
      SolveResult bf = brute_force(problem, effective_cap);
      SolveResult ci = solve_common_information(problem, grid_options);
      CsvTable table({"brute_value", "ci_value", "difference"});
      table.add_row({format_g17(bf.value), format_g17(ci.value),
                     format_g17(bf.value - ci.value)});
      emitter.csv("compare.csv", table);
      emitter.finish();
      std::cout << "brute: " << format_g17(bf.value) << "\n"
                << "ci:    " << format_g17(ci.value) << "\n"
                << "diff:  " << format_g17(bf.value - ci.value) << "\n";
      return 0;
    }
  } catch (const CapExceeded& e) {
    std::cerr << "cap refusal: " << e.what() << "\n";
    return kExitCap;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
