// dbkd: estimate teacher logits from top-1 decisions.
//
//   dbkd estimate --input texts.txt --oracle sim:teacher.json --output labels.jsonl
//   dbkd table    --labels 4 --n-augment 10 --output table.json
//   dbkd sweep    --parameter N --grid 1,2,5,10,20,40 --output sweep.tsv
//   dbkd augment  --input texts.txt --n-augment 10 --output variants.jsonl
//   dbkd distill  --output report.tsv
//
// Exit codes: 0 ok, 1 usage, 2 I/O, 3 oracle failure, 4 numerical failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dbkd/augment.hpp"
#include "dbkd/distill.hpp"
#include "dbkd/solver.hpp"
#include "dbkd/teacher.hpp"
#include "manifest.hpp"

namespace {

using namespace dbkd;
using nlohmann::json;

enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kOracle = 3, kNumerical = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  double sigma = 1.0;
  double epsilon = 1e-3;
  std::size_t max_iter = 100;
  double damping = 1.0;
  std::size_t n_augment = 10;
  std::string output;
};

struct InputRecord {
  std::string id;
  std::string text;
};

void add_solver_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--sigma", c.sigma, "Logit noise scale of the decision model")
      ->capture_default_str();
  cmd->add_option("--epsilon", c.epsilon, "Solver error bound")->capture_default_str();
  cmd->add_option("--max-iter", c.max_iter, "Solver iteration cap")->capture_default_str();
  cmd->add_option("--damping", c.damping, "Solver step multiplier in (0, 1]")
      ->capture_default_str();
}

void add_common_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--jobs", c.jobs, "Worker threads")->capture_default_str();
  cmd->add_option("--output", c.output, "Output file")->required();
}

SolverConfig solver_config(const Common& c, bool smooth) {
  SolverConfig s;
  s.sigma = NoiseScale(c.sigma);
  s.epsilon = c.epsilon;
  s.max_iterations = c.max_iter;
  s.damping = c.damping;
  s.smooth_counts = smooth;
  s.validate();
  return s;
}

json solver_json(const SolverConfig& s) {
  return {{"sigma", s.sigma.value()},
          {"epsilon", s.epsilon},
          {"max_iterations", s.max_iterations},
          {"damping", s.damping},
          {"smooth_counts", s.smooth_counts},
          {"quadrature",
           {{"nodes_per_level", s.quadrature.nodes_per_level},
            {"upper_cut", s.quadrature.upper_cut},
            {"tolerance", s.quadrature.tolerance}}}};
}

/// Plain text (one input per non-blank line, id "line-<k>") or JSON lines
/// with {"id", "text"}.
std::vector<InputRecord> read_inputs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open input " + path);
  std::vector<InputRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line.front() == '{') {
      try {
        const json j = json::parse(line);
        out.push_back({j.at("id").is_string() ? j.at("id").get<std::string>()
                                              : j.at("id").dump(),
                       j.at("text").get<std::string>()});
      } catch (const json::exception& e) {
        throw IoError(path + ":" + std::to_string(line_no) + ": " + e.what());
      }
    } else {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      out.push_back({"line-" + std::to_string(line_no), line});
    }
  }
  return out;
}

AugmentConfig augment_config(std::uint64_t seed, double alpha, const std::string& lexicon,
                             const std::string& stopwords) {
  AugmentConfig cfg;
  cfg.seed = seed;
  cfg.alpha_expectation = alpha;
  if (!lexicon.empty()) {
    cfg.lexicon = std::make_shared<SynonymLexicon>(SynonymLexicon::load(lexicon));
  }
  if (!stopwords.empty()) {
    cfg.stopwords = std::make_shared<StopwordSet>(StopwordSet::load(stopwords));
  }
  cfg.validate();
  return cfg;
}

std::unique_ptr<DecisionOracle> make_oracle(const std::string& descriptor,
                                            std::optional<std::size_t> labels, int retries) {
  const auto colon = descriptor.find(':');
  if (colon == std::string::npos) {
    throw UsageError("--oracle must be sim:FILE, bow:FILE or remote:URL");
  }
  const std::string kind = descriptor.substr(0, colon);
  const std::string arg = descriptor.substr(colon + 1);
  std::unique_ptr<DecisionOracle> oracle;
  if (kind == "sim") {
    oracle = std::make_unique<GaussianSimTeacher>(GaussianSimTeacher::load(arg));
  } else if (kind == "bow") {
    oracle = std::make_unique<BowTextTeacher>(BowTextTeacher::load(arg));
  } else if (kind == "remote") {
    if (!labels) throw UsageError("--labels is required with a remote oracle");
    RemoteConfig rc;
    rc.endpoint = arg;
    rc.retries = retries;
    oracle = std::make_unique<RemoteDecisionClient>(rc, LabelSpace(*labels));
  } else {
    throw UsageError("unknown oracle kind '" + kind + "'");
  }
  if (labels && oracle->label_space().size() != *labels) {
    throw UsageError("--labels does not match the oracle's label count");
  }
  return oracle;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(' ') == std::string::npos) continue;
    try {
      std::size_t used = 0;
      grid.push_back(std::stod(item, &used));
      if (item.find_first_not_of(' ', used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad grid value '" + item + "'");
    }
  }
  if (grid.empty()) throw UsageError("--grid must list at least one value");
  return grid;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
  Common c;
  std::string input;
  std::string oracle;
  std::optional<std::size_t> labels;
  double tau = 1.0;
  double alpha = 0.1;
  std::string lexicon, stopwords, decision_log, table;
  bool include_original = false;
  bool smooth = false;
  int retries = 3;
};

int run_estimate(const EstimateArgs& a, cli::RunManifest& m) {
  const SolverConfig solver = solver_config(a.c, a.smooth);
  if (!(a.tau > 0.0)) throw UsageError("--tau must be positive");
  if (a.c.n_augment == 0) throw UsageError("--n-augment must be >= 1");
  const AugmentConfig aug = augment_config(a.c.seed, a.alpha, a.lexicon, a.stopwords);
  const auto inputs = read_inputs(a.input);
  auto oracle = make_oracle(a.oracle, a.labels, a.retries);

  std::optional<LogitsLookupTable> table;
  if (!a.table.empty()) {
    table = load_lookup_table(a.table);
    const std::size_t samples = a.c.n_augment + (a.include_original ? 1 : 0);
    if (table->label_count() != oracle->label_space().size() ||
        table->sample_count() != samples) {
      throw UsageError("lookup table does not match the label count and sample count");
    }
  }
  std::unique_ptr<DecisionLog> log;
  if (!a.decision_log.empty()) log = std::make_unique<DecisionLog>(a.decision_log);

  m.config = {{"solver", solver_json(solver)},
              {"oracle", oracle->identity()},
              {"n_augment", a.c.n_augment},
              {"include_original", a.include_original},
              {"tau", a.tau},
              {"alpha_expectation", a.alpha},
              {"lexicon", a.lexicon},
              {"stopwords", a.stopwords.empty() ? "builtin-english" : a.stopwords},
              {"decision_log", a.decision_log},
              {"table", a.table},
              {"jobs", a.c.jobs}};
  m.inputs = {a.input};
  if (!a.oracle.empty() && a.oracle.rfind("remote:", 0) != 0) {
    m.inputs.push_back(a.oracle.substr(a.oracle.find(':') + 1));
  }

  std::string out;
  std::size_t unconverged = 0;
  int status = kOk;
  for (const auto& rec : inputs) {
    const TokenSequence x = TokenSequence::tokenize(rec.text, *aug.stopwords);
    if (x.empty()) {
      m.errors.push_back({{"id", rec.id}, {"error", "empty input"}});
      status = std::max(status, static_cast<int>(kUsage));
      continue;
    }
    EstimateOptions opt;
    opt.input_id = rec.id;
    opt.include_original = a.include_original;
    opt.jobs = a.c.jobs;
    opt.log = log.get();
    DecisionDistribution p_tilde = one_hot(0, oracle->label_space());
    try {
      p_tilde = estimate_empirical(x, *oracle, a.c.n_augment, aug, opt);
    } catch (const EstimationError& e) {
      m.errors.push_back({{"id", rec.id}, {"draw", e.draw_index()}, {"error", e.what()}});
      status = kOracle;
      continue;
    }
    const SolveResult r = table ? lookup(*table, p_tilde) : solve_logits(p_tilde, solver);
    unconverged += r.converged ? 0 : 1;
    SoftLabelRecord sl = make_soft_label_record(rec.id, r, a.tau);
    sl.counts = p_tilde.counts();
    out += json(sl).dump() + "\n";
  }
  if (status != kOk) m.partial = true;
  cli::write_atomically(a.c.output, out);
  m.outputs = {a.c.output};
  m.timings["queries"] = oracle->query_count();
  m.timings["records"] = inputs.size() - m.errors.size();
  m.timings["unconverged"] = unconverged;
  for (const auto& e : m.errors) {
    std::cerr << "dbkd estimate: " << e["id"].get<std::string>() << ": "
              << e["error"].get<std::string>() << "\n";
  }
  return status;
}

// ---------------------------------------------------------------------------

struct TableArgs {
  Common c;
  std::size_t labels = 4;
};

int run_table(const TableArgs& a, cli::RunManifest& m) {
  if (a.labels < 2) throw UsageError("--labels must be >= 2");
  if (a.c.n_augment == 0) throw UsageError("--n-augment must be >= 1");
  const SolverConfig solver = solver_config(a.c, false);
  m.config = {{"solver", solver_json(solver)}, {"labels", a.labels},
              {"n_augment", a.c.n_augment}, {"jobs", a.c.jobs}};
  const auto t0 = std::chrono::steady_clock::now();
  const auto table = build_lookup_table(LabelSpace(a.labels), a.c.n_augment, solver, a.c.jobs);
  const double build = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  // Write through a temporary so a failed run never leaves a partial table.
  const std::string tmp = a.c.output + ".partial";
  save_lookup_table(table, tmp);
  std::error_code ec;
  std::filesystem::rename(tmp, a.c.output, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot write " + a.c.output + ": " + ec.message());
  }
  std::size_t unconverged = 0;
  for (const auto& [k, r] : table.entries()) unconverged += r.converged ? 0 : 1;
  std::cout << "entries: " << table.size() << "\n"
            << "unconverged: " << unconverged << "\n"
            << "build_seconds: " << format_double(build) << "\n";
  m.outputs = {a.c.output};
  m.timings["build_seconds"] = build;
  m.timings["entries"] = table.size();
  return kOk;
}

// ---------------------------------------------------------------------------

struct ToyArgs {
  Common c;
  std::size_t classes = 4, train = 2000, test = 500, epochs = 600, repeats = 1;
  double separation = 1.0, teacher_sigma = 1.0, lr = 0.2, lambda = 3.0, tau = 1.0;
};

void add_toy_flags(CLI::App* cmd, ToyArgs& t) {
  cmd->add_option("--classes", t.classes, "Blob classes")->capture_default_str();
  cmd->add_option("--train", t.train, "Training points")->capture_default_str();
  cmd->add_option("--test", t.test, "Held-out points")->capture_default_str();
  cmd->add_option("--separation", t.separation, "Blob mean scale")->capture_default_str();
  cmd->add_option("--teacher-sigma", t.teacher_sigma, "Noise of the simulated teacher")
      ->capture_default_str();
  cmd->add_option("--epochs", t.epochs, "Gradient descent epochs")->capture_default_str();
  cmd->add_option("--lr", t.lr, "Learning rate")->capture_default_str();
  cmd->add_option("--lambda", t.lambda, "KD term weight")->capture_default_str();
  cmd->add_option("--tau", t.tau, "KD temperature")->capture_default_str();
  cmd->add_option("--repeats", t.repeats, "Scenario seeds to average over")
      ->capture_default_str();
}

ToyScenario toy_scenario(const ToyArgs& t) {
  ToyScenario s;
  s.classes = t.classes;
  s.train_size = t.train;
  s.test_size = t.test;
  s.separation = t.separation;
  s.teacher_sigma = t.teacher_sigma;
  s.seed = t.c.seed;
  s.validate();
  return s;
}

ToyTrainingConfig toy_training(const ToyArgs& t) {
  ToyTrainingConfig c;
  c.epochs = t.epochs;
  c.learning_rate = t.lr;
  c.kd.lambda = t.lambda;
  c.kd.tau = t.tau;
  c.n_augment = t.c.n_augment;
  c.solver = solver_config(t.c, false);
  c.validate();
  return c;
}

json toy_json(const ToyScenario& s, const ToyTrainingConfig& t, std::size_t repeats) {
  return {{"scenario",
           {{"classes", s.classes}, {"dims", s.dims}, {"train", s.train_size},
            {"test", s.test_size}, {"separation", s.separation},
            {"teacher_sigma", s.teacher_sigma}, {"seed", s.seed}}},
          {"training",
           {{"epochs", t.epochs}, {"learning_rate", t.learning_rate},
            {"student_rank", t.student_rank}, {"lambda", t.kd.lambda}, {"tau", t.kd.tau},
            {"n_augment", t.n_augment}, {"smoothing", t.smoothing},
            {"noisy_scale", t.noisy_scale}, {"mse_tau", t.mse_tau},
            {"solver", solver_json(t.solver)}}},
          {"repeats", repeats}};
}

struct SweepArgs {
  ToyArgs t;
  std::string parameter;
  std::string grid;
};

int run_sweep_cmd(const SweepArgs& a, cli::RunManifest& m) {
  const auto parameter = parse_sweep_parameter(a.parameter);
  if (!parameter) throw UsageError("--parameter must be one of N, epsilon, sigma");
  const auto grid = parse_grid(a.grid);
  if (a.t.repeats == 0) throw UsageError("--repeats must be >= 1");
  const ToyScenario s = toy_scenario(a.t);
  const ToyTrainingConfig t = toy_training(a.t);
  m.config = toy_json(s, t, a.t.repeats);
  m.config["parameter"] = std::string(to_string(*parameter));
  m.config["grid"] = grid;
  const auto rows = run_sweep(*parameter, grid, s, t, a.t.repeats);
  std::string out = std::string(to_string(*parameter)) + "\taccuracy\tmse\n";
  for (const auto& r : rows) {
    out += format_double(r.value) + "\t" + format_double(r.accuracy) + "\t" +
           format_double(r.mse) + "\n";
  }
  cli::write_atomically(a.t.c.output, out);
  m.outputs = {a.t.c.output};
  return kOk;
}

struct DistillArgs {
  ToyArgs t;
  std::vector<std::string> methods;
};

int run_distill(const DistillArgs& a, cli::RunManifest& m) {
  std::vector<DistillMethod> methods;
  for (const auto& name : a.methods) {
    const auto mm = parse_distill_method(name);
    if (!mm) throw UsageError("unknown method '" + name + "'");
    methods.push_back(*mm);
  }
  if (methods.empty()) methods.assign(std::begin(kAllDistillMethods), std::end(kAllDistillMethods));
  if (a.t.repeats == 0) throw UsageError("--repeats must be >= 1");
  const ToyScenario s = toy_scenario(a.t);
  const ToyTrainingConfig t = toy_training(a.t);
  m.config = toy_json(s, t, a.t.repeats);
  std::string out = "method\taccuracy\tmse\tteacher_accuracy\tone_hot_fraction\n";
  for (DistillMethod method : methods) {
    ToyReport sum{};
    for (std::size_t r = 0; r < a.t.repeats; ++r) {
      ToyScenario sr = s;
      sr.seed = s.seed + r;
      const auto rep = toy_distillation_run(sr, method, t);
      sum.accuracy += rep.accuracy;
      sum.mse += rep.mse;
      sum.teacher_accuracy += rep.teacher_accuracy;
      sum.one_hot_fraction += rep.one_hot_fraction;
    }
    const double k = static_cast<double>(a.t.repeats);
    out += std::string(to_string(method)) + "\t" + format_double(sum.accuracy / k) + "\t" +
           format_double(sum.mse / k) + "\t" + format_double(sum.teacher_accuracy / k) + "\t" +
           format_double(sum.one_hot_fraction / k) + "\n";
  }
  cli::write_atomically(a.t.c.output, out);
  m.outputs = {a.t.c.output};
  return kOk;
}

// ---------------------------------------------------------------------------

struct AugmentArgs {
  Common c;
  std::string input;
  double alpha = 0.1;
  std::string lexicon, stopwords;
};

int run_augment(const AugmentArgs& a, cli::RunManifest& m) {
  if (a.c.n_augment == 0) throw UsageError("--n-augment must be >= 1");
  const AugmentConfig aug = augment_config(a.c.seed, a.alpha, a.lexicon, a.stopwords);
  const auto inputs = read_inputs(a.input);
  m.config = {{"n_augment", a.c.n_augment}, {"alpha_expectation", a.alpha},
              {"lexicon", a.lexicon},
              {"stopwords", a.stopwords.empty() ? "builtin-english" : a.stopwords}};
  m.inputs = {a.input};
  std::string out;
  for (const auto& rec : inputs) {
    const TokenSequence x = TokenSequence::tokenize(rec.text, *aug.stopwords);
    if (x.empty()) continue;
    for (std::size_t n = 1; n <= a.c.n_augment; ++n) {
      const AugmentDraw d = augment_draw(x, n, aug);
      out += json{{"id", rec.id}, {"n", n}, {"op", std::string(to_string(d.op))},
                  {"alpha", d.alpha}, {"text", d.tokens.join()}}
                 .dump() +
             "\n";
    }
  }
  cli::write_atomically(a.c.output, out);
  m.outputs = {a.c.output};
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision-based logit estimation and distillation"};
  app.set_version_flag("--version", DBKD_VERSION);
  app.require_subcommand(1);

  EstimateArgs est;
  auto* c_est = app.add_subcommand("estimate", "Estimate soft labels for each input");
  add_common_flags(c_est, est.c);
  add_solver_flags(c_est, est.c);
  c_est->add_option("--input", est.input, "Text lines or JSON lines {id, text}")->required();
  c_est->add_option("--oracle", est.oracle, "sim:FILE | bow:FILE | remote:URL")->required();
  c_est->add_option("--n-augment", est.c.n_augment, "Augmented queries per input")
      ->capture_default_str();
  c_est->add_option("--labels", est.labels, "Label count (required for remote oracles)");
  c_est->add_option("--tau", est.tau, "Soft label temperature")->capture_default_str();
  c_est->add_option("--alpha", est.alpha, "Mean edit rate")->capture_default_str();
  c_est->add_option("--lexicon", est.lexicon, "Synonym lexicon file");
  c_est->add_option("--stopwords", est.stopwords, "Stopword file");
  c_est->add_option("--decision-log", est.decision_log, "JSON-lines cache of teacher answers");
  c_est->add_option("--table", est.table, "Prebuilt lookup table");
  c_est->add_option("--retries", est.retries, "Remote retries after the first attempt")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  c_est->add_flag("--include-original", est.include_original, "Also query the unaugmented input");
  c_est->add_flag("--smooth", est.smooth, "Add 1/(2N) to every count before solving");

  TableArgs tab;
  auto* c_tab = app.add_subcommand("table", "Build the counts-to-logits lookup table");
  add_common_flags(c_tab, tab.c);
  add_solver_flags(c_tab, tab.c);
  c_tab->add_option("--labels", tab.labels, "Label count L")->capture_default_str();
  c_tab->add_option("--n-augment,-N", tab.c.n_augment, "Sample count N")->capture_default_str();

  SweepArgs sw;
  auto* c_sw = app.add_subcommand("sweep", "Toy distillation accuracy over a parameter grid");
  add_common_flags(c_sw, sw.t.c);
  add_solver_flags(c_sw, sw.t.c);
  add_toy_flags(c_sw, sw.t);
  c_sw->add_option("--n-augment", sw.t.c.n_augment, "Augmented queries per point")
      ->capture_default_str();
  c_sw->add_option("--parameter", sw.parameter, "N | epsilon | sigma")->required();
  c_sw->add_option("--grid", sw.grid, "Comma-separated values")->required();

  AugmentArgs au;
  auto* c_au = app.add_subcommand("augment", "Write augmented variants of each input");
  add_common_flags(c_au, au.c);
  c_au->add_option("--input", au.input, "Text lines or JSON lines {id, text}")->required();
  c_au->add_option("--n-augment", au.c.n_augment, "Variants per input")->capture_default_str();
  c_au->add_option("--alpha", au.alpha, "Mean edit rate")->capture_default_str();
  c_au->add_option("--lexicon", au.lexicon, "Synonym lexicon file");
  c_au->add_option("--stopwords", au.stopwords, "Stopword file");

  DistillArgs di;
  auto* c_di = app.add_subcommand("distill", "Compare distillation methods on the toy scenario");
  add_common_flags(c_di, di.t.c);
  add_solver_flags(c_di, di.t.c);
  add_toy_flags(c_di, di.t);
  c_di->add_option("--n-augment", di.t.c.n_augment, "Augmented queries per point")
      ->capture_default_str();
  c_di->add_option("--method", di.methods, "hard | smooth | noisy | dbkd | standard (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  cli::RunManifest manifest;
  manifest.argv.assign(argv, argv + argc);
  std::string output;
  int status = kOk;
  try {
    if (c_est->parsed()) {
      manifest.command = "estimate";
      manifest.seed = est.c.seed;
      output = est.c.output;
      status = run_estimate(est, manifest);
    } else if (c_tab->parsed()) {
      manifest.command = "table";
      output = tab.c.output;
      status = run_table(tab, manifest);
    } else if (c_sw->parsed()) {
      manifest.command = "sweep";
      manifest.seed = sw.t.c.seed;
      output = sw.t.c.output;
      status = run_sweep_cmd(sw, manifest);
    } else if (c_au->parsed()) {
      manifest.command = "augment";
      manifest.seed = au.c.seed;
      output = au.c.output;
      status = run_augment(au, manifest);
    } else if (c_di->parsed()) {
      manifest.command = "distill";
      manifest.seed = di.t.c.seed;
      output = di.t.c.output;
      status = run_distill(di, manifest);
    }
  } catch (const UsageError& e) {
    std::cerr << "dbkd: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "dbkd: " << e.what() << "\n";
    return kIo;
  } catch (const ContractError& e) {
    std::cerr << "dbkd: " << e.what() << "\n";
    return kUsage;
  } catch (const TransportError& e) {
    std::cerr << "dbkd: " << e.what() << "\n";
    return kOracle;
  } catch (const ProtocolError& e) {
    std::cerr << "dbkd: " << e.what() << "\n";
    return kOracle;
  } catch (const Error& e) {
    // Decomposition, divergence and lookup failures.
    std::cerr << "dbkd: " << e.what() << "\n";
    return kNumerical;
  }

  try {
    cli::write_manifest(manifest, output);
  } catch (const IoError& e) {
    std::cerr << "dbkd: " << e.what() << "\n";
    return kIo;
  }
  return status;
}
