// dpdt: train, compare and boost decision trees from CSV files.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <dpdt/dpdt.hpp>

namespace {

using dpdt::json;

struct DataOptions {
  std::string data;
  std::string test;
  std::string label = "-1";
  bool header = true;
  char delimiter = ',';
};

struct FitOptions {
  std::string algo = "dpdt";
  std::string generator = "cart_call";
  std::size_t depth = 3;
  double alpha = 0.0;
  std::vector<std::string> budgets;
  std::string impurity = "gini";
  std::string tie_break = "leaf";
  std::uint64_t seed = 0;
};

void add_data_options(CLI::App* cmd, DataOptions& o, bool required = true) {
  auto* data = cmd->add_option("--data", o.data, "Training CSV file");
  if (required) data->required();
  cmd->add_option("--test", o.test, "Optional test CSV file with the same schema");
  cmd->add_option("--label", o.label, "Label column: header name or zero-based index (negative counts from the end)")
      ->capture_default_str();
  cmd->add_flag("--header,!--no-header", o.header, "Whether the CSV files have a header row")->capture_default_str();
  cmd->add_option("--delimiter", o.delimiter, "Field delimiter")->capture_default_str();
}

void add_fit_options(CLI::App* cmd, FitOptions& o, bool with_algo = true) {
  if (with_algo)
    cmd->add_option("--algo", o.algo, "Tree inducer")->check(CLI::IsMember({"cart", "dpdt"}))->capture_default_str();
  cmd->add_option("--generator", o.generator, "DPDT split generator")
      ->check(CLI::IsMember({"exhaustive", "top_b", "cart_call"}))
      ->capture_default_str();
  cmd->add_option("--depth", o.depth, "Maximum tree depth")->capture_default_str();
  cmd->add_option("--alpha", o.alpha, "Complexity penalty per expected split, in [0, 1]")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--budgets", o.budgets,
                  "Per-depth candidate budgets B1,...,BD (a single value applies to every depth; default 8,1,...,1)");
  cmd->add_option("--impurity", o.impurity, "Split criterion")
      ->check(CLI::IsMember({"gini", "entropy"}))
      ->capture_default_str();
  cmd->add_option("--tie-break", o.tie_break, "Preferred action when a leaf and a split have equal value")
      ->check(CLI::IsMember({"leaf", "split"}))
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "Seed recorded in the report and used for synthetic data")->capture_default_str();
}

unsigned threads_from_env() {
  const char* v = std::getenv("DPDT_THREADS");
  if (!v || !*v) return 0;
  try {
    return static_cast<unsigned>(std::stoul(v));
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("DPDT_THREADS must be a nonnegative integer, got '") + v + "'");
  }
}

std::vector<std::size_t> budgets_for(const std::string& text, std::size_t depth) {
  if (text.empty()) {
    std::vector<std::size_t> b(depth, 1);
    if (depth > 0) b[0] = 8;
    return b;
  }
  auto b = dpdt::parse_budgets(text);
  if (b.size() == 1 && depth != 1) b.assign(depth, b[0]);
  return b;
}

dpdt::DpdtConfig dpdt_config(const FitOptions& o, const std::string& budgets) {
  dpdt::DpdtConfig c;
  c.max_depth = o.depth;
  c.alpha = o.alpha;
  c.tie_break = dpdt::tie_break_from_string(o.tie_break);
  c.threads = threads_from_env();
  auto impurity = dpdt::impurity_from_string(o.impurity);
  switch (dpdt::generator_from_string(o.generator)) {
    case dpdt::GeneratorKind::exhaustive:
      c.generator = dpdt::GeneratorSpec::exhaustive();
      break;
    case dpdt::GeneratorKind::top_b:
      c.generator = dpdt::GeneratorSpec::top_b(budgets_for(budgets, o.depth), impurity);
      break;
    case dpdt::GeneratorKind::cart_call:
      c.generator = dpdt::GeneratorSpec::cart_call(budgets_for(budgets, o.depth), impurity);
      break;
  }
  c.validate();
  return c;
}

dpdt::GreedyConfig greedy_config(const FitOptions& o) {
  dpdt::GreedyConfig g;
  g.max_depth = o.depth;
  g.impurity = dpdt::impurity_from_string(o.impurity);
  return g;
}

json config_json(const dpdt::DpdtConfig& c) {
  json j{{"algo", "dpdt"},
         {"depth", c.max_depth},
         {"alpha", c.alpha},
         {"generator", dpdt::to_string(c.generator.kind)},
         {"tie_break", dpdt::to_string(c.tie_break)}};
  if (c.generator.kind != dpdt::GeneratorKind::exhaustive) {
    j["budgets"] = c.generator.budgets;
    j["impurity"] = dpdt::to_string(c.generator.impurity);
  }
  return j;
}

json config_json(const dpdt::GreedyConfig& g, double alpha) {
  return {{"algo", "cart"}, {"depth", g.max_depth}, {"alpha", alpha}, {"impurity", dpdt::to_string(g.impurity)}};
}

dpdt::Dataset load(const DataOptions& o, const std::string& path) {
  dpdt::CsvOptions csv{o.delimiter, o.header};
  return dpdt::load_csv(path, dpdt::LabelColumn{o.label}, csv);
}

/// The result of fitting one model, in report form.
struct Fitted {
  dpdt::Tree tree;
  json config;
  dpdt::OpsCounter ops;
  double seconds = 0.0;
};

Fitted fit_one(const dpdt::Dataset& train, const std::string& algo, const FitOptions& o, const std::string& budgets) {
  Fitted f;
  auto start = std::chrono::steady_clock::now();
  if (algo == "cart") {
    auto g = greedy_config(o);
    dpdt::GreedyFit fit = dpdt::fit_greedy_traced(dpdt::SampleView(train), g);
    f.tree = fit.tree;
    f.ops.add_candidates(fit.expansion_order.size());
    f.ops.add_states(fit.nodes_evaluated);
    f.config = config_json(g, o.alpha);
  } else {
    auto c = dpdt_config(o, budgets);
    if (c.generator.kind == dpdt::GeneratorKind::exhaustive && train.size() > 10000)
      std::cerr << "warning: the exhaustive generator is exponential in depth; " << train.size()
                << " samples at depth " << c.max_depth << " may take very long\n";
    dpdt::DpdtResult r = dpdt::fit_dpdt(dpdt::SampleView(train), c);
    f.tree = r.tree;
    f.ops = r.ops;
    f.config = config_json(c);
  }
  f.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return f;
}

json run_report(const Fitted& f, const dpdt::Dataset& train, const dpdt::Dataset* test, double alpha,
                std::uint64_t seed) {
  dpdt::SampleView view(train);
  json r{{"algorithm", f.config["algo"]},
         {"config", f.config},
         {"n", train.size()},
         {"p", train.feature_count()},
         {"k", train.class_count()},
         {"train_accuracy", dpdt::accuracy(f.tree, view)},
         {"test_accuracy", nullptr},
         {"regularized_loss", dpdt::regularized_loss(f.tree, view, alpha)},
         {"expected_splits", dpdt::expected_splits(f.tree, view)},
         {"internal_nodes", f.tree.internal_count()},
         {"depth", f.tree.depth()},
         {"ops", {{"candidate_splits", f.ops.candidate_splits_generated()}, {"states_expanded", f.ops.states_expanded()}}},
         {"seconds", f.seconds},
         {"seed", seed}};
  if (test) r["test_accuracy"] = dpdt::accuracy(f.tree, *test);
  return r;
}

void check_schema(const dpdt::Dataset& train, const dpdt::Dataset& test) {
  if (test.feature_count() != train.feature_count())
    throw dpdt::DataError("test file has " + std::to_string(test.feature_count()) + " features, training file has " +
                          std::to_string(train.feature_count()));
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path);
}

int cmd_train(const DataOptions& d, const FitOptions& o, const std::string& out) {
  dpdt::Dataset train = load(d, d.data);
  std::optional<dpdt::Dataset> test;
  if (!d.test.empty()) {
    test = load(d, d.test);
    check_schema(train, *test);
  }
  std::string budgets = o.budgets.empty() ? "" : o.budgets.front();
  Fitted f = fit_one(train, o.algo, o, budgets);
  json report = run_report(f, train, test ? &*test : nullptr, o.alpha, o.seed);
  if (!out.empty()) {
    dpdt::ModelDocument doc{f.tree, train.feature_names(), f.config};
    write_file(out, doc.dump() + "\n");
    report["model"] = out;
  }
  std::cout << report.dump(2) << "\n";
  return 0;
}

std::string fmt(double v, int precision) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

int cmd_compare(const DataOptions& d, const FitOptions& o, bool with_exhaustive, const std::string& out) {
  dpdt::Dataset train = load(d, d.data);
  std::optional<dpdt::Dataset> test;
  if (!d.test.empty()) {
    test = load(d, d.test);
    check_schema(train, *test);
  }
  struct Row {
    std::string name;
    std::string algo;
    FitOptions options;
    std::string budgets;
  };
  std::vector<Row> rows{{"cart", "cart", o, ""}};
  std::vector<std::string> budget_lists = o.budgets.empty() ? std::vector<std::string>{""} : o.budgets;
  for (const auto& b : budget_lists) {
    FitOptions dp = o;
    dp.generator = "cart_call";
    rows.push_back({"dpdt(" + dpdt::format_budgets(budgets_for(b, o.depth)) + ")", "dpdt", dp, b});
  }
  if (with_exhaustive) {
    FitOptions ex = o;
    ex.generator = "exhaustive";
    rows.push_back({"exhaustive", "dpdt", ex, ""});
  }

  json reports = json::array();
  std::cout << std::left << std::setw(24) << "algorithm" << std::right << std::setw(10) << "train_acc" << std::setw(10)
            << "test_acc" << std::setw(12) << "loss" << std::setw(10) << "exp_spl" << std::setw(8) << "nodes"
            << std::setw(12) << "ops" << std::setw(10) << "seconds" << "\n";
  std::optional<double> greedy_loss;
  bool never_worse = true;
  for (const Row& row : rows) {
    json report;
    try {
      Fitted f = fit_one(train, row.algo, row.options, row.budgets);
      report = run_report(f, train, test ? &*test : nullptr, o.alpha, o.seed);
    } catch (const std::exception& e) {
      std::cout << std::left << std::setw(24) << row.name << " failed: " << e.what() << "\n";
      reports.push_back({{"algorithm", row.name}, {"error", e.what()}});
      continue;
    }
    report["name"] = row.name;
    double loss = report["regularized_loss"].get<double>();
    if (row.algo == "cart") greedy_loss = loss;
    if (row.algo == "dpdt" && row.options.generator == "cart_call" && greedy_loss && loss > *greedy_loss + 1e-12)
      never_worse = false;
    std::cout << std::left << std::setw(24) << row.name << std::right << std::setw(10)
              << fmt(report["train_accuracy"].get<double>(), 4) << std::setw(10)
              << (test ? fmt(report["test_accuracy"].get<double>(), 4) : std::string("-")) << std::setw(12)
              << fmt(loss, 6) << std::setw(10) << fmt(report["expected_splits"].get<double>(), 3) << std::setw(8)
              << report["internal_nodes"].get<std::size_t>() << std::setw(12)
              << report["ops"]["candidate_splits"].get<std::uint64_t>() << std::setw(10)
              << fmt(report["seconds"].get<double>(), 3) << "\n";
    reports.push_back(report);
  }
  if (greedy_loss)
    std::cout << "never-worse-than-greedy: " << (never_worse ? "holds" : "VIOLATED") << "\n";
  if (!out.empty()) write_file(out, json{{"reports", reports}, {"never_worse_than_greedy", never_worse}}.dump(2) + "\n");
  return 0;
}

json tree_summary(const dpdt::Tree& t, const dpdt::Dataset& d, const dpdt::OpsCounter& ops, const json& config) {
  dpdt::SampleView v(d);
  return {{"config", config},
          {"accuracy", dpdt::accuracy(t, v)},
          {"expected_splits", dpdt::expected_splits(t, v)},
          {"internal_nodes", t.internal_count()},
          {"ops", {{"candidate_splits", ops.candidate_splits_generated()}, {"states_expanded", ops.states_expanded()}}},
          {"tree", dpdt::to_json(t)},
          {"text", dpdt::describe(t, d.feature_names())}};
}

int cmd_xor_demo(std::size_t samples, const FitOptions& o, std::size_t grid, const std::string& out) {
  dpdt::Dataset d = dpdt::generate_xor(samples, o.seed);
  Fitted greedy = fit_one(d, "cart", o, "");
  std::string budgets = o.budgets.empty() ? "2" : o.budgets.front();
  Fitted dp = fit_one(d, "dpdt", o, budgets);
  json report{{"samples", samples},
              {"seed", o.seed},
              {"depth", o.depth},
              {"greedy", tree_summary(greedy.tree, d, greedy.ops, greedy.config)},
              {"dpdt", tree_summary(dp.tree, d, dp.ops, dp.config)}};
  if (grid > 0) {
    std::string path = out.empty() ? "xor_grid.csv" : out;
    std::ostringstream csv;
    csv.precision(17);
    csv << "x,y,greedy,dpdt\n";
    for (std::size_t i = 0; i < grid; ++i)
      for (std::size_t j = 0; j < grid; ++j) {
        std::vector<double> x{(static_cast<double>(i) + 0.5) / static_cast<double>(grid),
                              (static_cast<double>(j) + 0.5) / static_cast<double>(grid)};
        csv << x[0] << ',' << x[1] << ',' << dpdt::predict(greedy.tree, x) << ',' << dpdt::predict(dp.tree, x) << '\n';
      }
    write_file(path, csv.str());
    report["grid"] = {{"path", path}, {"rows", grid * grid}};
  }
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_boost(const DataOptions& d, const FitOptions& o, const std::string& weak, std::size_t rounds, double lr,
              const std::string& out) {
  dpdt::Dataset train = load(d, d.data);
  std::optional<dpdt::Dataset> test;
  if (!d.test.empty()) {
    test = load(d, d.test);
    check_schema(train, *test);
  }
  dpdt::WeakLearner learner;
  json weak_config;
  std::string budgets = o.budgets.empty() ? "" : o.budgets.front();
  if (weak == "dpdt") {
    auto c = dpdt_config(o, budgets.empty() ? "2" : budgets);
    weak_config = config_json(c);
    learner = c;
  } else {
    auto g = greedy_config(o);
    weak_config = config_json(g, o.alpha);
    learner = g;
  }
  auto start = std::chrono::steady_clock::now();
  dpdt::BoostResult r = dpdt::fit_adaboost(train, learner, rounds, lr);
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.ensemble.weak_config = weak_config;

  dpdt::OpsCounter single_ops;
  double single = dpdt::accuracy(dpdt::fit_weak(learner, dpdt::SampleView(train), single_ops), train);
  json per_round = json::array();
  for (const auto& round : r.rounds)
    per_round.push_back({{"round", round.round},
                         {"weighted_error", round.weighted_error},
                         {"beta", round.beta},
                         {"retained", round.retained}});
  json report{{"algorithm", "adaboost"},
              {"weak", weak},
              {"config", weak_config},
              {"learning_rate", lr},
              {"rounds_requested", rounds},
              {"rounds_completed", r.rounds_completed()},
              {"stop", dpdt::to_string(r.stop)},
              {"rounds", per_round},
              {"train_accuracy", dpdt::ensemble_accuracy(r.ensemble, train)},
              {"single_tree_train_accuracy", single},
              {"test_accuracy", nullptr},
              {"ops", {{"candidate_splits", r.ops.candidate_splits_generated()}, {"states_expanded", r.ops.states_expanded()}}},
              {"seconds", seconds},
              {"seed", o.seed}};
  if (test) report["test_accuracy"] = dpdt::ensemble_accuracy(r.ensemble, *test);
  if (!out.empty()) {
    write_file(out, r.ensemble.dump() + "\n");
    report["model"] = out;
  }
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_generate(const std::string& kind, std::size_t samples, int cells, std::uint64_t seed, const std::string& out) {
  dpdt::Dataset d = kind == "xor" ? dpdt::generate_xor(samples, seed) : dpdt::generate_checkerboard(samples, cells, seed);
  if (out.empty())
    std::cout << d.to_csv();
  else
    write_file(out, d.to_csv());
  return 0;
}

int cmd_evaluate(const DataOptions& d, const std::string& model_path) {
  std::ifstream in(model_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + model_path);
  std::stringstream text;
  text << in.rdbuf();
  json doc;
  try {
    doc = json::parse(text.str());
  } catch (const json::parse_error& e) {
    throw dpdt::FormatError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  dpdt::Dataset data = load(d, d.data);
  json report{{"model", model_path}, {"n", data.size()}};
  if (doc.contains("members")) {
    auto e = dpdt::Ensemble::from_json(doc);
    report["accuracy"] = dpdt::ensemble_accuracy(e, data);
  } else {
    auto m = dpdt::ModelDocument::from_json(doc);
    if (m.tree.feature_count() != data.feature_count())
      throw dpdt::DataError("model expects " + std::to_string(m.tree.feature_count()) + " features, data has " +
                            std::to_string(data.feature_count()));
    report["accuracy"] = dpdt::accuracy(m.tree, data);
  }
  std::cout << report.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic-programming decision trees"};
  app.require_subcommand(1);

  DataOptions data;
  FitOptions fit;
  std::string out;

  auto* train = app.add_subcommand("train", "Fit one tree and write a model file");
  add_data_options(train, data);
  add_fit_options(train, fit);
  train->add_option("--out", out, "Model output path");

  bool with_exhaustive = false;
  auto* compare = app.add_subcommand("compare", "Compare greedy, DPDT and optionally exhaustive trees");
  add_data_options(compare, data);
  add_fit_options(compare, fit, false);
  compare->add_flag("--exhaustive", with_exhaustive, "Also run the exhaustive generator");
  compare->add_option("--out", out, "Write the JSON reports here");

  std::size_t samples = 10000, grid = 0;
  FitOptions xor_fit;
  xor_fit.depth = 2;
  xor_fit.seed = 15;
  auto* xor_demo = app.add_subcommand("xor-demo", "Greedy vs DPDT on the XOR dataset");
  xor_demo->alias("xor_demo");
  add_fit_options(xor_demo, xor_fit, false);
  xor_demo->add_option("--samples", samples, "Number of XOR samples")->capture_default_str();
  xor_demo->add_option("--grid", grid, "Dump a grid x grid table of predictions");
  xor_demo->add_option("--out", out, "Grid CSV path (default xor_grid.csv)");

  std::string weak = "dpdt";
  std::size_t rounds = 50;
  double lr = 1.0;
  FitOptions boost_fit;
  boost_fit.depth = 2;
  auto* boost = app.add_subcommand("boost", "AdaBoost (SAMME) over DPDT or greedy trees");
  add_data_options(boost, data);
  add_fit_options(boost, boost_fit, false);
  boost->add_option("--weak", weak, "Weak learner")->check(CLI::IsMember({"dpdt", "cart"}))->capture_default_str();
  boost->add_option("--rounds", rounds, "Boosting rounds")->check(CLI::PositiveNumber)->capture_default_str();
  boost->add_option("--learning-rate", lr, "Shrinkage on stage weights, in (0, 1]")->capture_default_str();
  boost->add_option("--out", out, "Ensemble output path");

  std::string kind = "xor";
  int cells = 3;
  std::uint64_t gen_seed = 0;
  std::size_t gen_samples = 10000;
  auto* generate = app.add_subcommand("generate", "Write a synthetic XOR or checkerboard CSV");
  generate->add_option("--kind", kind, "Dataset kind")->check(CLI::IsMember({"xor", "checkerboard"}))->capture_default_str();
  generate->add_option("--samples", gen_samples, "Number of samples")->capture_default_str();
  generate->add_option("--cells", cells, "Checkerboard cells per axis")->capture_default_str();
  generate->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
  generate->add_option("--out", out, "CSV output path (stdout when omitted)");

  std::string model;
  auto* evaluate = app.add_subcommand("evaluate", "Accuracy of a saved model or ensemble on a CSV file");
  add_data_options(evaluate, data);
  evaluate->add_option("--model", model, "Model or ensemble file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(data, fit, out);
    if (*compare) return cmd_compare(data, fit, with_exhaustive, out);
    if (*xor_demo) return cmd_xor_demo(samples, xor_fit, grid, out);
    if (*boost) return cmd_boost(data, boost_fit, weak, rounds, lr, out);
    if (*generate) return cmd_generate(kind, gen_samples, cells, gen_seed, out);
    if (*evaluate) return cmd_evaluate(data, model);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
