#include "automsc/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <thread>

#include <CLI11.hpp>

#include "automsc/corpus.hpp"
#include "automsc/error.hpp"
#include "automsc/evaluation.hpp"
#include "automsc/io.hpp"
#include "automsc/log.hpp"
#include "automsc/service.hpp"

namespace automsc::cli {

namespace fs = std::filesystem;

namespace {

std::vector<ArticleRecord> load_corpus(const RunConfig& c) {
  if (c.corpus.empty()) throw Error(ErrorKind::Usage, "--corpus is required");
  auto in = open_input(c.corpus, std::ios::binary);
  return read_articles(in, ReadOptions{c.strict});
}

std::vector<PredictionRecord> load_predictions(const RunConfig& c) {
  if (c.predictions.empty()) throw Error(ErrorKind::Usage, "--predictions is required");
  std::vector<PredictionRecord> all;
  for (const auto& path : c.predictions) {
    auto in = open_input(path, std::ios::binary);
    auto preds = read_predictions(in);
    all.insert(all.end(), std::make_move_iterator(preds.begin()), std::make_move_iterator(preds.end()));
  }
  return all;
}

MethodVariant require_variant(const std::string& id) {
  const auto v = find_variant(id);
  if (!v) throw Error(ErrorKind::Usage, "unknown variant '" + id + "'");
  return *v;
}

fs::path require_out(const RunConfig& c) {
  if (c.out.empty()) throw Error(ErrorKind::Usage, "--out is required");
  return c.out;
}

/// Method ids are space padded; file names use the trimmed form.
std::string file_stem(const std::string& method) {
  std::string s = method;
  while (!s.empty() && s.back() == ' ') s.pop_back();
  for (auto& ch : s) {
    if (ch == '/' || ch == '\\' || ch == ' ') ch = '_';
  }
  return s.empty() ? "method" : s;
}

const char* status_text(LbfgsStatus s) {
  switch (s) {
    case LbfgsStatus::Converged: return "converged";
    case LbfgsStatus::MaxIterations: return "iteration budget reached";
    case LbfgsStatus::LineSearchFailed: return "line search failed";
    case LbfgsStatus::NonFinite: return "non-finite";
  }
  return "unknown";
}

std::map<std::string, std::vector<PredictionRecord>> by_method(std::vector<PredictionRecord> preds) {
  std::map<std::string, std::vector<PredictionRecord>> groups;
  for (auto& p : preds) {
    if (p.pos != 1) continue;
    groups[p.method].push_back(std::move(p));
  }
  return groups;
}

/// True if every prediction carries a score; false if none does. A mix is
/// an error because curves over a subset would be misleading.
bool all_scored(const std::vector<PredictionRecord>& preds) {
  std::size_t scored = 0;
  for (const auto& p : preds) scored += p.score ? 1 : 0;
  if (scored == 0) return false;
  if (scored != preds.size()) {
    for (const auto& p : preds) {
      if (!p.score) {
        throw Error(ErrorKind::MissingScore, "prediction for document " + format_de(p.de) +
                                                 " (method '" + p.method + "') has no score");
      }
    }
  }
  return true;
}

}  // namespace

void cmd_train(const RunConfig& c, std::ostream& out) {
  const auto variant = require_variant(c.variant);
  const fs::path model_path = c.model;
  if (model_path.empty()) throw Error(ErrorKind::Usage, "--model is required");
  c.hyperparams.validate();
  const auto articles = load_corpus(c);

  TrainedModel m = fit_model(articles, variant, c.hyperparams, Preprocessing{c.strip_math},
                             VocabularyOptions{c.min_df});
  if (!c.method_id.empty()) m.method_id = pad_method_id(c.method_id);
  save_model(m, model_path.string());

  out << "trained " << m.method_id << " on " << m.training_size << " articles\n"
      << "classes: " << m.classes.size() << '\n'
      << "vocabulary: " << m.vocabulary.size() << '\n'
      << "iterations: " << m.summary.iterations << '\n'
      << "status: " << status_text(m.summary.status) << '\n'
      << "final loss: " << m.summary.final_loss << '\n'
      << "final gradient max-norm: " << m.summary.gradient_max_norm << '\n'
      << "model: " << model_path.string() << '\n';
}

void cmd_predict(const RunConfig& c, std::ostream& out) {
  const fs::path out_path = require_out(c);
  const bool baseline = c.variant == "ref1" || c.variant == kRef1MethodId;

  std::optional<TrainedModel> model;
  if (!baseline) {
    if (c.model.empty()) throw Error(ErrorKind::Usage, "--model is required (or --variant ref1)");
    model = load_model(c.model.string());
  }
  const auto articles = load_corpus(c);

  std::vector<PredictionRecord> preds;
  preds.reserve(articles.size());
  std::size_t without_refs = 0;
  for (const auto& a : articles) {
    if (baseline) {
      try {
        preds.push_back(ref1_vote(a));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoReferences) throw;
        ++without_refs;
      }
    } else {
      preds.push_back(predict(*model, a));
    }
  }
  if (!c.method_id.empty()) {
    const std::string id = pad_method_id(c.method_id);
    for (auto& p : preds) p.method = id;
  }

  AtomicFile file(out_path, std::ios::binary);
  write_predictions(preds, file.stream());
  file.commit();
  if (without_refs > 0) {
    spdlog::warn("{} article(s) have no reference codes; no ref1 prediction written", without_refs);
  }
  out << "wrote " << preds.size() << " prediction(s) to " << out_path.string() << '\n';
  if (baseline) out << "articles without references: " << without_refs << '\n';
}

void cmd_evaluate(const RunConfig& c, std::ostream& out) {
  const fs::path dir = require_out(c);
  const auto articles = load_corpus(c);
  const TruthMap truth = truth_map(articles);
  const auto groups = by_method(load_predictions(c));
  if (groups.empty()) throw Error(ErrorKind::Usage, "no predictions to evaluate");

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create '" + dir.string() + "': " + ec.message());

  OutputSet outputs;
  std::ostream& summary = outputs.open(dir / "summary.csv");
  summary << "method,p,r,f,n,k_effective,H,H_normalized,unpredicted\n";
  char line[256];

  for (const auto& [method, preds] : groups) {
    std::vector<Subject> t, p;
    t.reserve(preds.size());
    p.reserve(preds.size());
    for (const auto& pr : preds) {
      const auto it = truth.find(pr.de);
      if (it == truth.end()) {
        throw Error(ErrorKind::UnknownDe, "method '" + method + "' predicts unknown document " +
                                              format_de(pr.de));
      }
      t.push_back(it->second);
      p.push_back(pr.coarse);
    }
    const EvalReport report = evaluate(t, p, c.min_class_size);
    const auto unpredicted = static_cast<long long>(truth.size() - preds.size());
    std::snprintf(line, sizeof line, "%s,%.6f,%.6f,%.6f,%lld,%d,%.6f,%.6f,%lld\n", method.c_str(),
                  report.weighted.precision, report.weighted.recall, report.weighted.f1,
                  static_cast<long long>(report.n_evaluated), report.entropy.k_effective,
                  report.entropy.h, report.entropy.normalized, unpredicted);
    summary << line;

    const std::string stem = file_stem(method);
    write_class_report(outputs.open(dir / ("report_" + stem + ".csv")), method, report);
    write_confusion_csv(outputs.open(dir / ("confusion_" + stem + ".csv")), report.confusion);
    if (all_scored(preds)) {
      write_pr_csv(outputs.open(dir / ("pr_" + stem + ".csv")), pr_curve(preds, truth));
      write_threshold_csv(outputs.open(dir / ("threshold_" + stem + ".csv")), method,
                          threshold_sweep(preds, truth, c.threshold));
    }

    std::snprintf(line, sizeof line, "%-6s p=%.3f r=%.3f f=%.3f n=%lld k=%d\n", method.c_str(),
                  report.weighted.precision, report.weighted.recall, report.weighted.f1,
                  static_cast<long long>(report.n_evaluated), report.entropy.k_effective);
    out << line;
  }
  outputs.commit();
}

void cmd_crossval(const RunConfig& c, std::ostream& out) {
  if (c.folds < 2) throw Error(ErrorKind::Usage, "--folds must be at least 2");
  const auto variant = require_variant(c.variant);
  c.hyperparams.validate();
  const fs::path out_path = require_out(c);
  const auto articles = load_corpus(c);

  CrossValidationOptions options;
  options.folds = c.folds;
  options.seed = c.seed;
  options.min_class_size = c.min_class_size;
  options.preprocessing.strip_math = c.strip_math;
  options.vocabulary.min_df = c.min_df;
  const auto result = kfold_cv(articles, variant, c.hyperparams, options);

  AtomicFile file(out_path);
  auto& os = file.stream();
  char line[128];
  os << "# variant=" << variant.id << " folds=" << c.folds << " seed=" << c.seed
     << " min_class_size=" << c.min_class_size << '\n'
     << "fold,f\n";
  for (std::size_t i = 0; i < result.fold_f1.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.6f\n", i + 1, result.fold_f1[i]);
    os << line;
  }
  std::snprintf(line, sizeof line, "mean,%.6f\nstd_population,%.6f\n", result.mean_f1, result.std_f1);
  os << line;
  file.commit();

  std::snprintf(line, sizeof line, "%d-fold cross-validation (seed %llu): f = %.4f +- %.4f\n", c.folds,
                static_cast<unsigned long long>(c.seed), result.mean_f1, result.std_f1);
  out << line;
}

void cmd_sweep(const RunConfig& c, std::ostream& out) {
  const fs::path out_path = require_out(c);
  const auto articles = load_corpus(c);
  const TruthMap truth = truth_map(articles);
  const auto groups = by_method(load_predictions(c));
  if (groups.empty()) throw Error(ErrorKind::Usage, "prediction file is empty");

  AtomicFile file(out_path);
  bool header = true;
  for (const auto& [method, preds] : groups) {
    const auto rows = threshold_sweep(preds, truth, c.threshold);
    write_threshold_csv(file.stream(), method, rows, header);
    header = false;
    const auto at = threshold_analysis(preds, truth, c.threshold);
    char line[160];
    std::snprintf(line, sizeof line, "%-6s t=%.2f automation=%.4f precision=%.4f (%lld/%lld)\n",
                  method.c_str(), at.threshold, at.automation_rate, at.precision_automated,
                  static_cast<long long>(at.n_automated), static_cast<long long>(at.n_total));
    out << line;
  }
  file.commit();
}

namespace {
std::atomic<bool> g_stop_requested{false};
extern "C" void on_terminate_signal(int) { g_stop_requested = true; }
}  // namespace

void cmd_serve(const RunConfig& c, std::ostream& out) {
  fs::path model_path = c.model;
  if (model_path.empty()) {
    if (const char* env = std::getenv("AUTOMSC_MODEL"); env != nullptr && *env != '\0') model_path = env;
  }
  if (model_path.empty()) throw Error(ErrorKind::Usage, "--model or AUTOMSC_MODEL is required");

  Service service(ServiceOptions{c.assets, c.dev});
  const int port = service.bind(c.host, c.port);
  out << "listening on " << c.host << ":" << port << std::endl;

  g_stop_requested = false;
  std::signal(SIGINT, on_terminate_signal);
  std::signal(SIGTERM, on_terminate_signal);

  std::thread server([&service] { service.listen(); });
  std::thread watcher([&service] {
    while (!g_stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    spdlog::info("shutting down");
    service.stop();
  });

  try {
    auto model = std::make_shared<const TrainedModel>(load_model(model_path.string()));
    spdlog::info("loaded model {} ({} classes, {} terms)", model->method_id, model->classes.size(),
                 model->vocabulary.size());
    service.set_model(std::move(model));
  } catch (...) {
    g_stop_requested = true;
    watcher.join();
    server.join();
    throw;
  }
  watcher.join();
  server.join();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  init_logging();

  CLI::App app{"Primary MSC subject classification: train, predict, evaluate, serve"};
  app.require_subcommand(1);
  RunConfig c;
  std::vector<std::string> prediction_paths;

  auto add_hyper = [&c](CLI::App* sub) {
    sub->add_option("--tolerance", c.hyperparams.tolerance, "Gradient max-norm stopping tolerance")
        ->capture_default_str();
    sub->add_option("--reg-c", c.hyperparams.regularization_c, "Inverse L2 regularization strength C")
        ->capture_default_str();
    sub->add_option("--max-iter", c.hyperparams.max_iterations, "L-BFGS iteration budget")
        ->capture_default_str();
    sub->add_option("--min-df", c.min_df, "Minimum document frequency for vocabulary terms")
        ->capture_default_str();
    sub->add_flag("--strip-math", c.strip_math, "Remove TeX math from title and abstract");
  };
  auto add_corpus = [&c](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--corpus", c.corpus, "Article CSV (de,labels,title,text,mscs)");
    if (required) opt->required();
    sub->add_flag("--strict", c.strict, "Reject records with malformed reference codes");
  };

  auto* train = app.add_subcommand("train", "Fit vocabulary and classifier, save a model");
  add_corpus(train, true);
  train->add_option("--model", c.model, "Output model path")->required();
  train->add_option("--variant", c.variant, "titer, refs, titls, texts, tite, tiref or teref")
      ->capture_default_str();
  train->add_option("--method", c.method_id, "Run id written into predictions (default: variant)");
  add_hyper(train);

  auto* predict_cmd = app.add_subcommand("predict", "Write a prediction CSV for a corpus");
  add_corpus(predict_cmd, true);
  predict_cmd->add_option("--model", c.model, "Model file");
  predict_cmd->add_option("--variant", c.variant, "Set to ref1 for the reference-majority baseline");
  predict_cmd->add_option("--method", c.method_id, "Override the run id");
  predict_cmd->add_option("--out", c.out, "Output prediction CSV")->required();

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score prediction CSVs against a corpus");
  add_corpus(evaluate_cmd, true);
  evaluate_cmd->add_option("--predictions", prediction_paths, "Prediction CSV(s)")->required();
  evaluate_cmd->add_option("--out", c.out, "Report directory")->required();
  evaluate_cmd->add_option("--min-class-size", c.min_class_size, "Minimum evaluation class size")
      ->capture_default_str();
  evaluate_cmd->add_option("--threshold", c.threshold, "Extra automation threshold in sweeps")
      ->capture_default_str();

  auto* crossval = app.add_subcommand("crossval", "Stratified k-fold cross-validation");
  add_corpus(crossval, true);
  crossval->add_option("--variant", c.variant, "Method variant")->capture_default_str();
  crossval->add_option("--folds", c.folds, "Number of folds")->capture_default_str();
  crossval->add_option("--seed", c.seed, "Fold assignment seed")->capture_default_str();
  crossval->add_option("--min-class-size", c.min_class_size, "Minimum evaluation class size")
      ->capture_default_str();
  crossval->add_option("--out", c.out, "Report CSV")->required();
  add_hyper(crossval);

  auto* sweep = app.add_subcommand("sweep", "Automation rate and precision over score thresholds");
  add_corpus(sweep, true);
  sweep->add_option("--predictions", prediction_paths, "Prediction CSV(s)")->required();
  sweep->add_option("--out", c.out, "Sweep CSV")->required();
  sweep->add_option("--threshold", c.threshold, "Threshold added to the 0.05 grid")->capture_default_str();

  auto* serve = app.add_subcommand("serve", "Run the classification HTTP service");
  serve->add_option("--model", c.model, "Model file (falls back to AUTOMSC_MODEL)");
  serve->add_option("--port", c.port, "TCP port")->capture_default_str();
  serve->add_option("--host", c.host, "Bind address")->capture_default_str();
  serve->add_option("--assets", c.assets, "Directory with the web UI bundle");
  serve->add_flag("--dev", c.dev, "Disable asset caching");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorFamily::Usage);
  }
  for (const auto& p : prediction_paths) c.predictions.emplace_back(p);

  try {
    if (train->parsed()) {
      cmd_train(c, out);
    } else if (predict_cmd->parsed()) {
      cmd_predict(c, out);
    } else if (evaluate_cmd->parsed()) {
      cmd_evaluate(c, out);
    } else if (crossval->parsed()) {
      cmd_crossval(c, out);
    } else if (sweep->parsed()) {
      cmd_sweep(c, out);
    } else if (serve->parsed()) {
      cmd_serve(c, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.family());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace automsc::cli
