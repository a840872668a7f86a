#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "automsc/classifier.hpp"
#include "automsc/features.hpp"

namespace automsc::cli {

enum class Command { Train, Predict, Evaluate, Crossval, Sweep, Serve };

struct RunConfig {
  Command command = Command::Train;
  std::filesystem::path corpus;
  std::filesystem::path model;
  std::vector<std::filesystem::path> predictions;
  std::filesystem::path out;
  std::filesystem::path assets;
  /// Variant id; "ref1" selects the reference-majority baseline in predict.
  std::string variant = "titer";
  std::string method_id;  // defaults to the variant id
  Hyperparams hyperparams;
  std::int64_t min_class_size = 200;
  std::int64_t min_df = 1;
  bool strip_math = false;
  bool strict = false;
  std::uint64_t seed = 0;
  int folds = 10;
  double threshold = 0.5;
  std::string host = "0.0.0.0";
  int port = 8000;
  bool dev = false;
};

void cmd_train(const RunConfig& config, std::ostream& out);
void cmd_predict(const RunConfig& config, std::ostream& out);
void cmd_evaluate(const RunConfig& config, std::ostream& out);
void cmd_crossval(const RunConfig& config, std::ostream& out);
void cmd_sweep(const RunConfig& config, std::ostream& out);
void cmd_serve(const RunConfig& config, std::ostream& out);

/// Parses arguments, runs the command and maps failures to exit codes:
/// 0 success, 1 unexpected, and the ErrorFamily values otherwise.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace automsc::cli
