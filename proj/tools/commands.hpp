#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mappfn::cli {

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string out;
  int workers = 1;
};

struct GenScmOptions {
  std::string profile = "toy";
  int dags = -1;
  int nodes = -1;
  double edge_prob = 0.5;
  int samples = -1;
  bool paired = false;
};

struct GenGrnOptions {
  int grns = 100;
  int genes = 50;
  int cells = 200;
  bool paired = false;
  bool preprocess = true;
  int burn_in = 2000;
};

struct TrainOptions {
  std::string prior = "scm";
  std::string data;
  std::string profile = "toy";
  int steps = 2000;
  int context_size = 2;
  bool variable_context = false;
  bool paired = false;
  int batch = 8;
  double lr = 1e-4;
  int cells = 0;
  std::vector<int> exclude_contexts;
  std::string loss_csv;
  // Prior size when no dataset is given.
  int dags = 200;
  int nodes = 6;
  int samples = 100;
  int grns = 100;
  int genes = 20;
};

struct EvalOptions {
  std::vector<std::string> checkpoints;
  std::string data;
  std::vector<int> holdout;
  std::string mode = "few-shot";
  int m = 0;
  int context_size = -1;
  bool context_from_test = false;
  double omega = 2.0;
  bool baselines = true;
  int cells = 0;
  bool deg = true;
  std::string axis = "context_size";
};

struct IngestOptions {
  std::string matrix;
  std::string labels;
  std::string control = "control";
};

struct ReportOptions {
  std::vector<std::string> inputs;
};

int gen_scm(const GlobalOptions& g, const GenScmOptions& o);
int gen_grn(const GlobalOptions& g, const GenGrnOptions& o);
int train(const GlobalOptions& g, const TrainOptions& o);
int eval(const GlobalOptions& g, const EvalOptions& o);
int sweep(const GlobalOptions& g, const EvalOptions& o);
int ingest(const GlobalOptions& g, const IngestOptions& o);
int report(const GlobalOptions& g, const ReportOptions& o);

}  // namespace mappfn::cli
