#include <cstdio>
#include <exception>
#include <functional>

#include "CLI11.hpp"
#include "commands.hpp"
#include "mappfn/common.hpp"

int main(int argc, char** argv) {
  using namespace mappfn::cli;
  CLI::App app{"mappfn: synthetic perturbation priors, in-context flow-matching model and evaluation"};
  app.set_config("--config", "", "Key-value config file");
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Base random seed")->capture_default_str();
  app.add_option("--out", global.out, "Output directory (or checkpoint path for train)");
  app.add_option("--workers", global.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  std::function<int()> run;

  GenScmOptions scm;
  auto* gen_scm_cmd = app.add_subcommand("gen-scm", "Sample linear-Gaussian SCMs with every single-node intervention");
  gen_scm_cmd->add_option("--profile", scm.profile, "toy (200 x 6 nodes x 100) or paper (1000 x 20 x 500)")
      ->check(CLI::IsMember({"toy", "paper"}))->capture_default_str();
  gen_scm_cmd->add_option("--dags", scm.dags, "Number of DAGs (overrides profile)")->check(CLI::PositiveNumber);
  gen_scm_cmd->add_option("--nodes", scm.nodes, "Nodes per DAG (overrides profile)")->check(CLI::PositiveNumber);
  gen_scm_cmd->add_option("--samples", scm.samples, "Samples per batch (overrides profile)")->check(CLI::PositiveNumber);
  gen_scm_cmd->add_option("--edge-prob", scm.edge_prob, "Edge probability")->capture_default_str();
  gen_scm_cmd->add_option("--paired", scm.paired, "Share exogenous noise across batches")->capture_default_str();
  gen_scm_cmd->callback([&] { run = [&] { return gen_scm(global, scm); }; });

  GenGrnOptions grn;
  auto* gen_grn_cmd = app.add_subcommand("gen-grn", "Simulate gene regulatory networks with every single-gene knockout");
  gen_grn_cmd->add_option("--grns", grn.grns, "Number of networks")->capture_default_str();
  gen_grn_cmd->add_option("--genes", grn.genes, "Genes per network")->capture_default_str();
  gen_grn_cmd->add_option("--cells", grn.cells, "Cells per batch")->capture_default_str();
  gen_grn_cmd->add_option("--paired", grn.paired, "Reuse the simulator seed across knockouts")->capture_default_str();
  gen_grn_cmd->add_option("--preprocess", grn.preprocess, "Median-count normalization and log2(1 + x)")
      ->capture_default_str();
  gen_grn_cmd->add_option("--burn-in", grn.burn_in, "Langevin steps per cell")->capture_default_str();
  gen_grn_cmd->callback([&] { run = [&] { return gen_grn(global, grn); }; });

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "Pretrain the model on a prior");
  train_cmd->add_option("--prior", tr.prior, "scm or grn")->check(CLI::IsMember({"scm", "grn"}))->capture_default_str();
  train_cmd->add_option("--data", tr.data, "Dataset directory; generated from the prior when absent");
  train_cmd->add_option("--profile", tr.profile, "toy or paper")->check(CLI::IsMember({"toy", "paper"}))
      ->capture_default_str();
  train_cmd->add_option("--steps", tr.steps, "Optimizer steps")->capture_default_str();
  train_cmd->add_option("--context-size", tr.context_size, "Context experiments per bundle (K)")->capture_default_str();
  train_cmd->add_option("--variable-context", tr.variable_context, "Draw K uniformly from 0..context-size")
      ->capture_default_str();
  train_cmd->add_option("--paired", tr.paired, "Paired prior when generating data")->capture_default_str();
  train_cmd->add_option("--batch", tr.batch, "Bundles per step")->capture_default_str();
  train_cmd->add_option("--lr", tr.lr, "Peak learning rate")->capture_default_str();
  train_cmd->add_option("--cells", tr.cells, "Cells kept per batch (0 keeps all)")->capture_default_str();
  train_cmd->add_option("--exclude-context", tr.exclude_contexts, "Contexts withheld from training");
  train_cmd->add_option("--loss-csv", tr.loss_csv, "Loss trace path (default: <out>.loss.csv)");
  train_cmd->add_option("--dags", tr.dags, "Generated SCM count")->capture_default_str();
  train_cmd->add_option("--nodes", tr.nodes, "Generated SCM nodes")->capture_default_str();
  train_cmd->add_option("--samples", tr.samples, "Generated samples per batch")->capture_default_str();
  train_cmd->add_option("--grns", tr.grns, "Generated GRN count")->capture_default_str();
  train_cmd->add_option("--genes", tr.genes, "Generated GRN genes")->capture_default_str();
  train_cmd->callback([&] { run = [&] { return train(global, tr); }; });

  EvalOptions ev;
  auto add_eval_options = [&](CLI::App* cmd) {
    cmd->add_option("--checkpoint", ev.checkpoints, "Model checkpoint(s); one report row set per checkpoint");
    cmd->add_option("--data", ev.data, "Dataset directory")->required();
    cmd->add_option("--holdout", ev.holdout, "Holdout context ids (default: every context)");
    cmd->add_option("--mode", ev.mode, "few-shot or zero-shot")->capture_default_str();
    cmd->add_option("--m", ev.m, "Predicted samples per condition (0: half the condition)")->capture_default_str();
    cmd->add_option("--context-size", ev.context_size, "Context experiments (-1: all available)")
        ->capture_default_str();
    cmd->add_option("--context-from-test", ev.context_from_test, "Allow other test conditions as context")
        ->capture_default_str();
    cmd->add_option("--omega", ev.omega, "Guidance weight")->capture_default_str();
    cmd->add_option("--baselines", ev.baselines, "Include identity and observed baselines")->capture_default_str();
    cmd->add_option("--cells", ev.cells, "Conditioning cells per batch (0 keeps all)")->capture_default_str();
    cmd->add_option("--deg", ev.deg, "Compute the DEG AUPRC")->capture_default_str();
  };
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate checkpoints and baselines on held-out conditions");
  add_eval_options(eval_cmd);
  eval_cmd->callback([&] { run = [&] { return eval(global, ev); }; });
  auto* sweep_cmd = app.add_subcommand("sweep", "Re-evaluate over context sizes or guidance weights");
  add_eval_options(sweep_cmd);
  sweep_cmd->add_option("--axis", ev.axis, "context_size or guidance")
      ->check(CLI::IsMember({"context_size", "guidance"}))->capture_default_str();
  sweep_cmd->callback([&] { run = [&] { return sweep(global, ev); }; });

  IngestOptions in;
  auto* ingest_cmd = app.add_subcommand("ingest", "Normalize external counts into a dataset");
  ingest_cmd->add_option("--matrix", in.matrix, "Cells x genes counts (binary or CSV)")->required();
  ingest_cmd->add_option("--labels", in.labels, "CSV with cell_id,context,treatment")->required();
  ingest_cmd->add_option("--control", in.control, "Treatment label of control cells")->capture_default_str();
  ingest_cmd->callback([&] { run = [&] { return ingest(global, in); }; });

  ReportOptions rep;
  auto* report_cmd = app.add_subcommand("report", "Aggregate report CSVs into a JSON summary");
  report_cmd->add_option("inputs", rep.inputs, "Report CSV files")->required();
  report_cmd->callback([&] { run = [&] { return report(global, rep); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    return run();
  } catch (const mappfn::NumericalFailure& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const mappfn::InvalidArgument& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
