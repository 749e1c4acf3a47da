#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "maga/errors.hpp"

int main(int argc, char** argv) {
  using namespace maga::cli;
  CLI::App app{"Mask-adaptive gated convolution depth completion"};
  app.require_subcommand(1);

  GenDataOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic corpus");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--count", gen.count, "Training samples")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--val-count", gen.val_count, "Validation samples (default count/5, at least 1)");
  gen_cmd->add_option("--protocol", gen.protocol, "Default protocol")->check(CLI::IsMember({"raw", "sparse"}));
  gen_cmd->add_option("--sparse-count", gen.sparse_count, "Pixels kept by the sparse protocol");
  gen_cmd->add_option("--size", gen.size, "Image extent (multiple of 8)");
  gen_cmd->add_option("--seed", gen.seed, "Corpus seed");

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "Train a model on a corpus");
  train_cmd->add_option("--corpus", tr.corpus, "Corpus directory")->required();
  train_cmd->add_option("--config", tr.config, "key=value config file");
  train_cmd->add_option("--out", tr.out, "Output directory for checkpoints and log")->required();
  train_cmd->add_option("--epochs", tr.epochs, "Override epochs");
  train_cmd->add_option("--batch-size", tr.batch_size, "Override batch size");
  train_cmd->add_option("--seed", tr.seed, "Override seed");
  train_cmd->add_option("--lr", tr.lr, "Override initial learning rate");
  train_cmd->add_option("--protocol", tr.protocol, "Override protocol")->check(CLI::IsMember({"raw", "sparse"}));

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--corpus", ev.corpus, "Corpus directory")->required();
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--split", ev.split, "train or val")->check(CLI::IsMember({"train", "val"}));
  eval_cmd->add_option("--protocol", ev.protocol, "Only this protocol")->check(CLI::IsMember({"raw", "sparse"}));
  eval_cmd->add_option("--baseline", ev.baseline, "Also report a baseline")
      ->check(CLI::IsMember({"mean-fill", "copy-input"}));

  CompleteOptions co;
  auto* complete_cmd = app.add_subcommand("complete", "Complete one depth map");
  complete_cmd->add_option("--color", co.color, "Colour PPM")->required();
  complete_cmd->add_option("--depth", co.depth, "Input depth PGM")->required();
  complete_cmd->add_option("--checkpoint", co.checkpoint, "Checkpoint file")->required();
  complete_cmd->add_option("--out", co.out, "Output depth PGM")->required();
  complete_cmd->add_option("--gt", co.gt, "Ground-truth depth PGM for metrics");

  std::string suite = "all";
  auto* verify_cmd = app.add_subcommand("verify", "Run verification suites");
  verify_cmd->add_option("--suite", suite, "grads, masks, oracles or all")
      ->check(CLI::IsMember({"grads", "masks", "oracles", "all"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen_cmd) return run_gen_data(gen, threads_from_env(), std::cout);
    if (*train_cmd) return run_train(tr, threads_from_env(), std::cout);
    if (*eval_cmd) return run_eval(ev, threads_from_env(), std::cout);
    if (*complete_cmd) return run_complete(co, std::cout);
    if (*verify_cmd) return run_verify(suite, std::cout);
  } catch (const maga::ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const maga::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
