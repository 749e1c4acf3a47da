#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <ostream>

#include "maga/checkpoint.hpp"
#include "maga/errors.hpp"
#include "maga/metrics.hpp"
#include "maga/netpbm.hpp"
#include "maga/network.hpp"
#include "maga/verify.hpp"

namespace maga::cli {

namespace fs = std::filesystem;

int run_gen_data(const GenDataOptions& o, std::size_t threads, std::ostream& out) {
  CorpusSpec spec;
  spec.out_dir = o.out;
  spec.train_count = o.count;
  spec.val_count = o.val_count.value_or(std::max<std::size_t>(1, o.count / 5));
  spec.size = o.size;
  spec.seed = o.seed;
  spec.protocol = parse_protocol(o.protocol);
  spec.sparse_count = o.sparse_count;
  if (spec.size == 0 || spec.size % 8 != 0) throw ArgumentError("--size must be a positive multiple of 8");
  if (spec.sparse_count > spec.size * spec.size) {
    throw ArgumentError("--sparse-count exceeds the " + std::to_string(spec.size * spec.size) + " pixels per image");
  }
  const auto rows = write_corpus(spec, threads);
  out << "manifest=" << (fs::path(o.out) / "manifest.tsv").string() << '\n'
      << "train=" << spec.train_count << '\n'
      << "val=" << spec.val_count << '\n'
      << "protocol=" << to_string(spec.protocol) << '\n'
      << "sparse_count=" << spec.sparse_count << '\n'
      << "size=" << spec.size << '\n'
      << "seed=" << spec.seed << '\n'
      << "files=" << rows.size() * 4 << '\n';
  return kExitOk;
}

int run_train(const TrainOptions& o, std::size_t threads, std::ostream& out) {
  TrainSettings s = o.config.empty() ? TrainSettings{} : load_settings_file(o.config);
  if (o.epochs) apply_setting(s, "epochs", std::to_string(*o.epochs));
  if (o.batch_size) apply_setting(s, "batch_size", std::to_string(*o.batch_size));
  if (o.seed) apply_setting(s, "seed", std::to_string(*o.seed));
  if (o.lr) {
    if (!(*o.lr > 0.0)) throw ConfigError("lr must be positive");
    s.train.lr = *o.lr;
  }
  if (o.protocol) apply_setting(s, "protocol", *o.protocol);
  s.train.out_dir = o.out;
  s.train.threads = threads;
  s.train.progress = &out;

  const auto train_set = s.protocol ? load_split(o.corpus, "train", *s.protocol) : load_split(o.corpus, "train");
  const auto val_set = s.protocol ? load_split(o.corpus, "val", *s.protocol) : load_split(o.corpus, "val");
  ModelConfig mc;
  mc.seed = s.train.seed;
  CompletionModel model(mc);
  const TrainResult r = train(model, train_set, val_set, s.train);
  const Evaluation final_eval = evaluate_model(model, val_set, threads);
  out << "best_epoch=" << r.best_epoch << '\n'
      << "log=" << (fs::path(o.out) / "train_log.tsv").string() << '\n'
      << "checkpoint=" << (fs::path(o.out) / "final.ckpt").string() << '\n'
      << final_eval.metrics.to_key_value();
  return kExitOk;
}

int run_eval(const EvalOptions& o, std::size_t threads, std::ostream& out) {
  std::vector<Protocol> protocols;
  if (o.protocol) {
    protocols.push_back(parse_protocol(*o.protocol));
  } else {
    protocols = {Protocol::raw, Protocol::sparse};
  }
  std::optional<Baseline> baseline;
  if (o.baseline) baseline = parse_baseline(*o.baseline);
  CompletionModel model;
  load_checkpoint(o.checkpoint, model.params());
  bool first = true;
  for (Protocol p : protocols) {
    const auto samples = load_split(o.corpus, o.split, p);
    if (!first) out << '\n';
    first = false;
    out << "split=" << o.split << '\n' << "protocol=" << to_string(p) << '\n' << "model=checkpoint\n";
    out << evaluate_model(model, samples, threads).metrics.to_key_value();
    if (baseline) {
      out << '\n' << "split=" << o.split << '\n' << "protocol=" << to_string(p) << '\n'
          << "model=" << *o.baseline << '\n' << evaluate_baseline(samples, *baseline).to_key_value();
    }
  }
  return kExitOk;
}

int run_complete(const CompleteOptions& o, std::ostream& out) {
  const Tensor color = read_color_ppm(o.color);
  const Tensor depth = read_depth_pgm(o.depth);
  CompletionModel model;
  load_checkpoint(o.checkpoint, model.params());
  const Tensor pred = model.forward(depth, color);
  std::vector<double> clipped(pred.values().begin(), pred.values().end());
  for (double& v : clipped) v = std::min(v, 65.535);
  write_depth_pgm(o.out, Tensor(pred.shape(), std::move(clipped)));
  out << "output=" << o.out << '\n';
  if (o.gt) out << evaluate(pred, read_depth_pgm(*o.gt)).to_key_value();
  return kExitOk;
}

int run_verify(const std::string& suite, std::ostream& out) {
  const auto results = verify::run_suite(suite);
  verify::print_results(out, results);
  const bool ok = verify::all_passed(results);
  out << (ok ? "all checks passed" : "some checks failed") << '\n';
  return ok ? kExitOk : kExitFailure;
}

}  // namespace maga::cli
