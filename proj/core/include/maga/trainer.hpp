#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "maga/corpus.hpp"
#include "maga/losses.hpp"
#include "maga/metrics.hpp"
#include "maga/network.hpp"
#include "maga/params.hpp"

namespace maga {

struct PlateauState {
  std::size_t patience_epochs = 5;
  double threshold = 1e-6;
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t epochs_since_improve = 0;
};

struct OptimizerState {
  double lr = 1e-3;
  double momentum = 0.95;
  double weight_decay = 1e-4;
  double max_grad_norm = 10.0;  // 0 disables clipping in train_batch
  std::map<std::string, std::vector<double>> velocity;  // zero-initialised on first use
  PlateauState plateau;
};

/// Classical momentum SGD with L2 weight decay folded into the gradient:
///   v <- momentum * v + grad + wd * param   (wd only for decayed paths)
///   param <- param - lr * v
/// Parameters that received no gradient are treated as having a zero one.
/// Throws NumericError naming the parameter path on a non-finite gradient.
void sgd_step(ParamStore& params, OptimizerState& state);

/// Once per epoch. An improvement is val_loss < best - threshold; otherwise
/// the counter grows and, on reaching patience, lr halves and the counter
/// resets. Returns true when lr was halved.
bool plateau_schedule(OptimizerState& state, double val_loss);

/// Scales every accumulated gradient by max_norm / norm when the global L2
/// norm over all parameters exceeds max_norm. Returns the norm before
/// scaling.
double clip_gradients(ParamStore& params, double max_norm);

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 4;
  std::uint64_t seed = 1;
  double lr = 1e-3;
  double momentum = 0.95;
  double weight_decay = 1e-4;
  double max_grad_norm = 10.0;
  std::size_t patience = 5;
  std::size_t threads = 1;  // validation workers
  std::string out_dir;      // empty: no files written
  std::ostream* progress = nullptr;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double lr = 0.0;        // rate used for this epoch's updates
  LossBreakdown train;    // mean over the epoch's samples, total = mse + sc
  double val_loss = 0.0;  // mean total loss over the validation split
  MetricReport val;
  bool lr_halved = false;
};

struct TrainResult {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
};

/// Forward and backward for `batch`, gradient of the mean loss accumulated
/// into the parameters (after zeroing), clipped to state.max_grad_norm when
/// that is positive, then one sgd_step. Returns the mean
/// loss before the update. `tag` prefixes non-finite loss errors.
LossBreakdown train_batch(CompletionModel& model, std::span<const Sample* const> batch, OptimizerState& state,
                          const std::string& tag = "");

struct Evaluation {
  MetricReport metrics;
  double loss = 0.0;  // mean completion loss
};

/// Inference over `samples` with up to `threads` workers. Results do not
/// depend on the worker count.
Evaluation evaluate_model(const CompletionModel& model, const std::vector<Sample>& samples, std::size_t threads = 1);

/// Per-sample predictions, in order.
std::vector<Tensor> predict_all(const CompletionModel& model, const std::vector<Sample>& samples,
                                std::size_t threads = 1);

/// Seeded shuffle, per epoch, followed by batched updates, validation,
/// plateau scheduling and logging. With a non-empty out_dir writes
/// train_log.tsv, best.ckpt (lowest validation loss) and final.ckpt.
TrainResult train(CompletionModel& model, const std::vector<Sample>& train_set, const std::vector<Sample>& val_set,
                  const TrainConfig& config);

inline constexpr const char* kTrainLogHeader =
    "epoch\tlr\tloss_total\tloss_mse\tloss_sc\tval_rmse\tval_rel\tval_mae\tval_d110\tval_d125\tval_d125_2\tval_d125_3";

/// One TSV row matching kTrainLogHeader. Numbers use the shortest text that
/// reads back to the same double.
std::string format_log_row(const EpochRecord& r);

enum class Baseline { mean_fill, copy_input };

/// Throws ArgumentError for anything other than "mean-fill" or "copy-input".
Baseline parse_baseline(const std::string& s);

/// Every pixel set to the mean of the observed (non-zero) input depths.
/// Throws EmptyEvaluationError when nothing is observed.
Tensor mean_fill(const Tensor& depth_input);

/// mean-fill: scored on every ground-truth pixel. copy-input: the input map
/// itself, scored only on the observed pixels.
MetricReport evaluate_baseline(const std::vector<Sample>& samples, Baseline baseline);

/// Shortest round-trip decimal form of `v`.
std::string format_number(double v);

}  // namespace maga
