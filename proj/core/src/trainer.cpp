#include "maga/trainer.hpp"

#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "maga/checkpoint.hpp"
#include "maga/errors.hpp"
#include "maga/ops.hpp"
#include "maga/rng.hpp"

namespace maga {

void sgd_step(ParamStore& params, OptimizerState& state) {
  for (auto& [path, p] : params.mutable_entries()) {
    auto& v = state.velocity[path];
    if (v.empty()) v.assign(p.size(), 0.0);
    if (v.size() != p.size()) throw DimensionError("velocity for " + path + " does not match its parameter");
    const double wd = is_decayed(path) ? state.weight_decay : 0.0;
    auto values = p.mutable_values();
    if (p.has_grad()) {
      const auto g = p.grad();
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(g[i])) throw NumericError("non-finite gradient in " + path);
      }
      for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = state.momentum * v[i] + g[i] + wd * values[i];
        values[i] -= state.lr * v[i];
      }
    } else {
      for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = state.momentum * v[i] + wd * values[i];
        values[i] -= state.lr * v[i];
      }
    }
  }
}

bool plateau_schedule(OptimizerState& state, double val_loss) {
  PlateauState& p = state.plateau;
  if (val_loss < p.best_val_loss - p.threshold) {
    p.best_val_loss = val_loss;
    p.epochs_since_improve = 0;
    return false;
  }
  if (++p.epochs_since_improve >= p.patience_epochs) {
    state.lr /= 2.0;
    p.epochs_since_improve = 0;
    return true;
  }
  return false;
}

double clip_gradients(ParamStore& params, double max_norm) {
  double sq = 0.0;
  for (auto& [path, p] : params.mutable_entries()) {
    if (!p.has_grad()) continue;
    for (double g : p.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& [path, p] : params.mutable_entries()) {
      if (!p.has_grad()) continue;
      for (double& g : p.mutable_grad()) g *= factor;
    }
  }
  return norm;
}

LossBreakdown train_batch(CompletionModel& model, std::span<const Sample* const> batch, OptimizerState& state,
                          const std::string& tag) {
  if (batch.empty()) throw ArgumentError("empty training batch");
  model.params().zero_grad();
  const double inv = 1.0 / static_cast<double>(batch.size());
  double mse = 0.0, sc = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Sample& s = *batch[i];
    GradTape tape;
    LossTerms terms;
    try {
      const Tensor pred = model.forward(s.depth_input, s.color);
      terms = completion_loss(pred, s.depth_gt);
    } catch (const NumericError& e) {
      throw NumericError(tag + "sample seed " + std::to_string(s.meta.scene_seed) + ": " + e.what());
    }
    const LossBreakdown b = terms.values();
    if (!std::isfinite(b.total)) {
      throw NumericError(tag + "non-finite loss for sample seed " + std::to_string(s.meta.scene_seed));
    }
    mse += b.mse;
    sc += b.sc;
    tape.backward(scale(terms.total, inv));
  }
  if (state.max_grad_norm > 0.0) clip_gradients(model.params(), state.max_grad_norm);
  sgd_step(model.params(), state);
  LossBreakdown out;
  out.mse = mse * inv;
  out.sc = sc * inv;
  out.total = out.mse + out.sc;
  return out;
}

namespace {

template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex m;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(m);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::vector<Tensor> predict_all(const CompletionModel& model, const std::vector<Sample>& samples,
                                std::size_t threads) {
  std::vector<Tensor> preds(samples.size());
  parallel_for(samples.size(), threads,
               [&](std::size_t i) { preds[i] = model.forward(samples[i].depth_input, samples[i].color); });
  return preds;
}

Evaluation evaluate_model(const CompletionModel& model, const std::vector<Sample>& samples, std::size_t threads) {
  if (samples.empty()) throw EmptyEvaluationError("no samples to evaluate");
  const std::vector<Tensor> preds = predict_all(model, samples, threads);
  MetricAccumulator acc;
  double loss = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    acc.add(preds[i], samples[i].depth_gt);
    loss += completion_loss(preds[i], samples[i].depth_gt).values().total;
  }
  return {acc.report(), loss / static_cast<double>(samples.size())};
}

std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string format_log_row(const EpochRecord& r) {
  std::string row = std::to_string(r.epoch);
  for (double v : {r.lr, r.train.total, r.train.mse, r.train.sc, r.val.rmse, r.val.rel, r.val.mae, r.val.delta[0],
                   r.val.delta[1], r.val.delta[2], r.val.delta[3]}) {
    row += '\t';
    row += format_number(v);
  }
  return row;
}

TrainResult train(CompletionModel& model, const std::vector<Sample>& train_set, const std::vector<Sample>& val_set,
                  const TrainConfig& config) {
  if (config.epochs < 1) throw ConfigError("epochs must be at least 1");
  if (config.batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (!(config.lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(config.max_grad_norm >= 0.0)) throw ConfigError("max_grad_norm must be non-negative");
  if (train_set.empty()) throw ArgumentError("training split is empty");
  if (val_set.empty()) throw ArgumentError("validation split is empty");

  namespace fs = std::filesystem;
  std::ofstream log;
  if (!config.out_dir.empty()) {
    fs::create_directories(config.out_dir);
    log.open(fs::path(config.out_dir) / "train_log.tsv", std::ios::binary | std::ios::trunc);
    if (!log) throw ArgumentError("cannot write training log in " + config.out_dir);
    log << kTrainLogHeader << '\n';
  }

  OptimizerState state;
  state.lr = config.lr;
  state.momentum = config.momentum;
  state.weight_decay = config.weight_decay;
  state.max_grad_norm = config.max_grad_norm;
  state.plateau.patience_epochs = config.patience;

  TrainResult result;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 rng(derive_seed(config.seed, epoch));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = state.lr;
    double mse = 0.0, sc = 0.0;
    std::vector<const Sample*> batch;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      batch.clear();
      for (std::size_t i = start; i < std::min(order.size(), start + config.batch_size); ++i) {
        batch.push_back(&train_set[order[i]]);
      }
      const std::string tag = "epoch " + std::to_string(epoch) + ", batch at position " + std::to_string(start) + ", ";
      const LossBreakdown b = train_batch(model, batch, state, tag);
      mse += b.mse * static_cast<double>(batch.size());
      sc += b.sc * static_cast<double>(batch.size());
    }
    rec.train.mse = mse / static_cast<double>(order.size());
    rec.train.sc = sc / static_cast<double>(order.size());
    rec.train.total = rec.train.mse + rec.train.sc;

    const Evaluation ev = evaluate_model(model, val_set, config.threads);
    rec.val = ev.metrics;
    rec.val_loss = ev.loss;
    rec.lr_halved = plateau_schedule(state, ev.loss);
    result.epochs.push_back(rec);

    if (log.is_open()) {
      log << format_log_row(rec) << '\n';
      log.flush();
    }
    if (ev.loss < best_val) {
      best_val = ev.loss;
      result.best_epoch = epoch;
      if (!config.out_dir.empty()) save_checkpoint(model.params(), (fs::path(config.out_dir) / "best.ckpt").string());
    }
    if (config.progress) {
      *config.progress << "epoch " << epoch << " lr=" << format_number(rec.lr)
                       << " train_loss=" << format_number(rec.train.total) << " val_loss=" << format_number(ev.loss)
                       << " val_rmse=" << format_number(rec.val.rmse) << " val_d125=" << format_number(rec.val.delta[1])
                       << '\n';
      if (rec.lr_halved) *config.progress << "epoch " << epoch << " lr halved to " << format_number(state.lr) << '\n';
      config.progress->flush();
    }
  }
  if (!config.out_dir.empty()) save_checkpoint(model.params(), (fs::path(config.out_dir) / "final.ckpt").string());
  return result;
}

Baseline parse_baseline(const std::string& s) {
  if (s == "mean-fill") return Baseline::mean_fill;
  if (s == "copy-input") return Baseline::copy_input;
  throw ArgumentError("unknown baseline " + s + " (expected mean-fill or copy-input)");
}

Tensor mean_fill(const Tensor& depth_input) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : depth_input.values()) {
    if (v > 0.0) {
      sum += v;
      ++n;
    }
  }
  if (n == 0) throw EmptyEvaluationError("no observed depth to average");
  return Tensor(depth_input.shape(), sum / static_cast<double>(n));
}

MetricReport evaluate_baseline(const std::vector<Sample>& samples, Baseline baseline) {
  MetricAccumulator acc;
  for (const Sample& s : samples) {
    if (baseline == Baseline::mean_fill) {
      acc.add(mean_fill(s.depth_input), s.depth_gt);
    } else {
      acc.add(s.depth_input, s.depth_gt, mask_from_depth(s.depth_input));
    }
  }
  return acc.report();
}

}  // namespace maga
