#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace maga {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until something accumulates into it
  bool requires_grad = false;
  bool leaf = true;
  bool touched = false;  // received gradient during the current backward
};

using NodePtr = std::shared_ptr<Node>;

}  // namespace detail

/// Dense real array, row-major, with an optional gradient accumulator.
///
/// A Tensor is a cheap handle: copies share storage. Values are treated as
/// immutable once the tensor has been used as an op input; the only
/// sanctioned mutation paths are `mutable_values()` on leaves (parameter
/// updates between passes) and the gradient accumulator.
///
/// Images use height x width x channels layout.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const;

  std::span<const double> values() const;
  std::span<double> mutable_values();
  double item() const;
  double at(std::initializer_list<std::size_t> index) const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool on);
  bool is_leaf() const;

  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  /// Same values, fresh storage, detached from any tape.
  Tensor clone() const;

  const detail::NodePtr& node() const { return node_; }
  static Tensor wrap(detail::NodePtr node);

 private:
  detail::NodePtr node_;
};

/// Dynamic reverse-mode tape.
///
/// Constructing a GradTape makes it the current tape of the calling thread
/// until it is destroyed; tapes nest. Ops whose inputs require gradients
/// append an entry while a tape is current. With no current tape, ops run in
/// inference mode and record nothing.
class GradTape {
 public:
  using BackwardFn = std::function<void()>;

  GradTape();
  ~GradTape();
  GradTape(const GradTape&) = delete;
  GradTape& operator=(const GradTape&) = delete;

  /// Replays recorded entries in reverse order. Leaf gradients accumulate
  /// across calls; intermediate gradients are reset at the start of each call.
  void backward(const Tensor& loss);

  std::size_t size() const { return entries_.size(); }
  void clear() { entries_.clear(); }

  static GradTape* current();

  void record(detail::NodePtr output, BackwardFn fn);

 private:
  struct Entry {
    detail::NodePtr output;
    BackwardFn backward;
  };
  std::vector<Entry> entries_;
  GradTape* previous_;
};

/// Backward on the current thread's tape.
void backward(const Tensor& loss);

namespace detail {

/// True if any input requires grad and a tape is current.
bool should_record(std::initializer_list<const Tensor*> inputs);

/// Builds the output of an op. When `record` is set the output requires grad
/// and `fn` is appended to the current tape.
Tensor make_result(Shape shape, std::vector<double> values, bool record,
                   const char* op_name,
                   std::function<void(Node& out)> fn);

/// Gradient buffer of `node`, zero-filled on first touch.
std::vector<double>& grad_buffer(Node& node);

}  // namespace detail

}  // namespace maga
