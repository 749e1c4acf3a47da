#include "maga/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "maga/errors.hpp"

namespace maga {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void check_extents(const Shape& shape) {
  for (std::size_t e : shape) {
    if (e == 0) throw DimensionError("zero extent in shape " + shape_string(shape));
  }
}

thread_local GradTape* current_tape = nullptr;

}  // namespace

Tensor::Tensor(Shape shape, double fill) {
  check_extents(shape);
  node_ = std::make_shared<detail::Node>();
  node_->value.assign(shape_size(shape), fill);
  node_->shape = std::move(shape);
}

Tensor::Tensor(Shape shape, std::vector<double> values) {
  check_extents(shape);
  if (values.size() != shape_size(shape)) {
    throw DimensionError("value count " + std::to_string(values.size()) +
                         " does not match shape " + shape_string(shape));
  }
  node_ = std::make_shared<detail::Node>();
  node_->shape = std::move(shape);
  node_->value = std::move(values);
}

Tensor Tensor::scalar(double value) { return Tensor(Shape{}, std::vector<double>{value}); }

Tensor Tensor::wrap(detail::NodePtr node) {
  Tensor t;
  t.node_ = std::move(node);
  return t;
}

const Shape& Tensor::shape() const {
  if (!node_) throw ContractError("use of an undefined tensor");
  return node_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const {
  const Shape& s = shape();
  if (axis >= s.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " +
                         shape_string(s));
  }
  return s[axis];
}

std::size_t Tensor::size() const { return shape_size(shape()); }

std::span<const double> Tensor::values() const {
  shape();
  return node_->value;
}

std::span<double> Tensor::mutable_values() {
  shape();
  return node_->value;
}

double Tensor::item() const {
  if (size() != 1) {
    throw ContractError("item() on tensor of shape " + shape_string(shape()));
  }
  return node_->value[0];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  const Shape& s = shape();
  if (index.size() != s.size()) {
    throw DimensionError("index rank mismatch for " + shape_string(s));
  }
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= s[axis]) throw DimensionError("index out of range for " + shape_string(s));
    flat = flat * s[axis] + i;
    ++axis;
  }
  return node_->value[flat];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool on) {
  shape();
  if (!node_->leaf) throw ContractError("requires_grad can only be set on leaf tensors");
  node_->requires_grad = on;
  return *this;
}

bool Tensor::is_leaf() const { return node_ && node_->leaf; }

bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }

std::span<const double> Tensor::grad() const {
  shape();
  return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  shape();
  return detail::grad_buffer(*node_);
}

void Tensor::zero_grad() {
  if (node_) node_->grad.clear();
}

Tensor Tensor::clone() const { return Tensor(shape(), node_->value); }

GradTape::GradTape() : previous_(current_tape) { current_tape = this; }

GradTape::~GradTape() { current_tape = previous_; }

GradTape* GradTape::current() { return current_tape; }

void GradTape::record(detail::NodePtr output, BackwardFn fn) {
  entries_.push_back(Entry{std::move(output), std::move(fn)});
}

void GradTape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward() needs a scalar loss");
  }
  if (!loss.requires_grad()) {
    throw ContractError("backward(): loss is not connected to the tape");
  }
  for (Entry& e : entries_) {
    e.output->grad.assign(e.output->value.size(), 0.0);
    e.output->touched = false;
  }
  detail::grad_buffer(*loss.node())[0] += 1.0;

  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->output->touched) it->backward();
  }
}

void backward(const Tensor& loss) {
  GradTape* tape = GradTape::current();
  if (!tape) throw ContractError("backward() called with no active GradTape");
  tape->backward(loss);
}

namespace detail {

std::vector<double>& grad_buffer(Node& node) {
  if (node.grad.size() != node.value.size()) node.grad.assign(node.value.size(), 0.0);
  node.touched = true;
  return node.grad;
}

bool should_record(std::initializer_list<const Tensor*> inputs) {
  if (!GradTape::current()) return false;
  for (const Tensor* t : inputs) {
    if (t && t->requires_grad()) return true;
  }
  return false;
}

Tensor make_result(Shape shape, std::vector<double> values, bool record,
                   const char* op_name, std::function<void(Node& out)> fn) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string(op_name) + " produced a non-finite value");
    }
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  if (record) {
    node->requires_grad = true;
    node->leaf = false;
    // The tape entry owns the node, so the raw pointer outlives the closure.
    GradTape::current()->record(node, [fn = std::move(fn), out = node.get()]() { fn(*out); });
  }
  return Tensor::wrap(std::move(node));
}

}  // namespace detail

}  // namespace maga
