#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pmfgn/nn/rng.hpp"

namespace pmfgn::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct ParamId {
  int index = -1;
  bool valid() const { return index >= 0; }
  friend bool operator==(ParamId, ParamId) = default;
};

enum class Init {
  // U(-1/sqrt(k), 1/sqrt(k)), k = size of the last dimension (cols, or rows
  // for a column vector).
  UniformLastDim,
  // N(0, 1); used for word embeddings.
  StandardNormal,
  Zero,
};

// Named, ordered collection of every learnable tensor in a model. Order of
// insertion is the serialization order.
class ParameterStore {
 public:
  ParamId add(std::string name, Eigen::Index rows, Eigen::Index cols,
              Init init = Init::UniformLastDim);

  ParamId find(std::string_view name) const;
  std::optional<ParamId> try_find(std::string_view name) const;
  bool contains(std::string_view name) const { return try_find(name).has_value(); }

  Matrix& value(ParamId id) { return values_.at(id.index); }
  const Matrix& value(ParamId id) const { return values_.at(id.index); }
  const std::string& name(ParamId id) const { return names_.at(id.index); }
  Init init_kind(ParamId id) const { return inits_.at(id.index); }

  std::size_t size() const { return values_.size(); }
  std::size_t scalar_count() const;

  // Draws every parameter from its registered initializer, in order.
  void initialize(Rng& rng);

  std::vector<ParamId> ids() const;

 private:
  std::vector<std::string> names_;
  std::vector<Matrix> values_;
  std::vector<Init> inits_;
  std::unordered_map<std::string, int> index_;
};

// Dense gradient buffer aligned with a ParameterStore.
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParameterStore& store);

  Matrix& operator[](ParamId id) { return grads_.at(id.index); }
  const Matrix& operator[](ParamId id) const { return grads_.at(id.index); }
  std::size_t size() const { return grads_.size(); }

  void set_zero();
  void add(const Gradients& other);
  void scale(double factor);
  double squared_norm() const;
  bool all_finite() const;

 private:
  std::vector<Matrix> grads_;
};

}  // namespace pmfgn::nn
