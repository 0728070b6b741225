#include "pmfgn/nn/parameters.hpp"

#include <cmath>

#include "pmfgn/error.hpp"

namespace pmfgn::nn {

ParamId ParameterStore::add(std::string name, Eigen::Index rows, Eigen::Index cols, Init init) {
  if (rows <= 0 || cols <= 0) {
    throw Error("parameter '" + name + "' must have positive shape");
  }
  if (index_.contains(name)) {
    throw Error("duplicate parameter name '" + name + "'");
  }
  const int id = static_cast<int>(values_.size());
  index_.emplace(name, id);
  names_.push_back(std::move(name));
  values_.push_back(Matrix::Zero(rows, cols));
  inits_.push_back(init);
  return ParamId{id};
}

std::optional<ParamId> ParameterStore::try_find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return ParamId{it->second};
}

ParamId ParameterStore::find(std::string_view name) const {
  if (auto id = try_find(name)) return *id;
  throw Error("unknown parameter '" + std::string(name) + "'");
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
  return n;
}

void ParameterStore::initialize(Rng& rng) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    Matrix& v = values_[i];
    switch (inits_[i]) {
      case Init::Zero:
        v.setZero();
        break;
      case Init::StandardNormal:
        for (Eigen::Index c = 0; c < v.cols(); ++c)
          for (Eigen::Index r = 0; r < v.rows(); ++r) v(r, c) = rng.normal();
        break;
      case Init::UniformLastDim: {
        const Eigen::Index k = v.cols() == 1 ? v.rows() : v.cols();
        const double bound = 1.0 / std::sqrt(static_cast<double>(k));
        for (Eigen::Index c = 0; c < v.cols(); ++c)
          for (Eigen::Index r = 0; r < v.rows(); ++r) v(r, c) = rng.uniform(-bound, bound);
        break;
      }
    }
  }
}

std::vector<ParamId> ParameterStore::ids() const {
  std::vector<ParamId> out;
  out.reserve(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) out.push_back(ParamId{static_cast<int>(i)});
  return out;
}

Gradients::Gradients(const ParameterStore& store) {
  grads_.reserve(store.size());
  for (ParamId id : store.ids()) {
    const Matrix& v = store.value(id);
    grads_.push_back(Matrix::Zero(v.rows(), v.cols()));
  }
}

void Gradients::set_zero() {
  for (auto& g : grads_) g.setZero();
}

void Gradients::add(const Gradients& other) {
  if (other.grads_.size() != grads_.size()) throw Error("gradient buffers are not aligned");
  for (std::size_t i = 0; i < grads_.size(); ++i) grads_[i] += other.grads_[i];
}

void Gradients::scale(double factor) {
  for (auto& g : grads_) g *= factor;
}

double Gradients::squared_norm() const {
  double s = 0.0;
  for (const auto& g : grads_) s += g.squaredNorm();
  return s;
}

bool Gradients::all_finite() const {
  for (const auto& g : grads_)
    if (!g.allFinite()) return false;
  return true;
}

}  // namespace pmfgn::nn
