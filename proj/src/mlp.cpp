#include "ranslice/mlp.hpp"

#include <cmath>

#include "ranslice/errors.hpp"

namespace ranslice {

namespace {

void softmax_groups(Eigen::MatrixXd& z, Eigen::Index group) {
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    for (Eigen::Index g = 0; g < z.rows(); g += group) {
      auto seg = z.col(c).segment(g, group);
      const double mx = seg.maxCoeff();
      seg = (seg.array() - mx).exp();
      seg /= seg.sum();
    }
  }
}

}  // namespace

double Mlp::Gradients::squared_norm() const {
  double s = 0.0;
  for (const auto& w : weights) s += w.squaredNorm();
  for (const auto& b : biases) s += b.squaredNorm();
  return s;
}

void Mlp::Gradients::scale(double factor) {
  for (auto& w : weights) w *= factor;
  for (auto& b : biases) b *= factor;
}

Mlp::Mlp(Eigen::Index inputs, const std::vector<Eigen::Index>& hidden, Eigen::Index outputs, Head head_type,
         Eigen::Index group, std::mt19937_64& rng)
    : head(head_type), group_size(group) {
  if (head == Head::SoftmaxGroups && (group <= 0 || outputs % group != 0)) {
    throw Error(ErrorCode::DimensionMismatch, "softmax head needs outputs divisible by the group size");
  }
  std::vector<Eigen::Index> sizes{inputs};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(outputs);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
    std::uniform_real_distribution<double> init(-bound, bound);
    Eigen::MatrixXd w(sizes[l + 1], sizes[l]);
    // fill row by row so the draw order does not depend on storage order
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = init(rng);
    }
    weights.push_back(std::move(w));
    biases.push_back(Eigen::VectorXd::Zero(sizes[l + 1]));
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Cache* cache) const {
  if (x.rows() != num_inputs()) {
    throw Error(ErrorCode::DimensionMismatch,
                "network expects " + std::to_string(num_inputs()) + " inputs, got " + std::to_string(x.rows()));
  }
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Eigen::MatrixXd a = x;
  const std::size_t L = weights.size();
  for (std::size_t l = 0; l < L; ++l) {
    Eigen::MatrixXd z = weights[l] * a;
    z.colwise() += biases[l];
    if (cache) {
      cache->inputs.push_back(a);
      cache->pre.push_back(z);
    }
    if (l + 1 < L) {
      a = z.cwiseMax(0.0);
    } else {
      a = std::move(z);
      if (head == Head::SoftmaxGroups) softmax_groups(a, group_size);
    }
  }
  if (cache) cache->output = a;
  return a;
}

Eigen::VectorXd Mlp::predict(const Eigen::VectorXd& x) const {
  return forward(Eigen::MatrixXd(x)).col(0);
}

Mlp::Gradients Mlp::zero_gradients() const {
  Gradients g;
  for (const auto& w : weights) g.weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  for (const auto& b : biases) g.biases.push_back(Eigen::VectorXd::Zero(b.size()));
  return g;
}

Mlp::Gradients Mlp::backward(const Cache& cache, const Eigen::MatrixXd& upstream, Eigen::MatrixXd* input_grad) const {
  const std::size_t L = weights.size();
  if (cache.pre.size() != L || upstream.rows() != num_outputs() || upstream.cols() != cache.output.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "backward: cache or upstream gradient has the wrong shape");
  }
  Gradients g;
  g.weights.resize(L);
  g.biases.resize(L);

  Eigen::MatrixXd delta = upstream;
  if (head == Head::SoftmaxGroups) {
    // dz = y * (dy - <y, dy>) per group
    const Eigen::MatrixXd& y = cache.output;
    for (Eigen::Index c = 0; c < delta.cols(); ++c) {
      for (Eigen::Index s = 0; s < delta.rows(); s += group_size) {
        const auto ys = y.col(c).segment(s, group_size);
        auto ds = delta.col(c).segment(s, group_size);
        const double inner = ys.dot(ds);
        ds = ys.cwiseProduct((ds.array() - inner).matrix());
      }
    }
  }
  for (std::size_t l = L; l-- > 0;) {
    g.weights[l] = delta * cache.inputs[l].transpose();
    g.biases[l] = delta.rowwise().sum();
    if (l == 0 && !input_grad) break;
    Eigen::MatrixXd back = weights[l].transpose() * delta;
    if (l == 0) {
      *input_grad = std::move(back);
      break;
    }
    delta = back.cwiseProduct((cache.pre[l - 1].array() > 0.0).cast<double>().matrix());
  }
  return g;
}

std::size_t Mlp::num_parameters() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  }
  return n;
}

bool Mlp::all_finite() const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

void soft_update(Mlp& target, const Mlp& source, double tau) {
  for (std::size_t l = 0; l < target.weights.size(); ++l) {
    target.weights[l] = tau * source.weights[l] + (1.0 - tau) * target.weights[l];
    target.biases[l] = tau * source.biases[l] + (1.0 - tau) * target.biases[l];
  }
}

Adam::Adam(const Mlp& net, double lr_, double b1, double b2, double eps_)
    : lr(lr_), beta1(b1), beta2(b2), eps(eps_), m(net.zero_gradients()), v(net.zero_gradients()) {}

void Adam::step(Mlp& net, const Mlp::Gradients& grad) {
  ++t;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  auto update = [&](auto& param, auto& mm, auto& vv, const auto& gg) {
    mm = beta1 * mm + (1.0 - beta1) * gg;
    vv = beta2 * vv + (1.0 - beta2) * gg.cwiseAbs2();
    param.array() -= lr * (mm.array() / c1) / ((vv.array() / c2).sqrt() + eps);
  };
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    update(net.weights[l], m.weights[l], v.weights[l], grad.weights[l]);
    update(net.biases[l], m.biases[l], v.biases[l], grad.biases[l]);
  }
}

}  // namespace ranslice
