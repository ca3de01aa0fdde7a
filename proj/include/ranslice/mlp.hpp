#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

namespace ranslice {

enum class Head {
  Linear,         // critic: raw outputs
  SoftmaxGroups,  // actor: softmax over consecutive groups of group_size outputs
};

// Dense network with ReLU hidden layers. Batched calls take one sample per
// column.
class Mlp {
 public:
  struct Cache {
    std::vector<Eigen::MatrixXd> inputs;  // input to layer l (post-activation of l - 1)
    std::vector<Eigen::MatrixXd> pre;     // pre-activation of layer l
    Eigen::MatrixXd output;
  };

  struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    double squared_norm() const;
    void scale(double factor);
  };

  Mlp() = default;
  // Weights uniform in +-1/sqrt(fan_in), biases zero.
  Mlp(Eigen::Index inputs, const std::vector<Eigen::Index>& hidden, Eigen::Index outputs, Head head,
      Eigen::Index group_size, std::mt19937_64& rng);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache* cache = nullptr) const;
  Eigen::VectorXd predict(const Eigen::VectorXd& x) const;

  // upstream is dLoss/dOutput (outputs x batch). Gradients are summed over
  // the batch; input_grad receives dLoss/dInput when non-null.
  Gradients backward(const Cache& cache, const Eigen::MatrixXd& upstream, Eigen::MatrixXd* input_grad = nullptr) const;

  Gradients zero_gradients() const;
  Eigen::Index num_inputs() const { return weights.front().cols(); }
  Eigen::Index num_outputs() const { return weights.back().rows(); }
  std::size_t num_parameters() const;
  bool all_finite() const;

  std::vector<Eigen::MatrixXd> weights;  // layer l: out x in
  std::vector<Eigen::VectorXd> biases;
  Head head = Head::Linear;
  Eigen::Index group_size = 1;
};

// target <- tau * source + (1 - tau) * target
void soft_update(Mlp& target, const Mlp& source, double tau);

class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& net, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(Mlp& net, const Mlp::Gradients& grad);

  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long long t = 0;
  Mlp::Gradients m;
  Mlp::Gradients v;
};

}  // namespace ranslice
