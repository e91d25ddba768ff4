// One Gaussian-RBF network branch: activations, pseudoinverse training and
// generalized (gradient) training of weights and centers.
#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrbf/numerics.hpp"

namespace mrbf {

struct RbfBranch {
  std::vector<std::vector<double>> centers;  // M points in feature space
  double beta = 1.0;                         // width coefficient
  Matrix weights;                            // M x C
  std::vector<char> output_labels;           // the branch's group, C letters
  int input_dim = 0;
};

inline double green_activation(const std::vector<double>& x, const std::vector<double>& center,
                               double beta) {
  if (x.size() != center.size())
    throw std::invalid_argument("green_activation: dimension mismatch");
  if (!(beta > 0.0)) throw std::invalid_argument("green_activation: beta must be positive");
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - center[i];
    d2 += d * d;
  }
  return std::exp(-beta * d2);
}

// Entry (j, i) = activation of center i on input j.
inline Matrix design_matrix(const std::vector<std::vector<double>>& inputs,
                            const RbfBranch& branch) {
  const int n = static_cast<int>(inputs.size());
  const int m = static_cast<int>(branch.centers.size());
  Matrix g(n, m);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i)
      g(j, i) = green_activation(inputs[j], branch.centers[i], branch.beta);
  return g;
}

// Width heuristic beta = M / (2 * d_max^2) over the center set; falls back to
// 1 when all centers coincide.
inline double default_beta(const std::vector<std::vector<double>>& centers) {
  double d2max = 0.0;
  for (std::size_t a = 0; a < centers.size(); ++a)
    for (std::size_t b = a + 1; b < centers.size(); ++b) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < centers[a].size(); ++i) {
        const double d = centers[a][i] - centers[b][i];
        d2 += d * d;
      }
      d2max = std::max(d2max, d2);
    }
  if (d2max <= 0.0) return 1.0;
  return static_cast<double>(centers.size()) / (2.0 * d2max);
}

// W = pinv(G) * D; the minimal least-squares solution.
inline RbfBranch train_regularization(const std::vector<std::vector<double>>& inputs,
                                      const Matrix& targets, RbfBranch branch) {
  if (inputs.empty()) throw std::domain_error("train_regularization: no training inputs");
  if (targets.rows != static_cast<int>(inputs.size()))
    throw std::invalid_argument("train_regularization: target row count mismatch");
  if (branch.centers.empty()) throw std::invalid_argument("train_regularization: no centers");
  branch.input_dim = static_cast<int>(inputs[0].size());
  const Matrix g = design_matrix(inputs, branch);
  branch.weights = solve_least_squares(g, targets);
  return branch;
}

// scores = W^T * g(x)
inline std::vector<double> branch_forward(const std::vector<double>& x, const RbfBranch& branch) {
  const int m = static_cast<int>(branch.centers.size());
  const int c = branch.weights.cols;
  if (branch.weights.rows != m)
    throw std::invalid_argument("branch_forward: weight/center count mismatch");
  std::vector<double> scores(c, 0.0);
  for (int i = 0; i < m; ++i) {
    const double gi = green_activation(x, branch.centers[i], branch.beta);
    for (int k = 0; k < c; ++k) scores[k] += branch.weights(i, k) * gi;
  }
  return scores;
}

enum class TrainingMode { regularization, generalized };

struct TrainingConfig {
  TrainingMode mode = TrainingMode::regularization;
  double eta1 = 0.01;  // weight learning rate
  double eta2 = 0.01;  // center learning rate
  int epochs = 50;
  std::optional<double> beta_override;
  std::uint64_t seed = 0;
};

struct RbfLoss {
  // E = 1/2 sum_j ||forward(X_j) - D_j||^2
  static double batch(const Matrix& g, const Matrix& w, const Matrix& d) {
    const Matrix r = subtract(multiply(g, w), d);
    const double f = frobenius_norm(r);
    return 0.5 * f * f;
  }
};

struct GeneralizedResult {
  RbfBranch branch;
  std::vector<double> loss_trace;  // E at each epoch start, plus the final E
};

// Batch gradient descent on both weights (eta1) and centers (eta2).
// Gradients of the Gaussian form, with R = GW - D and S = R W^T:
//   dE/dW   = G^T R
//   dE/dT_i = 2 beta sum_j S_ji g_ji (X_j - T_i)
inline GeneralizedResult train_generalized(const std::vector<std::vector<double>>& inputs,
                                           const Matrix& targets, RbfBranch branch,
                                           const TrainingConfig& config) {
  if (inputs.empty()) throw std::domain_error("train_generalized: no training inputs");
  if (!(config.eta1 >= 0.0) || !(config.eta2 >= 0.0))
    throw std::invalid_argument("train_generalized: negative learning rate");
  if (config.epochs < 1) throw std::invalid_argument("train_generalized: epochs < 1");
  const int n = static_cast<int>(inputs.size());
  const int m = static_cast<int>(branch.centers.size());
  const std::size_t dim = inputs[0].size();

  GeneralizedResult res;
  res.branch = std::move(branch);
  RbfBranch& b = res.branch;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const Matrix g = design_matrix(inputs, b);
    const double loss = RbfLoss::batch(g, b.weights, targets);
    if (!std::isfinite(loss))
      throw std::runtime_error("train_generalized: loss diverged at epoch " +
                               std::to_string(epoch));
    res.loss_trace.push_back(loss);

    const Matrix r = subtract(multiply(g, b.weights), targets);  // N x C
    const Matrix grad_w = multiply(transpose(g), r);             // M x C
    const Matrix s = multiply(r, transpose(b.weights));          // N x M

    std::vector<std::vector<double>> grad_t(m, std::vector<double>(dim, 0.0));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        const double coef = 2.0 * b.beta * s(j, i) * g(j, i);
        for (std::size_t d = 0; d < dim; ++d)
          grad_t[i][d] += coef * (inputs[j][d] - b.centers[i][d]);
      }

    for (int i = 0; i < m; ++i)
      for (int k = 0; k < b.weights.cols; ++k) b.weights(i, k) -= config.eta1 * grad_w(i, k);
    for (int i = 0; i < m; ++i)
      for (std::size_t d = 0; d < dim; ++d) b.centers[i][d] -= config.eta2 * grad_t[i][d];

    bool finite = true;
    for (double v : b.weights.entries) finite &= std::isfinite(v);
    for (const auto& c : b.centers)
      for (double v : c) finite &= std::isfinite(v);
    if (!finite)
      throw std::runtime_error("train_generalized: parameters diverged at epoch " +
                               std::to_string(epoch));
  }

  const double final_loss = RbfLoss::batch(design_matrix(inputs, b), b.weights, targets);
  if (!std::isfinite(final_loss))
    throw std::runtime_error("train_generalized: loss diverged at epoch " +
                             std::to_string(config.epochs));
  res.loss_trace.push_back(final_loss);
  return res;
}

// One-hot target rows over the branch's output labels.
inline Matrix make_one_hot(const std::vector<char>& sample_labels,
                           const std::vector<char>& output_labels) {
  Matrix d(static_cast<int>(sample_labels.size()), static_cast<int>(output_labels.size()));
  for (int j = 0; j < d.rows; ++j) {
    bool found = false;
    for (int c = 0; c < d.cols; ++c)
      if (output_labels[c] == sample_labels[j]) {
        d(j, c) = 1.0;
        found = true;
      }
    if (!found)
      throw std::invalid_argument(std::string("make_one_hot: label '") + sample_labels[j] +
                                  "' not among output labels");
  }
  return d;
}

}  // namespace mrbf
