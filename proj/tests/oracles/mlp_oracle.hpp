#pragma once

// Hand-rolled MLP forward pass over nested std::vector, with activations
// re-derived from their textbook definitions, plus a central-difference
// gradient built on top of it. Runs in long double so the difference
// quotient's rounding noise stays far below the tolerances it is held to.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using Real = long double;

struct Layer {
  std::vector<std::vector<Real>> w;  // out x in
  std::vector<Real> b;
};

struct Net {
  std::vector<Layer> layers;
  std::vector<Real> mean, stddev;
  std::vector<bool> mask;
  std::function<Real(Real)> act;
};

inline Real relu(Real x) { return x > 0 ? x : 0.0L; }
inline Real leaky_relu(Real x) { return x > 0 ? x : 0.01L * x; }
inline Real elu(Real x) { return x > 0 ? x : std::exp(x) - 1.0L; }
inline Real selu(Real x) {
  const Real lambda = 1.0507009873554804934193349852946L;
  const Real alpha = 1.6732632423543772848170429916717L;
  return lambda * (x > 0 ? x : alpha * (std::exp(x) - 1.0L));
}
inline Real tanh_(Real x) { return std::tanh(x); }
inline Real sigmoid(Real x) { return 1.0L / (1.0L + std::exp(-x)); }

inline Real forward(const Net& net, const std::vector<double>& input) {
  std::vector<Real> a(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) a[i] = net.mask[i] ? (input[i] - net.mean[i]) / net.stddev[i] : 0.0L;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const Layer& L = net.layers[l];
    std::vector<Real> z(L.b.size());
    for (std::size_t o = 0; o < L.b.size(); ++o) {
      Real s = L.b[o];
      for (std::size_t i = 0; i < a.size(); ++i) s += L.w[o][i] * a[i];
      z[o] = l + 1 < net.layers.size() ? net.act(s) : s;
    }
    a = z;
  }
  return a[0];
}

/// Central differences of (forward - target)^2 over a flat parameter vector,
/// laid out per layer as weights row-major followed by the bias.
inline std::vector<double> numeric_gradient(Net net, const std::vector<double>& input, double target, double h) {
  std::vector<Real*> params;
  for (auto& L : net.layers) {
    for (auto& row : L.w)
      for (auto& v : row) params.push_back(&v);
    for (auto& v : L.b) params.push_back(&v);
  }
  const auto loss = [&] {
    const Real e = forward(net, input) - target;
    return e * e;
  };
  std::vector<double> g;
  for (Real* p : params) {
    const Real saved = *p;
    *p = saved + h;
    const Real up = loss();
    *p = saved - h;
    const Real down = loss();
    *p = saved;
    g.push_back(static_cast<double>((up - down) / (2 * static_cast<Real>(h))));
  }
  return g;
}

}  // namespace oracle
