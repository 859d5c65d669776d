#include "dofvo/activation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "dofvo/error.hpp"

namespace dofvo {

namespace {

constexpr double kLeakySlope = 0.01;
constexpr double kEluAlpha = 1.0;
constexpr double kSeluLambda = 1.0507009873554804934193349852946;
constexpr double kSeluAlpha = 1.6732632423543772848170429916717;

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double activation_forward(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::ReLU: return x > 0.0 ? x : 0.0;
    case ActivationKind::LeakyReLU: return x >= 0.0 ? x : kLeakySlope * x;
    case ActivationKind::ELU: return x >= 0.0 ? x : kEluAlpha * std::expm1(x);
    case ActivationKind::SELU: return kSeluLambda * (x >= 0.0 ? x : kSeluAlpha * std::expm1(x));
    case ActivationKind::Tanh: return std::tanh(x);
    case ActivationKind::Sigmoid: return sigmoid(x);
    case ActivationKind::Identity: return x;
  }
  return x;
}

double activation_derivative(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::ReLU: return x >= 0.0 ? 1.0 : 0.0;
    case ActivationKind::LeakyReLU: return x >= 0.0 ? 1.0 : kLeakySlope;
    case ActivationKind::ELU: return x >= 0.0 ? 1.0 : kEluAlpha * std::exp(x);
    case ActivationKind::SELU: return kSeluLambda * (x >= 0.0 ? 1.0 : kSeluAlpha * std::exp(x));
    case ActivationKind::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::Sigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
    case ActivationKind::Identity: return 1.0;
  }
  return 1.0;
}

std::string display_name(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::ReLU: return "ReLU";
    case ActivationKind::LeakyReLU: return "Leaky ReLU";
    case ActivationKind::ELU: return "ELU";
    case ActivationKind::SELU: return "SELU";
    case ActivationKind::Tanh: return "Tanh";
    case ActivationKind::Sigmoid: return "Sigmoid";
    case ActivationKind::Identity: return "Identity";
  }
  return "?";
}

std::string token(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::ReLU: return "relu";
    case ActivationKind::LeakyReLU: return "leaky_relu";
    case ActivationKind::ELU: return "elu";
    case ActivationKind::SELU: return "selu";
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::Sigmoid: return "sigmoid";
    case ActivationKind::Identity: return "identity";
  }
  return "?";
}

ActivationKind parse_activation(const std::string& raw) {
  std::string t;
  for (char c : raw) {
    if (c == '-' || c == ' ') c = '_';
    t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  for (auto kind : {ActivationKind::ReLU, ActivationKind::LeakyReLU, ActivationKind::ELU, ActivationKind::SELU,
                    ActivationKind::Tanh, ActivationKind::Sigmoid, ActivationKind::Identity}) {
    if (token(kind) == t) return kind;
  }
  if (t == "leakyrelu") return ActivationKind::LeakyReLU;
  throw usage_error("unknown activation '" + raw + "'");
}

bool has_kink(ActivationKind kind) {
  return kind == ActivationKind::ReLU || kind == ActivationKind::LeakyReLU || kind == ActivationKind::ELU ||
         kind == ActivationKind::SELU;
}

}  // namespace dofvo
