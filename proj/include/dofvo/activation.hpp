#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace dofvo {

/// Hidden-layer nonlinearity. Values are the on-disk ids of the model format.
enum class ActivationKind : std::uint8_t {
  ReLU = 0,
  LeakyReLU = 1,  // slope 0.01
  ELU = 2,        // alpha 1
  SELU = 3,
  Tanh = 4,
  Sigmoid = 5,
  Identity = 6,
};

inline constexpr std::array<ActivationKind, 6> kNonlinearActivations{
    ActivationKind::ReLU, ActivationKind::LeakyReLU, ActivationKind::ELU,
    ActivationKind::SELU, ActivationKind::Tanh,      ActivationKind::Sigmoid};

double activation_forward(ActivationKind kind, double x);

/// Derivative; at the ReLU-family kink (x = 0) this is the right derivative.
double activation_derivative(ActivationKind kind, double x);

/// Human-readable name as used in ablation tables ("Leaky ReLU", "SELU", ...).
std::string display_name(ActivationKind kind);
/// Config/CLI token ("relu", "leaky_relu", ...).
std::string token(ActivationKind kind);
ActivationKind parse_activation(const std::string& token);

bool has_kink(ActivationKind kind);

}  // namespace dofvo
