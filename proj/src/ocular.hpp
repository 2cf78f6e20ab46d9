#pragma once

#include <span>
#include <utility>
#include <vector>

#include "mixture.hpp"

namespace typeclust {

// Discrete emission model in the style of Ocular: each component template is
// shifted by an integer offset and raised elementwise to an inking exponent,
// and both latents are marginalized exactly under uniform priors.
struct OcularGrid {
    std::vector<std::pair<int, int>> offsets; // (o_h, o_v)
    std::vector<double> exponents;

    // offsets {-2..2}^2, exponents {0.5, 0.75, 1.0, 1.25, 1.5}
    static OcularGrid standard();
};

// out(i,j) = in(i - o_v, j - o_h); zero outside the canvas.
std::vector<double> shift_image(std::span<const double> in, int canvas, int o_h, int o_v);

// Per component: log sum_{o,g} (1/|O|)(1/|G|) Bernoulli(x | clamp(shift(T_k, o)^g)).
std::vector<double> ocular_component_scores(std::span<const double> x, const MixtureState& state,
                                            const OcularGrid& grid);

// log sum_k pi_k exp(component score)
double ocular_loglik(std::span<const double> x, const MixtureState& state, const OcularGrid& grid = OcularGrid::standard());

// Value plus gradient w.r.t. template logits and pi_logits (accumulated into grad).
double ocular_loglik_grad(std::span<const double> x, const MixtureState& state, const OcularGrid& grid,
                          MixtureState& grad);

} // namespace typeclust
