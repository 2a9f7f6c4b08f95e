#pragma once

// The circular two-mode superposition of coherent states
//   |psi> = N integral_0^{2pi} |r0 e^{i s}>_{a1} |r0 e^{-i s}>_{b1} ds
// discretized on a uniform trapezoid rule (exponentially convergent for
// periodic analytic integrands), and the linear-optics network that maps each
// coherent branch to the four measured-mode labels.

#include <cmath>
#include <complex>
#include <vector>

#include "macrobell/coherent.hpp"
#include "macrobell/errors.hpp"
#include "macrobell/numerics.hpp"

namespace macrobell {

/// One coherent branch of a two-party state: |a1> (x) |b1> entering the two
/// arms, with its quadrature weight. Any state expressible as a weighted list
/// of such branches can drive the downstream distribution machinery.
struct CoherentBranch {
    Complex a1{};
    Complex b1{};
    double weight = 0.0;
};

inline double reduce_angle(double a) { return std::remainder(a, two_pi); }

struct CatStateSpec {
    double r0 = 1.1;
    int k_points = 64;
    std::vector<double> node_angles;   // K angles in [0, 2pi)
    std::vector<double> node_weights;  // positive, summing to 2pi

    static CatStateSpec uniform(double r0, int k_points) {
        if (r0 < 0.0) throw ConfigError("cat state radius r0 must be nonnegative");
        if (k_points < 16) throw ConfigError("cat state needs at least 16 quadrature nodes");
        CatStateSpec spec;
        spec.r0 = r0;
        spec.k_points = k_points;
        spec.node_angles.resize(k_points);
        spec.node_weights.assign(k_points, two_pi / k_points);
        for (int k = 0; k < k_points; ++k) {
            spec.node_angles[k] = (two_pi * k) / k_points;
        }
        return spec;
    }

    /// b1 = conj(a1) exactly, so the two arms stay conjugate node by node.
    std::vector<CoherentBranch> branches() const {
        std::vector<CoherentBranch> out(node_angles.size());
        for (std::size_t k = 0; k < node_angles.size(); ++k) {
            const Complex a1 = std::polar(r0, node_angles[k]);
            out[k] = CoherentBranch{a1, std::conj(a1), node_weights[k]};
        }
        return out;
    }
};

/// Drive amplitudes and polariser angles of the two arms. alpha, beta are the
/// real nonnegative coherent drives; theta, phi are stored reduced mod 2pi.
struct NetworkConfig {
    double alpha = 0.0;
    double beta = 0.0;
    double theta = 0.0;
    double phi = 0.0;

    NetworkConfig(double alpha_, double beta_, double theta_, double phi_)
        : alpha(alpha_), beta(beta_), theta(reduce_angle(theta_)), phi(reduce_angle(phi_)) {
        if (alpha < 0.0 || beta < 0.0) {
            throw ConfigError("drive amplitudes alpha, beta must be nonnegative");
        }
    }
};

/// The four measured-mode coherent labels of one branch.
struct BranchLabels {
    CoherentLabel c_plus, c_minus, d_plus, d_minus;
};

/// Beam splitter + polariser collapse to a single closed-form label map:
///   c+ = i (a1 e^{-i theta/2} + alpha e^{i theta/2}) / sqrt(2)
///   c- =   (-a1 e^{-i theta/2} + alpha e^{i theta/2}) / sqrt(2)
/// and likewise d+- from (b1, beta, phi). The 2x2 map is unitary, so
/// |c+|^2 + |c-|^2 = |a1|^2 + alpha^2 for every branch.
inline BranchLabels branch_labels(Complex a1, Complex b1, const NetworkConfig& net) {
    const Complex i_unit{0.0, 1.0};
    const Complex ua = a1 * std::polar(1.0, -0.5 * net.theta);
    const Complex va = net.alpha * std::polar(1.0, 0.5 * net.theta);
    const Complex ub = b1 * std::polar(1.0, -0.5 * net.phi);
    const Complex vb = net.beta * std::polar(1.0, 0.5 * net.phi);
    return BranchLabels{
        CoherentLabel{i_unit * (ua + va) * inv_sqrt2},
        CoherentLabel{(va - ua) * inv_sqrt2},
        CoherentLabel{i_unit * (ub + vb) * inv_sqrt2},
        CoherentLabel{(vb - ub) * inv_sqrt2},
    };
}

inline BranchLabels branch_labels(double varsigma, const CatStateSpec& spec,
                                  const NetworkConfig& net) {
    const double vs = reduce_angle(varsigma);
    const Complex a1 = std::polar(spec.r0, vs);
    return branch_labels(a1, std::conj(a1), net);
}

/// <psi~|psi~> of the unnormalized branch sum: the double quadrature of the
/// two-arm overlap kernel. Strictly decreasing in r0 (the kernel spreads).
inline double kernel_norm_integral(const std::vector<CoherentBranch>& branches) {
    NeumaierSum acc;
    for (const auto& bra : branches) {
        for (const auto& ket : branches) {
            const Complex ov_a = coherent_overlap(CoherentLabel{bra.a1}, CoherentLabel{ket.a1});
            const Complex ov_b = coherent_overlap(CoherentLabel{bra.b1}, CoherentLabel{ket.b1});
            acc.add(bra.weight * ket.weight * std::real(ov_a * ov_b));
        }
    }
    return acc.value();
}

/// Closed Bessel form of the squared normalization, e^{2 r0^2} / (4 pi^2 I0(2 r0^2)).
inline double norm_constant_closed_form(double r0) {
    const double u = 2.0 * r0 * r0;
    return std::exp(u) / (4.0 * pi * pi * std::cyl_bessel_i(0.0, u));
}

/// Numeric N^2 = 1 / (kernel double integral), gated by doubling the node
/// count; relative change above 1e-8 raises NonConvergence. Returns the
/// refined value.
inline double norm_constant(const CatStateSpec& spec) {
    const double coarse = 1.0 / kernel_norm_integral(spec.branches());
    const double fine =
        1.0 / kernel_norm_integral(CatStateSpec::uniform(spec.r0, 2 * spec.k_points).branches());
    if (std::abs(fine - coarse) > 1e-8 * std::abs(fine)) {
        throw NonConvergence("norm quadrature not converged: K=" + std::to_string(spec.k_points)
                             + " vs " + std::to_string(2 * spec.k_points));
    }
    return fine;
}

} // namespace macrobell
