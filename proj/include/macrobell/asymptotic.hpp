#pragma once

// Homodyne limit of the photon-number-difference statistics. As the drives
// grow, m / alpha converges to the quadrature X_theta of the undriven arm
// mode, so the limiting joint density is
//   P_a(x, y) = | N sum_k w_k psi(x | a1_k, theta) psi(y | b1_k, phi) |^2
// with psi the coherent-state quadrature wavefunction. Sign binning with an
// optional dead zone |x| < delta0 gives the limiting CHSH value; the dead
// zone solved for a target epsilon links back to photon thresholds through
// alpha >= N0 / delta0.

#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>
#include <vector>

#include "macrobell/binning.hpp"
#include "macrobell/cat_state.hpp"
#include "macrobell/coherent.hpp"
#include "macrobell/csv.hpp"
#include "macrobell/errors.hpp"
#include "macrobell/joint_distribution.hpp"
#include "macrobell/numerics.hpp"

namespace macrobell {

struct GridSpec {
    double half_width = 8.0;
    double step = 0.02;
    GridAxis axis() const { return GridAxis(half_width, step); }
};

class QuadratureDensity {
public:
    QuadratureDensity(GridAxis axis, double theta, double phi, double r0, int k_points)
        : axis_(axis), theta_(theta), phi_(phi), r0_(r0), k_points_(k_points),
          values_(axis.size() * axis.size(), 0.0) {}

    const GridAxis& axis() const { return axis_; }
    double theta() const { return theta_; }
    double phi() const { return phi_; }
    double r0() const { return r0_; }
    int k_points() const { return k_points_; }

    double value(std::size_t i, std::size_t j) const { return values_[i * axis_.size() + j]; }
    double& ref(std::size_t i, std::size_t j) { return values_[i * axis_.size() + j]; }
    const std::vector<double>& raw() const { return values_; }

    double integral() const {
        NeumaierSum acc;
        for (std::size_t i = 0; i < axis_.size(); ++i) {
            const double wi = axis_.trap_weight(i);
            for (std::size_t j = 0; j < axis_.size(); ++j) {
                acc.add(wi * axis_.trap_weight(j) * value(i, j));
            }
        }
        return acc.value();
    }

    std::vector<double> marginal_x() const {
        std::vector<double> out(axis_.size(), 0.0);
        for (std::size_t i = 0; i < axis_.size(); ++i) {
            NeumaierSum acc;
            for (std::size_t j = 0; j < axis_.size(); ++j) {
                acc.add(axis_.trap_weight(j) * value(i, j));
            }
            out[i] = acc.value();
        }
        return out;
    }
    std::vector<double> marginal_y() const {
        std::vector<double> out(axis_.size(), 0.0);
        for (std::size_t j = 0; j < axis_.size(); ++j) {
            NeumaierSum acc;
            for (std::size_t i = 0; i < axis_.size(); ++i) {
                acc.add(axis_.trap_weight(i) * value(i, j));
            }
            out[j] = acc.value();
        }
        return out;
    }

private:
    GridAxis axis_;
    double theta_, phi_, r0_;
    int k_points_;
    std::vector<double> values_;
};

namespace detail {

inline std::vector<std::vector<Complex>> branch_wavefunctions(
    const std::vector<CoherentBranch>& branches, bool arm_a, double angle,
    const GridAxis& axis) {
    std::vector<std::vector<Complex>> out(branches.size());
    for (std::size_t k = 0; k < branches.size(); ++k) {
        const CoherentLabel label{arm_a ? branches[k].a1 : branches[k].b1};
        auto& row = out[k];
        row.resize(axis.size());
        for (std::size_t i = 0; i < axis.size(); ++i) {
            row[i] = quadrature_wavefunction(label, angle, axis[i]);
        }
    }
    return out;
}

inline std::vector<double> evaluate_density(const std::vector<CoherentBranch>& branches,
                                            double theta, double phi, const GridAxis& axis,
                                            unsigned workers) {
    const double norm_sq = 1.0 / kernel_norm_integral(branches);
    const auto psi_a = branch_wavefunctions(branches, true, theta, axis);
    const auto psi_b = branch_wavefunctions(branches, false, phi, axis);
    const std::size_t n = axis.size();
    std::vector<double> values(n * n, 0.0);
    parallel_for(n, workers, [&](std::size_t i) {
        std::vector<Complex> amp(n, Complex{});
        for (std::size_t k = 0; k < branches.size(); ++k) {
            const Complex coef = branches[k].weight * psi_a[k][i];
            const Complex* pb = psi_b[k].data();
            for (std::size_t j = 0; j < n; ++j) amp[j] += coef * pb[j];
        }
        double* out = values.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) out[j] = norm_sq * std::norm(amp[j]);
    });
    return values;
}

} // namespace detail

/// Joint quadrature density on the grid, gated by node doubling (sup-norm
/// change above 1e-8 raises NonConvergence). The grid must cover the branch
/// means plus four standard deviations, so the mass outside stays below the
/// 1e-4 normalization allowance.
inline QuadratureDensity quadrature_joint_density(const CatStateSpec& spec, double theta,
                                                  double phi, const GridSpec& grid = {},
                                                  unsigned workers = 0) {
    const GridAxis axis = grid.axis();
    if (axis.half_width() < 2.0 * spec.r0 + 4.0) {
        throw ConfigError("quadrature grid half width must be at least 2*r0 + 4");
    }
    const double th = reduce_angle(theta);
    const double ph = reduce_angle(phi);
    const auto coarse =
        detail::evaluate_density(spec.branches(), th, ph, axis, workers);
    const auto fine = detail::evaluate_density(
        CatStateSpec::uniform(spec.r0, 2 * spec.k_points).branches(), th, ph, axis, workers);
    double sup = 0.0;
    for (std::size_t i = 0; i < fine.size(); ++i) {
        sup = std::max(sup, std::abs(fine[i] - coarse[i]));
    }
    if (sup > 1e-8) {
        throw NonConvergence("quadrature density not converged: sup change "
                             + std::to_string(sup) + " when doubling K="
                             + std::to_string(spec.k_points));
    }
    QuadratureDensity density(axis, th, ph, spec.r0, spec.k_points);
    for (std::size_t i = 0; i < axis.size(); ++i) {
        for (std::size_t j = 0; j < axis.size(); ++j) {
            density.ref(i, j) = fine[i * axis.size() + j];
        }
    }
    return density;
}

/// X_theta density of one reduced arm, via the overlap kernel of the other
/// arm (no 2D grid). The result is independent of theta for the circular
/// state; it also equals marginal_x() of the joint density.
inline std::vector<double> single_mode_quadrature_density(const CatStateSpec& spec, double theta,
                                                          const GridAxis& axis) {
    const auto branches = spec.branches();
    const double norm_sq = 1.0 / kernel_norm_integral(branches);
    const double th = reduce_angle(theta);
    std::vector<double> out(axis.size(), 0.0);
    for (std::size_t i = 0; i < axis.size(); ++i) {
        const double x = axis[i];
        NeumaierSum acc;
        for (const auto& bra : branches) {
            const Complex psi_bra = quadrature_wavefunction(CoherentLabel{bra.a1}, th, x);
            for (const auto& ket : branches) {
                const Complex psi_ket = quadrature_wavefunction(CoherentLabel{ket.a1}, th, x);
                const Complex ov_b =
                    coherent_overlap(CoherentLabel{bra.b1}, CoherentLabel{ket.b1});
                acc.add(bra.weight * ket.weight
                        * std::real(psi_ket * std::conj(psi_bra) * ov_b));
            }
        }
        out[i] = norm_sq * acc.value();
    }
    return out;
}

struct DeadZone {
    double delta0 = 0.0;
    double epsilon = 0.0;
};

namespace detail {

/// Region weight vectors for one axis: every node's trapezoid weight is
/// assigned to outcome -1 / 0 / +1; a node exactly on a region boundary is
/// split half/half, matching the composite trapezoid split of the integral.
struct RegionWeights {
    std::vector<double> minus, zero, plus;
};

inline RegionWeights region_weights(const GridAxis& axis, double delta0) {
    RegionWeights rw;
    rw.minus.assign(axis.size(), 0.0);
    rw.zero.assign(axis.size(), 0.0);
    rw.plus.assign(axis.size(), 0.0);
    for (std::size_t i = 0; i < axis.size(); ++i) {
        const double x = axis[i];
        const double w = axis.trap_weight(i);
        if (delta0 <= 0.0) {
            if (x > 0.0) {
                rw.plus[i] = w;
            } else if (x < 0.0) {
                rw.minus[i] = w;
            } else {
                rw.plus[i] = w / 2.0;
                rw.minus[i] = w / 2.0;
            }
            continue;
        }
        if (x > delta0) {
            rw.plus[i] = w;
        } else if (x < -delta0) {
            rw.minus[i] = w;
        } else if (x == delta0) {
            rw.plus[i] = w / 2.0;
            rw.zero[i] = w / 2.0;
        } else if (x == -delta0) {
            rw.minus[i] = w / 2.0;
            rw.zero[i] = w / 2.0;
        } else {
            rw.zero[i] = w;
        }
    }
    return rw;
}

} // namespace detail

/// Sign-bins a joint quadrature density with dead zone |x| < delta0.
inline BinnedStatistics bin_density(const QuadratureDensity& density, double delta0) {
    const GridAxis& axis = density.axis();
    const auto rw = detail::region_weights(axis, delta0);
    const std::array<const std::vector<double>*, 3> regions{&rw.minus, &rw.zero, &rw.plus};
    BinnedStatistics s;
    for (int ia = 0; ia < 3; ++ia) {
        // contract x-side first, then y-side
        std::vector<double> tmp(axis.size(), 0.0);
        for (std::size_t i = 0; i < axis.size(); ++i) {
            const double wi = (*regions[ia])[i];
            if (wi == 0.0) continue;
            for (std::size_t j = 0; j < axis.size(); ++j) {
                tmp[j] += wi * density.value(i, j);
            }
        }
        for (int ib = 0; ib < 3; ++ib) {
            NeumaierSum acc;
            for (std::size_t j = 0; j < axis.size(); ++j) {
                acc.add((*regions[ib])[j] * tmp[j]);
            }
            s.table[ia][ib] = acc.value();
        }
    }
    detail::finish_statistics(s);
    return s;
}

/// Largest grid-aligned delta0 whose zero-region mass stays <= epsilon.
/// The mass uses the same boundary-splitting trapezoid convention as
/// bin_density, so bin_density(density, delta0).p_zero_a <= epsilon holds by
/// construction.
inline DeadZone solve_delta0(const QuadratureDensity& density, double epsilon) {
    if (!(epsilon >= 0.0) || !(epsilon <= 1.0)) {
        throw ConfigError("epsilon must lie in [0, 1]");
    }
    const GridAxis& axis = density.axis();
    const auto marg = density.marginal_x();
    const std::size_t c = axis.center();
    const double h = axis.step();
    double mass = 0.0;
    double best = 0.0;
    for (std::size_t j = 1; j <= c; ++j) {
        mass += 0.5 * h * (marg[c - j] + marg[c - j + 1]) + 0.5 * h * (marg[c + j - 1] + marg[c + j]);
        if (mass <= epsilon) {
            best = static_cast<double>(j) * h;
        } else {
            break;
        }
    }
    return DeadZone{best, epsilon};
}

/// alpha >= N0 / delta0 makes the dead zone cover the photon threshold.
inline double required_alpha(BinThreshold n0, const DeadZone& dz) {
    if (n0.n0 == 0) return 0.0;
    if (dz.delta0 <= 0.0) {
        throw DegenerateDeadZone("positive N0 with zero-width dead zone");
    }
    return static_cast<double>(n0.n0) / dz.delta0;
}

struct AngleSet {
    double theta = 0.0;
    double phi = 0.0;
    double theta_prime = 0.0;
    double phi_prime = 0.0;
};

/// Limiting CHSH value from the four joint quadrature densities.
inline ChshResult asymptotic_chsh(const CatStateSpec& spec, const AngleSet& angles,
                                  const DeadZone& dead_zone, const GridSpec& grid = {},
                                  unsigned workers = 0) {
    const std::array<std::pair<double, double>, 4> settings{
        std::pair{angles.theta, angles.phi}, std::pair{angles.theta, angles.phi_prime},
        std::pair{angles.theta_prime, angles.phi}, std::pair{angles.theta_prime, angles.phi_prime}};
    std::array<BinnedStatistics, 4> stats;
    for (std::size_t s = 0; s < settings.size(); ++s) {
        const QuadratureDensity d = quadrature_joint_density(spec, settings[s].first,
                                                             settings[s].second, grid, workers);
        stats[s] = bin_density(d, dead_zone.delta0);
    }
    double pz = 0.0;
    for (const auto& s : stats) pz = std::max({pz, s.p_zero_a, s.p_zero_b});
    return chsh_from_correlations(stats[0].correlation, stats[1].correlation,
                                  stats[2].correlation, stats[3].correlation, pz);
}

namespace detail {

/// Node-indexed 2D trapezoid CDF: F(i, j) = integral over [x0, x_i] x [y0, y_j].
class TrapezoidCdf {
public:
    explicit TrapezoidCdf(const QuadratureDensity& density) : axis_(density.axis()) {
        const std::size_t n = axis_.size();
        f_.assign(n * n, 0.0);
        std::vector<double> row_cum(n * n, 0.0);
        const double h = axis_.step();
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            row_cum[j] = 0.0;
            for (std::size_t i = 1; i < n; ++i) {
                acc += 0.5 * h * (density.value(i - 1, j) + density.value(i, j));
                row_cum[i * n + j] = acc;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            f_[i * n] = 0.0;
            for (std::size_t j = 1; j < n; ++j) {
                acc += 0.5 * h * (row_cum[i * n + j - 1] + row_cum[i * n + j]);
                f_[i * n + j] = acc;
            }
        }
    }

    /// Mass of the axis-aligned rectangle, corners clamped to the grid;
    /// corners between nodes are resolved by bilinear interpolation.
    double box(double xl, double xr, double yl, double yr) const {
        return at(xr, yr) - at(xl, yr) - at(xr, yl) + at(xl, yl);
    }

private:
    double at(double x, double y) const {
        const std::size_t n = axis_.size();
        const auto locate = [&](double v, std::size_t& i0, double& frac) {
            const double t = (v - axis_[0]) / axis_.step();
            if (t <= 0.0) {
                i0 = 0;
                frac = 0.0;
            } else if (t >= static_cast<double>(n - 1)) {
                i0 = n - 2;
                frac = 1.0;
            } else {
                i0 = static_cast<std::size_t>(t);
                frac = t - static_cast<double>(i0);
            }
        };
        std::size_t i0, j0;
        double fx, fy;
        locate(x, i0, fx);
        locate(y, j0, fy);
        const double f00 = f_[i0 * n + j0];
        const double f10 = f_[(i0 + 1) * n + j0];
        const double f01 = f_[i0 * n + j0 + 1];
        const double f11 = f_[(i0 + 1) * n + j0 + 1];
        return (1.0 - fx) * (1.0 - fy) * f00 + fx * (1.0 - fy) * f10 + (1.0 - fx) * fy * f01
               + fx * fy * f11;
    }

    GridAxis axis_;
    std::vector<double> f_;
};

} // namespace detail

/// Total-variation distance between the finite distribution rescaled to
/// (x, y) = (m/alpha, n/beta) and the limiting density integrated over the
/// matching lattice cells [ (m-1/2)/alpha, (m+1/2)/alpha ).
inline double convergence_to_asymptote(const JointNumberDistribution& dist,
                                       const QuadratureDensity& density) {
    const double alpha = dist.config().alpha;
    const double beta = dist.config().beta;
    if (!(alpha > 0.0) || !(beta > 0.0)) {
        throw ConfigError("rescaled comparison needs positive alpha and beta");
    }
    const detail::TrapezoidCdf cdf(density);
    NeumaierSum diff;
    NeumaierSum covered;
    for (int m = -dist.max_m(); m <= dist.max_m(); ++m) {
        const double xl = (m - 0.5) / alpha;
        const double xr = (m + 0.5) / alpha;
        for (int n = -dist.max_n(); n <= dist.max_n(); ++n) {
            const double q = cdf.box(xl, xr, (n - 0.5) / beta, (n + 0.5) / beta);
            diff.add(std::abs(dist.at(m, n) - q));
            covered.add(q);
        }
    }
    // density mass in cells the finite lattice does not reach
    const double leftover = std::max(0.0, density.integral() - covered.value());
    return 0.5 * (diff.value() + leftover);
}

/// Cell masses of the density on the lattice of a given distribution shape,
/// packaged as a distribution. Used by the convergence self-test.
inline JointNumberDistribution density_cells_as_distribution(const QuadratureDensity& density,
                                                             double alpha, double beta,
                                                             int max_m, int max_n) {
    MeasurementConfig cfg;
    cfg.r0 = density.r0();
    cfg.k_points = density.k_points();
    cfg.alpha = alpha;
    cfg.beta = beta;
    cfg.theta = density.theta();
    cfg.phi = density.phi();
    JointNumberDistribution out(max_m, max_n, cfg);
    const detail::TrapezoidCdf cdf(density);
    for (int m = -max_m; m <= max_m; ++m) {
        for (int n = -max_n; n <= max_n; ++n) {
            out.ref(m, n) = cdf.box((m - 0.5) / alpha, (m + 0.5) / alpha, (n - 0.5) / beta,
                                    (n + 0.5) / beta);
        }
    }
    return out;
}

/// CSV export: `x,y,p` over the grid.
inline void write_density_csv(const QuadratureDensity& density, std::ostream& os) {
    os << "x,y,p\n";
    const GridAxis& axis = density.axis();
    for (std::size_t i = 0; i < axis.size(); ++i) {
        for (std::size_t j = 0; j < axis.size(); ++j) {
            os << csv::fmt_compact(axis[i]) << ',' << csv::fmt_compact(axis[j]) << ','
               << csv::fmt(density.value(i, j)) << '\n';
        }
    }
}

/// CSV export: `x,p` marginal.
inline void write_marginal_csv(const GridAxis& axis, const std::vector<double>& marginal,
                               std::ostream& os) {
    os << "x,p\n";
    for (std::size_t i = 0; i < axis.size(); ++i) {
        os << csv::fmt_compact(axis[i]) << ',' << csv::fmt(marginal[i]) << '\n';
    }
}

/// CSV export of a finite distribution rescaled to quadrature coordinates:
/// `x,y,p` with x = m/alpha, y = n/beta and p the lattice cell mass.
inline void write_rescaled_csv(const JointNumberDistribution& dist, std::ostream& os) {
    const double alpha = dist.config().alpha;
    const double beta = dist.config().beta;
    os << "x,y,p\n";
    for (int m = -dist.max_m(); m <= dist.max_m(); ++m) {
        for (int n = -dist.max_n(); n <= dist.max_n(); ++n) {
            os << csv::fmt_compact(m / alpha) << ',' << csv::fmt_compact(n / beta) << ','
               << csv::fmt(dist.at(m, n)) << '\n';
        }
    }
}

} // namespace macrobell
