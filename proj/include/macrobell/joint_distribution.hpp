#pragma once

// Exact joint probability P(m, n) of the two photon-number differences
// m = n_{c+} - n_{c-}, n = n_{d+} - n_{d-} at finite drive amplitudes.
//
// For a branch state  sum_k w_k |c+_k>|c-_k>|d+_k>|d-_k>  the Fock amplitude
// of a four-mode tuple is the weighted product of coherent amplitudes, and
//   P(m,n) = N^2 sum_{k,k'} w_k w_k' G^A_{kk'}(m) G^B_{kk'}(n),
//   G^A_{kk'}(m) = sum_{n1-n2=m} u_k(n1) conj(u_k'(n1)) v_k(n2) conj(v_k'(n2)),
// which is algebraically the sum-over-branches-then-square order (coherent
// interference). The classical-mixture diagnostic keeps only the k = k'
// diagonal with mixture weights w_k / 2pi (square first, then sum).

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "macrobell/cat_state.hpp"
#include "macrobell/coherent.hpp"
#include "macrobell/csv.hpp"
#include "macrobell/errors.hpp"
#include "macrobell/numerics.hpp"

namespace macrobell {

/// Per-mode Fock cutoff rule: cutoff = ceil(mean + sigma_factor * sqrt(mean))
/// + floor_add, with mean the branch-independent bound (r0 + drive)^2 / 2.
/// per_mode_max > 0 overrides the rule.
struct FockCutoff {
    double sigma_factor = 8.0;
    int floor_add = 15;
    int per_mode_max = 0;

    int resolve(double r0, double drive) const {
        if (per_mode_max > 0) return per_mode_max;
        const double mean = 0.5 * (r0 + drive) * (r0 + drive);
        return static_cast<int>(std::ceil(mean + sigma_factor * std::sqrt(mean))) + floor_add;
    }
};

/// Snapshot of everything a distribution was computed from. k_points records
/// the requested node count; values are evaluated at its 2x refinement, which
/// is what the convergence gate accepted.
struct MeasurementConfig {
    double r0 = 0.0;
    int k_points = 0;
    double alpha = 0.0;
    double beta = 0.0;
    double theta = 0.0;
    double phi = 0.0;
    FockCutoff cutoff;
    bool classical_mixture = false;

    bool same_apparatus(const MeasurementConfig& o) const {
        return r0 == o.r0 && k_points == o.k_points && alpha == o.alpha && beta == o.beta
               && cutoff.sigma_factor == o.cutoff.sigma_factor
               && cutoff.floor_add == o.cutoff.floor_add
               && cutoff.per_mode_max == o.cutoff.per_mode_max
               && classical_mixture == o.classical_mixture;
    }
};

class JointNumberDistribution {
public:
    JointNumberDistribution(int max_m, int max_n, MeasurementConfig config)
        : max_m_(max_m), max_n_(max_n),
          p_(static_cast<std::size_t>(2 * max_m + 1) * (2 * max_n + 1), 0.0),
          config_(config) {}

    int max_m() const { return max_m_; }
    int max_n() const { return max_n_; }

    double at(int m, int n) const {
        if (std::abs(m) > max_m_ || std::abs(n) > max_n_) return 0.0;
        return p_[index(m, n)];
    }
    double& ref(int m, int n) { return p_[index(m, n)]; }

    double sum() const {
        NeumaierSum acc;
        for (double v : p_) acc.add(v);
        return acc.value();
    }

    /// Marginal over the other party; index m + max_m.
    std::vector<double> marginal_a() const {
        std::vector<double> out(2 * max_m_ + 1, 0.0);
        for (int m = -max_m_; m <= max_m_; ++m) {
            NeumaierSum acc;
            for (int n = -max_n_; n <= max_n_; ++n) acc.add(p_[index(m, n)]);
            out[m + max_m_] = acc.value();
        }
        return out;
    }
    std::vector<double> marginal_b() const {
        std::vector<double> out(2 * max_n_ + 1, 0.0);
        for (int n = -max_n_; n <= max_n_; ++n) {
            NeumaierSum acc;
            for (int m = -max_m_; m <= max_m_; ++m) acc.add(p_[index(m, n)]);
            out[n + max_n_] = acc.value();
        }
        return out;
    }

    double truncation_loss() const { return truncation_loss_; }
    void set_truncation_loss(double loss) { truncation_loss_ = loss; }

    const MeasurementConfig& config() const { return config_; }
    const std::vector<double>& raw() const { return p_; }

private:
    std::size_t index(int m, int n) const {
        return static_cast<std::size_t>(m + max_m_) * (2 * max_n_ + 1)
               + static_cast<std::size_t>(n + max_n_);
    }

    int max_m_, max_n_;
    std::vector<double> p_;
    double truncation_loss_ = 0.0;
    MeasurementConfig config_;
};

enum class Party { a, b };

inline std::map<int, double> party_marginal(const JointNumberDistribution& dist, Party party) {
    std::map<int, double> out;
    if (party == Party::a) {
        const auto marg = dist.marginal_a();
        for (int m = -dist.max_m(); m <= dist.max_m(); ++m) out[m] = marg[m + dist.max_m()];
    } else {
        const auto marg = dist.marginal_b();
        for (int n = -dist.max_n(); n <= dist.max_n(); ++n) out[n] = marg[n + dist.max_n()];
    }
    return out;
}

struct JointOptions {
    bool classical_mixture = false;
    unsigned workers = 0;
};

namespace detail {

struct BranchModeAmps {
    std::vector<Complex> c_plus, c_minus, d_plus, d_minus;
    double weight = 0.0;
};

inline std::vector<BranchModeAmps> mode_amplitudes(const std::vector<CoherentBranch>& branches,
                                                   const NetworkConfig& net, int ca, int cb) {
    std::vector<BranchModeAmps> out(branches.size());
    for (std::size_t k = 0; k < branches.size(); ++k) {
        const BranchLabels lab = branch_labels(branches[k].a1, branches[k].b1, net);
        out[k].c_plus = fock_amplitudes(lab.c_plus, ca);
        out[k].c_minus = fock_amplitudes(lab.c_minus, ca);
        out[k].d_plus = fock_amplitudes(lab.d_plus, cb);
        out[k].d_minus = fock_amplitudes(lab.d_minus, cb);
        out[k].weight = branches[k].weight;
    }
    return out;
}

/// g(m + C) = sum_n plus[n + m] * minus[n] over the valid overlap range.
inline void difference_correlation(const std::vector<Complex>& plus,
                                   const std::vector<Complex>& minus,
                                   std::vector<Complex>& g) {
    const int c = static_cast<int>(plus.size()) - 1;
    g.assign(2 * c + 1, Complex{});
    for (int m = -c; m <= c; ++m) {
        Complex s{};
        const int lo = std::max(0, -m);
        const int hi = std::min(c, c - m);
        for (int n = lo; n <= hi; ++n) s += plus[n + m] * minus[n];
        g[m + c] = s;
    }
}

/// Declared upper bound on probability mass outside the cutoff box.
/// Coherent superposition: Cauchy-Schwarz + union bound over the four modes,
///   loss <= N^2 (sum_k w_k sqrt(sum_modes tail_k,mode))^2.
/// Classical mixture: plain mixture average of the per-branch union bounds.
inline double declared_truncation_loss(const std::vector<CoherentBranch>& branches,
                                       const NetworkConfig& net, int ca, int cb,
                                       bool mixture, double norm_sq) {
    NeumaierSum acc;
    for (const auto& br : branches) {
        const BranchLabels lab = branch_labels(br.a1, br.b1, net);
        const double tails = poisson_tail_above(lab.c_plus.mean_photon_number(), ca)
                             + poisson_tail_above(lab.c_minus.mean_photon_number(), ca)
                             + poisson_tail_above(lab.d_plus.mean_photon_number(), cb)
                             + poisson_tail_above(lab.d_minus.mean_photon_number(), cb);
        acc.add(mixture ? br.weight / two_pi * tails : br.weight * std::sqrt(tails));
    }
    const double s = acc.value();
    return mixture ? s : norm_sq * s * s;
}

inline std::vector<double> evaluate_pmn(const std::vector<CoherentBranch>& branches,
                                        const NetworkConfig& net, int ca, int cb,
                                        bool mixture, double norm_sq, unsigned workers) {
    const std::size_t n_branches = branches.size();
    const std::size_t ma = static_cast<std::size_t>(2 * ca + 1);
    const std::size_t mb = static_cast<std::size_t>(2 * cb + 1);
    const auto amps = mode_amplitudes(branches, net, ca, cb);

    // Fixed-size row chunks keep the reduction order independent of the
    // worker count: each chunk is accumulated single-threaded in row order,
    // and chunks are merged sequentially afterwards.
    const std::size_t chunk_rows = 4;
    const std::size_t n_chunks = (n_branches + chunk_rows - 1) / chunk_rows;
    std::vector<std::vector<double>> partial(n_chunks);

    parallel_for(n_chunks, workers, [&](std::size_t chunk) {
        auto& acc = partial[chunk];
        acc.assign(ma * mb, 0.0);
        std::vector<Complex> pa(ca + 1), qa(ca + 1), pb(cb + 1), qb(cb + 1), ga, gb;
        std::vector<double> ga_re(ma), ga_im(ma), gb_re(mb), gb_im(mb);
        const std::size_t row_end = std::min(n_branches, (chunk + 1) * chunk_rows);
        for (std::size_t k = chunk * chunk_rows; k < row_end; ++k) {
            const auto& row = amps[k];
            for (std::size_t j = 0; j < n_branches; ++j) {
                if (mixture && j != k) continue;
                const auto& col = amps[j];
                for (int n = 0; n <= ca; ++n) {
                    pa[n] = row.c_plus[n] * std::conj(col.c_plus[n]);
                    qa[n] = row.c_minus[n] * std::conj(col.c_minus[n]);
                }
                for (int n = 0; n <= cb; ++n) {
                    pb[n] = row.d_plus[n] * std::conj(col.d_plus[n]);
                    qb[n] = row.d_minus[n] * std::conj(col.d_minus[n]);
                }
                difference_correlation(pa, qa, ga);
                difference_correlation(pb, qb, gb);
                const double w = mixture ? row.weight / two_pi : row.weight * col.weight;
                for (std::size_t m = 0; m < ma; ++m) {
                    ga_re[m] = ga[m].real();
                    ga_im[m] = ga[m].imag();
                }
                for (std::size_t n = 0; n < mb; ++n) {
                    gb_re[n] = gb[n].real();
                    gb_im[n] = gb[n].imag();
                }
                // Re(gA gB) rank-1 update; the imaginary parts cancel in the
                // full k,k' sum so only the real part is accumulated.
                for (std::size_t m = 0; m < ma; ++m) {
                    const double cr = w * ga_re[m];
                    const double ci = w * ga_im[m];
                    double* out = acc.data() + m * mb;
                    for (std::size_t n = 0; n < mb; ++n) {
                        out[n] += cr * gb_re[n] - ci * gb_im[n];
                    }
                }
            }
        }
    });

    std::vector<double> values(ma * mb, 0.0);
    for (const auto& acc : partial) {
        for (std::size_t i = 0; i < values.size(); ++i) values[i] += acc[i];
    }
    const double scale = mixture ? 1.0 : norm_sq;
    for (double& v : values) v = std::max(0.0, scale * v);
    return values;
}

} // namespace detail

/// Exact P(m, n) with truncation and node-doubling convergence gates.
/// Throws TruncationTooLossy if the declared loss bound exceeds 1e-4 and
/// NonConvergence if doubling the node count moves any P(m, n) by > 1e-6.
inline JointNumberDistribution joint_pmn(const CatStateSpec& spec, const NetworkConfig& net,
                                         const FockCutoff& cutoff, const JointOptions& opts = {}) {
    const int ca = cutoff.resolve(spec.r0, net.alpha);
    const int cb = cutoff.resolve(spec.r0, net.beta);

    const CatStateSpec fine_spec = CatStateSpec::uniform(spec.r0, 2 * spec.k_points);
    const auto coarse_branches = spec.branches();
    const auto fine_branches = fine_spec.branches();
    const double coarse_norm = 1.0 / kernel_norm_integral(coarse_branches);
    const double fine_norm = 1.0 / kernel_norm_integral(fine_branches);

    const double loss = detail::declared_truncation_loss(fine_branches, net, ca, cb,
                                                         opts.classical_mixture, fine_norm);
    if (loss > 1e-4) {
        throw TruncationTooLossy("declared truncation loss " + std::to_string(loss)
                                 + " exceeds 1e-4; raise the cutoff");
    }

    const auto coarse = detail::evaluate_pmn(coarse_branches, net, ca, cb,
                                             opts.classical_mixture, coarse_norm, opts.workers);
    auto fine = detail::evaluate_pmn(fine_branches, net, ca, cb,
                                     opts.classical_mixture, fine_norm, opts.workers);
    double max_diff = 0.0;
    for (std::size_t i = 0; i < fine.size(); ++i) {
        max_diff = std::max(max_diff, std::abs(fine[i] - coarse[i]));
    }
    if (max_diff > 1e-6) {
        throw NonConvergence("P(m,n) quadrature not converged: max change "
                             + std::to_string(max_diff) + " when doubling K="
                             + std::to_string(spec.k_points));
    }

    MeasurementConfig cfg;
    cfg.r0 = spec.r0;
    cfg.k_points = spec.k_points;
    cfg.alpha = net.alpha;
    cfg.beta = net.beta;
    cfg.theta = net.theta;
    cfg.phi = net.phi;
    cfg.cutoff = cutoff;
    cfg.classical_mixture = opts.classical_mixture;

    JointNumberDistribution dist(ca, cb, cfg);
    for (int m = -ca; m <= ca; ++m) {
        for (int n = -cb; n <= cb; ++n) {
            dist.ref(m, n) = fine[static_cast<std::size_t>(m + ca) * (2 * cb + 1) + (n + cb)];
        }
    }
    dist.set_truncation_loss(loss);
    return dist;
}

/// CSV export: header `m,n,p`, rows sorted by (m, n), full double precision.
inline void write_csv(const JointNumberDistribution& dist, std::ostream& os) {
    os << "m,n,p\n";
    for (int m = -dist.max_m(); m <= dist.max_m(); ++m) {
        for (int n = -dist.max_n(); n <= dist.max_n(); ++n) {
            os << m << ',' << n << ',' << csv::fmt(dist.at(m, n)) << '\n';
        }
    }
}

} // namespace macrobell
