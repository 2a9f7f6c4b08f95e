#pragma once

// Three-region binning of photon-number differences and the CHSH assembly.
// Outcome of a result v against threshold N0: +1 if v > N0, -1 if v < -N0,
// 0 otherwise. The default correlation counts outcome 0 with value 0, which
// only dilutes; a renormalized variant restricted to the +-1 sector is
// reported alongside.

#include <array>
#include <cmath>
#include <ostream>

#include "macrobell/csv.hpp"
#include "macrobell/errors.hpp"
#include "macrobell/joint_distribution.hpp"
#include "macrobell/numerics.hpp"

namespace macrobell {

struct BinThreshold {
    int n0 = 0;
};

/// 3x3 outcome table; index 0, 1, 2 maps to outcome -1, 0, +1.
struct BinnedStatistics {
    std::array<std::array<double, 3>, 3> table{};
    double p_zero_a = 0.0;
    double p_zero_b = 0.0;
    double correlation = 0.0;
    double correlation_plus_minus = 0.0; // renormalized on the +-1 sector
    double table_sum = 0.0;

    std::array<double, 3> outcome_probs_a() const {
        return {table[0][0] + table[0][1] + table[0][2],
                table[1][0] + table[1][1] + table[1][2],
                table[2][0] + table[2][1] + table[2][2]};
    }
    std::array<double, 3> outcome_probs_b() const {
        return {table[0][0] + table[1][0] + table[2][0],
                table[0][1] + table[1][1] + table[2][1],
                table[0][2] + table[1][2] + table[2][2]};
    }
};

inline int outcome_index(int value, int n0) {
    if (value > n0) return 2;
    if (value < -n0) return 0;
    return 1;
}

namespace detail {

inline void finish_statistics(BinnedStatistics& s) {
    s.p_zero_a = s.table[1][0] + s.table[1][1] + s.table[1][2];
    s.p_zero_b = s.table[0][1] + s.table[1][1] + s.table[2][1];
    s.correlation = s.table[2][2] + s.table[0][0] - s.table[2][0] - s.table[0][2];
    const double corners = s.table[2][2] + s.table[0][0] + s.table[2][0] + s.table[0][2];
    s.correlation_plus_minus = corners > 0.0 ? s.correlation / corners : 0.0;
    NeumaierSum total;
    for (const auto& row : s.table) {
        for (double v : row) total.add(v);
    }
    s.table_sum = total.value();
}

} // namespace detail

inline BinnedStatistics bin_distribution(const JointNumberDistribution& dist, BinThreshold t) {
    if (t.n0 < 0) throw ConfigError("bin threshold N0 must be nonnegative");
    std::array<std::array<NeumaierSum, 3>, 3> acc;
    for (int m = -dist.max_m(); m <= dist.max_m(); ++m) {
        const int ia = outcome_index(m, t.n0);
        for (int n = -dist.max_n(); n <= dist.max_n(); ++n) {
            acc[ia][outcome_index(n, t.n0)].add(dist.at(m, n));
        }
    }
    BinnedStatistics s;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) s.table[i][j] = acc[i][j].value();
    }
    detail::finish_statistics(s);
    return s;
}

struct ChshResult {
    double e_bb = 0.0;
    double e_bg = 0.0;
    double e_gb = 0.0;
    double e_gg = 0.0;
    double e_value = 0.0;
    double p_zero_max = 0.0;
};

inline ChshResult chsh_from_correlations(double e_bb, double e_bg, double e_gb, double e_gg,
                                         double p_zero_max = 0.0) {
    return ChshResult{e_bb, e_bg, e_gb, e_gg, e_bb - e_bg + e_gb + e_gg, p_zero_max};
}

/// Assembles E = E(B,B) - E(B,G) + E(G,B) + E(G,G) from the four settings
/// (theta,phi), (theta,phi'), (theta',phi), (theta',phi'). The four inputs
/// must share every non-angle parameter and follow that angle pattern.
inline ChshResult chsh(const JointNumberDistribution& bb, const JointNumberDistribution& bg,
                       const JointNumberDistribution& gb, const JointNumberDistribution& gg,
                       BinThreshold t) {
    const auto& c0 = bb.config();
    for (const auto* d : {&bg, &gb, &gg}) {
        if (!c0.same_apparatus(d->config())) {
            throw InconsistentConfigs("CHSH inputs differ in non-angle parameters");
        }
    }
    if (bb.config().theta != bg.config().theta || gb.config().theta != gg.config().theta
        || bb.config().phi != gb.config().phi || bg.config().phi != gg.config().phi) {
        throw InconsistentConfigs("CHSH inputs do not follow the (theta,phi) setting pattern");
    }
    const BinnedStatistics s_bb = bin_distribution(bb, t);
    const BinnedStatistics s_bg = bin_distribution(bg, t);
    const BinnedStatistics s_gb = bin_distribution(gb, t);
    const BinnedStatistics s_gg = bin_distribution(gg, t);
    double pz = 0.0;
    for (const auto* s : {&s_bb, &s_bg, &s_gb, &s_gg}) {
        pz = std::max({pz, s->p_zero_a, s->p_zero_b});
    }
    return chsh_from_correlations(s_bb.correlation, s_bg.correlation, s_gb.correlation,
                                  s_gg.correlation, pz);
}

/// CSV export: `setting,e` rows plus a `chsh` summary row.
inline void write_csv(const ChshResult& r, std::ostream& os) {
    os << "setting,e\n";
    os << "bb," << csv::fmt(r.e_bb) << '\n';
    os << "bg," << csv::fmt(r.e_bg) << '\n';
    os << "gb," << csv::fmt(r.e_gb) << '\n';
    os << "gg," << csv::fmt(r.e_gg) << '\n';
    os << "chsh," << csv::fmt(r.e_value) << '\n';
}

/// CSV export of a 3x3 outcome table: `outcome_a,outcome_b,p`.
inline void write_table_csv(const BinnedStatistics& s, std::ostream& os) {
    os << "outcome_a,outcome_b,p\n";
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            os << (i - 1) << ',' << (j - 1) << ',' << csv::fmt(s.table[i][j]) << '\n';
        }
    }
}

} // namespace macrobell
