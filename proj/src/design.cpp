#include "msgp/design.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "msgp/random.hpp"

namespace msgp {

VariableSpec VariableSpec::continuous(std::string name, double lower, double upper) {
    VariableSpec s;
    s.name = std::move(name);
    s.kind = VariableKind::Continuous;
    s.lower = lower;
    s.upper = upper;
    s.validate();
    return s;
}

VariableSpec VariableSpec::categorical(std::string name, std::vector<std::string> levels) {
    VariableSpec s;
    s.name = std::move(name);
    s.kind = VariableKind::Categorical;
    s.levels = std::move(levels);
    s.validate();
    return s;
}

void VariableSpec::validate() const {
    if (kind == VariableKind::Continuous) {
        if (!(lower < upper))
            throw std::invalid_argument("variable '" + name + "': lower must be < upper");
    } else {
        if (levels.empty())
            throw std::invalid_argument("variable '" + name + "': empty categorical level list");
        std::vector<std::string> sorted = levels;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("variable '" + name + "': duplicate categorical levels");
    }
}

double min_pairwise_distance(const Eigen::MatrixXd& values) {
    const Eigen::Index n = values.rows();
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            best = std::min(best, (values.row(i) - values.row(j)).norm());
    return best;
}

namespace {

// One stratified LHS draw on the unit cube, mapped to the spec ranges.
Eigen::MatrixXd lhs_draw(const std::vector<VariableSpec>& cont, Eigen::Index n, Rng& rng) {
    const Eigen::Index p = static_cast<Eigen::Index>(cont.size());
    Eigen::MatrixXd x(n, p);
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < p; ++k) {
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        const double lo = cont[static_cast<std::size_t>(k)].lower;
        const double hi = cont[static_cast<std::size_t>(k)].upper;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double u = (perm[static_cast<std::size_t>(i)] + rand_uniform(rng)) / static_cast<double>(n);
            x(i, k) = lo + u * (hi - lo);
        }
    }
    return x;
}

// Maximin hill climbing by swapping two entries within a random column.  A
// swap keeps the per-column stratification intact.  Distances are tracked on
// unit-scaled coordinates so ranges with different widths weigh equally.
Eigen::MatrixXd maximin_climb(Eigen::MatrixXd x, const std::vector<VariableSpec>& cont,
                              int budget, Rng& rng) {
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    Eigen::MatrixXd u(n, p);
    for (Eigen::Index k = 0; k < p; ++k) {
        const auto& s = cont[static_cast<std::size_t>(k)];
        u.col(k) = (x.col(k).array() - s.lower) / (s.upper - s.lower);
    }
    Eigen::MatrixXd dist(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        dist(i, i) = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = i + 1; j < n; ++j)
            dist(i, j) = dist(j, i) = (u.row(i) - u.row(j)).norm();
    }
    auto min_dist = [&]() { return dist.minCoeff(); };
    double current = min_dist();
    std::uniform_int_distribution<Eigen::Index> pick_col(0, p - 1);
    std::uniform_int_distribution<Eigen::Index> pick_row(0, n - 1);
    for (int it = 0; it < budget; ++it) {
        const Eigen::Index k = pick_col(rng);
        const Eigen::Index r1 = pick_row(rng);
        Eigen::Index r2 = pick_row(rng);
        if (r1 == r2) continue;
        std::swap(u(r1, k), u(r2, k));
        Eigen::VectorXd old1 = dist.col(r1), old2 = dist.col(r2);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (i != r1) dist(i, r1) = dist(r1, i) = (u.row(i) - u.row(r1)).norm();
            if (i != r2) dist(i, r2) = dist(r2, i) = (u.row(i) - u.row(r2)).norm();
        }
        const double trial = min_dist();
        if (trial > current) {
            current = trial;
            std::swap(x(r1, k), x(r2, k));
        } else {
            std::swap(u(r1, k), u(r2, k));
            dist.col(r1) = old1;
            dist.row(r1) = old1.transpose();
            dist.col(r2) = old2;
            dist.row(r2) = old2.transpose();
            dist(r1, r1) = dist(r2, r2) = std::numeric_limits<double>::infinity();
        }
    }
    return x;
}

}  // namespace

DesignMatrix lhs_sample(const std::vector<VariableSpec>& specs, Eigen::Index n,
                        const LhsOptions& opts, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("lhs_sample: n must be >= 2");
    std::vector<VariableSpec> cont;
    for (const auto& s : specs) {
        s.validate();
        if (s.kind == VariableKind::Continuous) cont.push_back(s);
    }
    if (cont.empty()) throw std::invalid_argument("lhs_sample: no continuous variables in spec list");

    Rng rng(seed);
    Eigen::MatrixXd x = lhs_draw(cont, n, rng);
    if (opts.optimize) {
        Eigen::MatrixXd best = maximin_climb(x, cont, opts.swap_budget, rng);
        double best_d = min_pairwise_distance(best);
        for (int r = 1; r < opts.restarts; ++r) {
            Rng rrng(split_seed(seed, static_cast<std::uint64_t>(r)));
            Eigen::MatrixXd cand = maximin_climb(lhs_draw(cont, n, rrng), cont, opts.swap_budget, rrng);
            const double d = min_pairwise_distance(cand);
            if (d > best_d) {
                best_d = d;
                best = cand;
            }
        }
        x = best;
    }

    DesignMatrix out;
    out.values = std::move(x);
    out.specs = std::move(cont);
    out.scaled = false;
    return out;
}

DesignMatrix mixed_design(const DesignMatrix& continuous, const std::vector<VariableSpec>& specs,
                          std::uint64_t seed, Eigen::Index cross_cap) {
    std::vector<VariableSpec> cats;
    std::vector<VariableSpec> kept;
    for (const auto& s : specs) {
        s.validate();
        if (s.kind == VariableKind::Categorical) {
            if (s.level_count() < 2) {
                std::cerr << "warning: dropping single-level categorical '" << s.name << "'\n";
                continue;
            }
            cats.push_back(s);
        }
        kept.push_back(s);
    }
    if (cats.empty()) return continuous;

    Eigen::Index combos = 1;
    for (const auto& c : cats) combos *= c.level_count();
    const Eigen::Index n0 = continuous.n();
    const bool full_cross = n0 * combos <= cross_cap;
    const Eigen::Index n = full_cross ? n0 * combos : n0;

    // Output columns follow the order of `specs` (minus dropped variables).
    DesignMatrix out;
    out.specs = kept;
    out.scaled = false;
    out.values.resize(n, static_cast<Eigen::Index>(kept.size()));

    Rng rng(seed);
    std::vector<int> codes(cats.size(), 0);
    for (Eigen::Index row = 0; row < n; ++row) {
        const Eigen::Index crow = full_cross ? row % n0 : row;
        if (full_cross) {
            Eigen::Index combo = row / n0;
            for (std::size_t c = 0; c < cats.size(); ++c) {
                codes[c] = static_cast<int>(combo % cats[c].level_count());
                combo /= cats[c].level_count();
            }
        } else {
            for (std::size_t c = 0; c < cats.size(); ++c)
                codes[c] = static_cast<int>(std::uniform_int_distribution<int>(0, cats[c].level_count() - 1)(rng));
        }
        Eigen::Index cont_idx = 0;
        std::size_t cat_idx = 0;
        for (std::size_t k = 0; k < kept.size(); ++k) {
            if (kept[k].kind == VariableKind::Continuous)
                out.values(row, static_cast<Eigen::Index>(k)) = continuous.values(crow, cont_idx++);
            else
                out.values(row, static_cast<Eigen::Index>(k)) = codes[cat_idx++];
        }
    }
    return out;
}

DesignMatrix scale_inputs(const DesignMatrix& design) {
    if (design.scaled) throw std::invalid_argument("scale_inputs: design already scaled");
    DesignMatrix out = design;
    for (Eigen::Index k = 0; k < design.p(); ++k) {
        const auto& s = design.specs[static_cast<std::size_t>(k)];
        double lo, hi;
        if (s.kind == VariableKind::Continuous) {
            lo = s.lower;
            hi = s.upper;
        } else {
            lo = 0.0;
            hi = static_cast<double>(s.level_count() - 1);
        }
        if (!(hi > lo))
            throw std::invalid_argument("scale_inputs: zero-width range for variable '" + s.name + "'");
        out.values.col(k) = 2.0 * (design.values.col(k).array() - lo) / (hi - lo) - 1.0;
    }
    out.scaled = true;
    return out;
}

DesignMatrix unscale_inputs(const DesignMatrix& design) {
    if (!design.scaled) throw std::invalid_argument("unscale_inputs: design not scaled");
    DesignMatrix out = design;
    for (Eigen::Index k = 0; k < design.p(); ++k) {
        const auto& s = design.specs[static_cast<std::size_t>(k)];
        const double lo = s.kind == VariableKind::Continuous ? s.lower : 0.0;
        const double hi = s.kind == VariableKind::Continuous ? s.upper : static_cast<double>(s.level_count() - 1);
        out.values.col(k) = (design.values.col(k).array() + 1.0) * 0.5 * (hi - lo) + lo;
    }
    out.scaled = false;
    return out;
}

OutputMatrix standardize_outputs(const OutputMatrix& outputs) {
    const Eigen::Index n = outputs.n();
    const Eigen::Index m = outputs.m();
    if (n < 2) throw std::invalid_argument("standardize_outputs: need n >= 2");
    OutputMatrix out;
    out.values.resize(n, m);
    out.column_means.resize(m);
    out.column_sds.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const double mean = outputs.values.col(j).mean();
        const double ss = (outputs.values.col(j).array() - mean).square().sum();
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (!(sd > 0.0))
            throw std::invalid_argument("standardize_outputs: constant output column " + std::to_string(j));
        out.values.col(j) = (outputs.values.col(j).array() - mean) / sd;
        out.column_means(j) = mean;
        out.column_sds(j) = sd;
    }
    out.standardized = true;
    return out;
}

OutputMatrix destandardize_outputs(const OutputMatrix& outputs) {
    if (!outputs.standardized) throw std::invalid_argument("destandardize_outputs: not standardized");
    OutputMatrix out = outputs;
    for (Eigen::Index j = 0; j < outputs.m(); ++j)
        out.values.col(j) = outputs.values.col(j).array() * outputs.column_sds(j) + outputs.column_means(j);
    out.standardized = false;
    return out;
}

Eigen::MatrixXd destandardize_predictions(const Eigen::MatrixXd& pred, const OutputMatrix& reference) {
    if (pred.cols() != reference.column_sds.size())
        throw std::invalid_argument("destandardize_predictions: column count mismatch");
    Eigen::MatrixXd out = pred;
    for (Eigen::Index j = 0; j < pred.cols(); ++j)
        out.col(j) = pred.col(j).array() * reference.column_sds(j) + reference.column_means(j);
    return out;
}

}  // namespace msgp
