#include "rbmh/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include "rbmh/stats.hpp"

namespace rbmh {

namespace {

double check_finite(double v, const char* what) {
    if (std::isnan(v)) throw std::runtime_error(std::string(what) + " returned NaN");
    return v;
}

double block_weight(const AcceptedBlock& b, int order) {
    const auto it = b.weights.find(order);
    if (it == b.weights.end())
        throw std::invalid_argument("block is missing the requested weight order");
    if (!(it->second >= 1.0))
        throw std::invalid_argument("block weight below 1 (weights are 1 plus a nonnegative sum)");
    return it->second;
}

BlockFunc lift(const StateFunc& f) {
    return [f](const AcceptedBlock& b) { return f(b.z); };
}

}  // namespace

HSpec resolve_h(const std::string& name) {
    HSpec spec;
    spec.name = name;
    if (name == "x") {
        spec.state_fn = [](const State& s) { return s.scalar(); };
    } else if (name == "x2") {
        spec.state_fn = [](const State& s) {
            const double v = s.scalar();
            return v * v;
        };
    } else if (name == "ind_gt0") {
        spec.state_fn = [](const State& s) { return s.scalar() > 0.0 ? 1.0 : 0.0; };
    } else if (name == "ind_gt1") {
        spec.state_fn = [](const State& s) { return s.scalar() > 1.0 ? 1.0 : 0.0; };
    } else if (name == "beta1") {
        spec.state_fn = [](const State& s) { return s.real(0); };
    } else if (name == "beta2") {
        spec.state_fn = [](const State& s) { return s.real(1); };
    } else if (name == "ind_beta2_gt0.5") {
        spec.state_fn = [](const State& s) { return s.real(1) > 0.5 ? 1.0 : 0.0; };
    } else if (name == "p_proxy") {
        spec.needs_cv = true;
        spec.block_fn = [](const AcceptedBlock& b) {
            if (!b.cv_draw)
                throw std::invalid_argument("p_proxy requires control-variate draws");
            return *b.cv_draw;
        };
        return spec;
    } else {
        throw std::invalid_argument("unknown test function '" + name + "'");
    }
    spec.block_fn = lift(spec.state_fn);
    return spec;
}

double delta_plain(const ChainRecord& record, const StateFunc& h) {
    if (record.path.empty()) throw std::invalid_argument("delta_plain: empty path");
    double sum = 0.0;
    for (const auto& s : record.path) sum += check_finite(h(s), "delta_plain: h");
    return sum / static_cast<double>(record.path.size());
}

double delta_plain_blocks(std::span<const AcceptedBlock> blocks, std::int64_t n_budget,
                          const StateFunc& h) {
    if (blocks.empty()) throw std::invalid_argument("delta_plain_blocks: no blocks");
    double sum = 0.0;
    std::int64_t count = 0;
    for (const auto& b : blocks) {
        const double hv = check_finite(h(b.z), "delta_plain_blocks: h");
        // Repeated addition, not n * h: keeps this route bit-identical to
        // the path-form sum.
        for (std::int64_t i = 0; i < b.n_occupation; ++i) sum += hv;
        count += b.n_occupation;
    }
    if (count != n_budget)
        throw std::invalid_argument("delta_plain_blocks: occupation counts do not sum to budget");
    return sum / static_cast<double>(n_budget);
}

double delta_weighted(std::span<const AcceptedBlock> blocks, int order, const BlockFunc& h) {
    if (blocks.empty()) throw std::invalid_argument("delta_weighted: no blocks");
    double num = 0.0, den = 0.0;
    for (const auto& b : blocks) {
        const double w = block_weight(b, order);
        num += w * check_finite(h(b), "delta_weighted: h");
        den += w;
    }
    return num / den;
}

double delta_weighted(std::span<const AcceptedBlock> blocks, std::span<const double> weights,
                      const BlockFunc& h) {
    if (blocks.empty()) throw std::invalid_argument("delta_weighted: no blocks");
    if (blocks.size() != weights.size())
        throw std::invalid_argument("delta_weighted: weight count mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (!(weights[i] >= 1.0)) throw std::invalid_argument("delta_weighted: weight below 1");
        num += weights[i] * check_finite(h(blocks[i]), "delta_weighted: h");
        den += weights[i];
    }
    return num / den;
}

double delta_oracle(std::span<const AcceptedBlock> blocks, const AnalyticOracle& oracle,
                    const BlockFunc& h) {
    if (blocks.empty()) throw std::invalid_argument("delta_oracle: no blocks");
    if (!oracle.p_exact) throw std::invalid_argument("delta_oracle: oracle lacks p_exact");
    double num = 0.0, den = 0.0;
    for (const auto& b : blocks) {
        const double w = 1.0 / oracle.p_exact(b.z);
        num += w * check_finite(h(b), "delta_oracle: h");
        den += w;
    }
    return num / den;
}

CvAdjusted delta_cv(std::span<const AcceptedBlock> blocks, int order, const BlockFunc& h) {
    if (blocks.size() < 2) throw std::invalid_argument("delta_cv: need at least two blocks");
    const auto n = blocks.size();
    std::vector<double> terms(n), control(n);
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = block_weight(blocks[i], order);
        if (!blocks[i].cv_draw)
            throw std::invalid_argument("delta_cv: control-variate draw missing on a block");
        terms[i] = w * check_finite(h(blocks[i]), "delta_cv: h");
        control[i] = w * *blocks[i].cv_draw;
        weight_sum += w;
    }
    CvAdjusted out;
    const double control_var = stats::sample_variance(control);
    if (control_var < 1e-24) {
        // Degenerate control (alpha identically 1): nothing to regress out.
        out.fallback = true;
        out.components = terms;
        double num = 0.0;
        for (double t : terms) num += t;
        out.value = num / weight_sum;
        return out;
    }
    out.slope = stats::ols_slope(terms, control);
    out.components.resize(n);
    double adj_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        // The control's expectation is known to be exactly 1.
        out.components[i] = terms[i] - out.slope * (control[i] - 1.0);
        adj_sum += out.components[i];
    }
    out.value = adj_sum / weight_sum;
    return out;
}

double component_variance_ratio(std::span<const AcceptedBlock> blocks, int order,
                                const BlockFunc& h) {
    if (blocks.size() < 2)
        throw std::invalid_argument("component_variance_ratio: need at least two blocks");
    const auto num = weighted_components(blocks, order, h);
    const auto den = count_components(blocks, h);
    const double den_var = stats::sample_variance(den);
    if (den_var == 0.0)
        throw std::domain_error("component_variance_ratio: zero denominator variance");
    return stats::sample_variance(num) / den_var;
}

std::vector<double> weighted_components(std::span<const AcceptedBlock> blocks, int order,
                                        const BlockFunc& h) {
    std::vector<double> out;
    out.reserve(blocks.size());
    for (const auto& b : blocks)
        out.push_back(block_weight(b, order) * check_finite(h(b), "weighted_components: h"));
    return out;
}

std::vector<double> count_components(std::span<const AcceptedBlock> blocks, const BlockFunc& h) {
    std::vector<double> out;
    out.reserve(blocks.size());
    for (const auto& b : blocks)
        out.push_back(static_cast<double>(b.n_occupation) *
                      check_finite(h(b), "count_components: h"));
    return out;
}

std::vector<double> oracle_components(std::span<const AcceptedBlock> blocks,
                                      const AnalyticOracle& oracle, const BlockFunc& h) {
    std::vector<double> out;
    out.reserve(blocks.size());
    for (const auto& b : blocks)
        out.push_back(check_finite(h(b), "oracle_components: h") / oracle.p_exact(b.z));
    return out;
}

}  // namespace rbmh
