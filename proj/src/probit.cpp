#include "rbmh/probit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "rbmh/rng.hpp"

namespace rbmh {

namespace {

const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

double log_norm_pdf(double t) { return -0.5 * t * t - kLogSqrt2Pi; }

/// phi(t) / Phi(t), the inverse Mills ratio.
double mills_ratio(double t) { return std::exp(log_norm_pdf(t) - log_norm_cdf(t)); }

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n\"");
    auto e = s.find_last_not_of(" \t\r\n\"");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::vector<std::string> split_fields(const std::string& line, bool comma) {
    std::vector<std::string> out;
    if (comma) {
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) out.push_back(trim(field));
    } else {
        std::stringstream ss(line);
        std::string field;
        while (ss >> field) out.push_back(trim(field));
    }
    return out;
}

int parse_outcome(const std::string& raw, const std::string& path, std::size_t line_no) {
    const std::string v = lower(trim(raw));
    if (v == "1" || v == "yes" || v == "true") return 1;
    if (v == "0" || v == "no" || v == "false") return 0;
    std::ostringstream msg;
    msg << path << ":" << line_no << ": unparseable outcome value '" << raw << "'";
    throw std::runtime_error(msg.str());
}

}  // namespace

void ProbitData::validate() const {
    if (y.empty()) throw std::invalid_argument("ProbitData: no observations");
    if (x.size() != y.size()) throw std::invalid_argument("ProbitData: size mismatch");
    const bool any1 = std::find(y.begin(), y.end(), 1) != y.end();
    const bool any0 = std::find(y.begin(), y.end(), 0) != y.end();
    if (!any0 || !any1)
        throw std::invalid_argument("ProbitData: single-class outcome, model not identifiable");
}

ProbitData make_probit_data(const std::vector<double>& bmi_raw, const std::vector<int>& outcomes) {
    if (bmi_raw.size() != outcomes.size() || bmi_raw.empty())
        throw std::invalid_argument("make_probit_data: size mismatch or empty");
    const double n = static_cast<double>(bmi_raw.size());
    double mean = 0.0;
    for (double v : bmi_raw) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : bmi_raw) ss += (v - mean) * (v - mean);
    const double sd = bmi_raw.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 1.0;

    ProbitData data;
    data.bmi_mean = mean;
    data.bmi_sd = sd;
    data.y = outcomes;
    data.x.reserve(bmi_raw.size());
    for (double v : bmi_raw) {
        const double std_v = sd > 0.0 ? (v - mean) / sd : 0.0;
        data.x.push_back({1.0, std_v});
    }
    data.validate();
    return data;
}

ProbitData load_pima(const std::string& path, const ProbitLoadSpec& spec) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_pima: cannot open '" + path + "'");
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("load_pima: empty file '" + path + "'");
    const bool comma = header.find(',') != std::string::npos;
    const auto columns = split_fields(header, comma);
    auto find_col = [&](const std::string& name) {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (lower(columns[i]) == lower(name)) return static_cast<std::ptrdiff_t>(i);
        throw std::runtime_error("load_pima: missing column '" + name + "' in '" + path + "'");
    };
    const auto bmi_idx = find_col(spec.bmi_column);
    const auto out_idx = find_col(spec.outcome_column);

    std::vector<double> bmi;
    std::vector<int> outcome;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line, comma);
        if (static_cast<std::ptrdiff_t>(fields.size()) <= std::max(bmi_idx, out_idx)) {
            std::ostringstream msg;
            msg << path << ":" << line_no << ": expected at least "
                << std::max(bmi_idx, out_idx) + 1 << " fields, got " << fields.size();
            throw std::runtime_error(msg.str());
        }
        try {
            std::size_t pos = 0;
            const std::string& f = fields[static_cast<std::size_t>(bmi_idx)];
            const double v = std::stod(f, &pos);
            if (pos != f.size()) throw std::invalid_argument(f);
            bmi.push_back(v);
        } catch (const std::exception&) {
            std::ostringstream msg;
            msg << path << ":" << line_no << ": unparseable BMI value '"
                << fields[static_cast<std::size_t>(bmi_idx)] << "'";
            throw std::runtime_error(msg.str());
        }
        outcome.push_back(parse_outcome(fields[static_cast<std::size_t>(out_idx)], path, line_no));
    }
    if (bmi.empty()) throw std::runtime_error("load_pima: no data rows in '" + path + "'");
    return make_probit_data(bmi, outcome);
}

ProbitData generate_probit_data(std::int64_t n_obs, const std::array<double, 2>& beta,
                                std::uint64_t seed) {
    if (n_obs < 2) throw std::invalid_argument("generate_probit_data: need n_obs >= 2");
    RngStream rng(seed);
    std::vector<double> covariate(static_cast<std::size_t>(n_obs));
    for (auto& v : covariate) v = rng.normal();
    // Standardize first so the generating beta refers to the fitted scale.
    ProbitData data = make_probit_data(covariate, std::vector<int>(covariate.size(), 0));
    for (std::size_t i = 0; i < data.x.size(); ++i) {
        const double t = beta[0] + beta[1] * data.x[i][1];
        data.y[i] = (t + rng.normal() > 0.0) ? 1 : 0;
    }
    data.validate();
    return data;
}

void save_probit_csv(const ProbitData& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_probit_csv: cannot write '" + path + "'");
    out << "bmi,type\n";
    char buf[64];
    for (std::size_t i = 0; i < data.x.size(); ++i) {
        // Undo standardization so the file round-trips through load_pima.
        const double raw = data.x[i][1] * data.bmi_sd + data.bmi_mean;
        std::snprintf(buf, sizeof(buf), "%.10g", raw);
        out << buf << ',' << data.y[i] << '\n';
    }
}

double log_norm_cdf(double t) {
    if (t >= -27.0) {
        return std::log(0.5 * std::erfc(-t / std::numbers::sqrt2));
    }
    // Asymptotic expansion of the Mills ratio for deep negative arguments,
    // where erfc would lose accuracy and eventually underflow.
    const double t2 = t * t;
    const double series =
        1.0 - 1.0 / t2 + 3.0 / (t2 * t2) - 15.0 / (t2 * t2 * t2) + 105.0 / (t2 * t2 * t2 * t2);
    return log_norm_pdf(t) - std::log(-t) + std::log(series);
}

double log_posterior(const std::array<double, 2>& beta, const ProbitData& data) {
    if (!std::isfinite(beta[0]) || !std::isfinite(beta[1]))
        throw std::invalid_argument("log_posterior: non-finite coefficient");
    double ll = 0.0;
    for (std::size_t i = 0; i < data.x.size(); ++i) {
        const double t = beta[0] * data.x[i][0] + beta[1] * data.x[i][1];
        ll += data.y[i] ? log_norm_cdf(t) : log_norm_cdf(-t);
    }
    return ll;
}

std::array<double, 2> grad_log_posterior(const std::array<double, 2>& beta,
                                         const ProbitData& data) {
    std::array<double, 2> g{0.0, 0.0};
    for (std::size_t i = 0; i < data.x.size(); ++i) {
        const double t = beta[0] * data.x[i][0] + beta[1] * data.x[i][1];
        const double gi = data.y[i] ? mills_ratio(t) : -mills_ratio(-t);
        g[0] += gi * data.x[i][0];
        g[1] += gi * data.x[i][1];
    }
    return g;
}

namespace {

// Per-observation negative curvature weight; positive by log-concavity.
double curvature_weight(int y, double t) {
    if (y) {
        const double m = mills_ratio(t);
        return m * (t + m);
    }
    const double m = mills_ratio(-t);
    return m * (m - t);
}

}  // namespace

MleResult fit_mle_detail(const ProbitData& data) {
    data.validate();
    std::array<double, 2> beta{0.0, 0.0};
    double nll = -log_posterior(beta, data);
    std::ostringstream trace;
    MleResult result;

    for (int iter = 1; iter <= 100; ++iter) {
        const auto g = grad_log_posterior(beta, data);
        double h00 = 0.0, h01 = 0.0, h11 = 0.0;  // Fisher information terms
        for (std::size_t i = 0; i < data.x.size(); ++i) {
            const double t = beta[0] * data.x[i][0] + beta[1] * data.x[i][1];
            const double w = curvature_weight(data.y[i], t);
            h00 += w * data.x[i][0] * data.x[i][0];
            h01 += w * data.x[i][0] * data.x[i][1];
            h11 += w * data.x[i][1] * data.x[i][1];
        }
        const double grad_norm = std::sqrt(g[0] * g[0] + g[1] * g[1]);
        trace << "iter " << iter << ": beta=(" << beta[0] << ", " << beta[1]
              << ") |grad|=" << grad_norm << "\n";
        if (grad_norm < 1e-8) {
            result.beta = beta;
            result.iterations = iter;
            result.fisher_info = {{{h00, h01}, {h01, h11}}};
            const double det = h00 * h11 - h01 * h01;
            if (det <= 0.0) throw std::runtime_error("fit_mle: singular information matrix");
            result.standard_errors = {std::sqrt(h11 / det), std::sqrt(h00 / det)};
            return result;
        }
        const double det = h00 * h11 - h01 * h01;
        if (det <= 0.0) throw std::runtime_error("fit_mle: singular information matrix");
        std::array<double, 2> step{(h11 * g[0] - h01 * g[1]) / det,
                                   (h00 * g[1] - h01 * g[0]) / det};
        // Newton with step halving on the negative log-likelihood.
        double scale = 1.0;
        bool improved = false;
        for (int half = 0; half < 40; ++half) {
            const std::array<double, 2> cand{beta[0] + scale * step[0], beta[1] + scale * step[1]};
            const double cand_nll = -log_posterior(cand, data);
            if (cand_nll < nll) {
                beta = cand;
                nll = cand_nll;
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if (!improved) {
            throw std::runtime_error("fit_mle: line search failed to improve; trace:\n" +
                                     trace.str());
        }
    }
    throw std::runtime_error("fit_mle: no convergence within 100 iterations; trace:\n" +
                             trace.str());
}

std::array<double, 2> fit_mle(const ProbitData& data) { return fit_mle_detail(data).beta; }

Model make_probit_model(std::shared_ptr<const ProbitData> data, double tau) {
    if (!data) throw std::invalid_argument("make_probit_model: null data");
    if (!(tau > 0.0)) throw std::invalid_argument("make_probit_model: tau must be positive");
    data->validate();
    Model m;
    m.name = "probit";
    m.target.dimension = 2;
    m.target.log_density = [data](const State& s) {
        return log_posterior({s.real(0), s.real(1)}, *data);
    };
    m.proposal.kind = ProposalKind::SymmetricRandomWalk;
    m.proposal.sample = [tau](const State& x, RngStream& rng) {
        return State::real2(x.real(0) + tau * rng.normal(), x.real(1) + tau * rng.normal());
    };
    m.proposal.log_density = [tau](const State& y, const State& x) {
        const double d0 = (y.real(0) - x.real(0)) / tau;
        const double d1 = (y.real(1) - x.real(1)) / tau;
        return -0.5 * (d0 * d0 + d1 * d1) - 2.0 * std::log(tau) - 2.0 * kLogSqrt2Pi;
    };
    const auto mle = fit_mle(*data);
    m.draw_initial = [mle](RngStream&) { return State::real2(mle[0], mle[1]); };
    return m;
}

}  // namespace rbmh
