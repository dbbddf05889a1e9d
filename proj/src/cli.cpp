#include "rbmh/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rbmh/chain.hpp"
#include "rbmh/estimators.hpp"
#include "rbmh/experiment.hpp"
#include "rbmh/models.hpp"
#include "rbmh/stats.hpp"
#include "rbmh/weights.hpp"

namespace rbmh {

namespace {

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    nlohmann::json j;
    in >> j;
    return j;
}

int parse_order_flag(const std::string& s) {
    if (s == "inf" || s == "infinity") return kInfiniteOrder;
    return std::stoi(s);
}

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    std::optional<int> threads;
    std::optional<std::int64_t> iterations;
    std::optional<int> replications;
    std::optional<std::string> model;
    std::vector<double> scales;
    std::vector<std::string> k_list;
    std::vector<std::string> h_list;
};

int cmd_run(const std::string& config_path, const RunOverrides& ov, std::ostream& out,
            std::ostream& err) {
    nlohmann::json doc;
    try {
        doc = read_json_file(config_path);
    } catch (const std::exception& e) {
        err << "run: " << e.what() << "\n";
        return 1;
    }
    try {
        ExperimentConfig config = ExperimentConfig::from_json(doc);
        if (ov.model) config.model = *ov.model;
        if (ov.seed) {
            config.seed = *ov.seed;
            config.seed_set = true;
        }
        if (ov.output_dir) config.output_dir = *ov.output_dir;
        if (ov.threads) config.threads = *ov.threads;
        if (ov.iterations) config.iterations = *ov.iterations;
        if (ov.replications) config.replications = *ov.replications;
        if (!ov.scales.empty()) config.scales = ov.scales;
        if (!ov.k_list.empty()) {
            config.k_list.clear();
            for (const auto& s : ov.k_list) config.k_list.push_back(parse_order_flag(s));
        }
        if (!ov.h_list.empty()) config.h_list = ov.h_list;
        if (config.output_dir.empty()) {
            if (const char* env = std::getenv("RBMH_OUTPUT_DIR")) config.output_dir = env;
        }
        if (config.output_dir.empty()) config.output_dir = "rbmh_out";
        config.validate();

        const ExperimentReport report = run_experiment(config);
        write_outputs(report, config.output_dir);
        out << render_text_tables(report.to_json());
        out << "proposals: path=" << report.totals.path_proposals
            << " weights=" << report.totals.weight_proposals
            << " cv=" << report.totals.cv_draws << " total=" << report.totals.total() << "\n";
        if (!report.wall_ms.empty()) {
            std::vector<double> t = report.wall_ms;
            out << "replication wall time: median=" << stats::quantile(t, 0.5)
                << " ms, mean=" << stats::mean(t) << " ms (informational only)\n";
        }
        out << "wrote " << config.output_dir << "/report.json\n";
        return 0;
    } catch (const std::exception& e) {
        err << "run: " << e.what() << "\n";
        return 1;
    }
}

int cmd_tables(const std::string& report_path, const std::string& output_dir, std::ostream& out,
               std::ostream& err) {
    try {
        const auto report = read_json_file(report_path);
        out << render_text_tables(report);
        if (!output_dir.empty()) {
            write_tables_from_json(report, output_dir);
            out << "wrote table files to " << output_dir << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        err << "tables: " << e.what() << "\n";
        return 1;
    }
}

int cmd_figures(const std::string& report_path, const std::string& output_dir, std::ostream& out,
                std::ostream& err) {
    try {
        const auto report = read_json_file(report_path);
        write_figures_from_json(report, output_dir);
        out << "wrote envelope files to " << output_dir << "\n";
        return 0;
    } catch (const std::exception& e) {
        err << "figures: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int run_selftest(std::ostream& out) {
    int failures = 0;
    auto check = [&](bool ok, const std::string& what) {
        out << (ok ? "ok:   " : "FAIL: ") << what << "\n";
        if (!ok) ++failures;
    };

    // Closed-form p and r of the exponential model against quadrature of
    // their defining integrals.
    {
        const double lambda = 1.0, mu = 0.5;
        const Model model = make_exp_independence(lambda, mu);
        const double upper = -std::log(1e-13) / mu;
        double worst = 0.0;
        for (double z : {0.0, 0.5, 1.0, 2.0, 4.0}) {
            const State zs = State::real1(z);
            auto alpha = [&](double y) {
                return acceptance_prob(zs, State::real1(y), model.target, model.proposal);
            };
            auto q_density = [&](double y) { return mu * std::exp(-mu * y); };
            const double p_quad =
                stats::integrate([&](double y) { return alpha(y) * q_density(y); }, 0.0, upper);
            const double r_quad = stats::integrate(
                [&](double y) { return alpha(y) * alpha(y) * q_density(y); }, 0.0, upper);
            worst = std::max(worst, std::abs(p_quad - model.target.oracle->p_exact(zs)));
            worst = std::max(worst, std::abs(r_quad - model.target.oracle->r_exact(zs)));
        }
        check(worst < 1e-8, "exponential closed-form p, r match quadrature (err " +
                                std::to_string(worst) + ")");
    }

    // Gain formula vs the closed-form variance difference.
    {
        double worst = 0.0;
        for (int i = 1; i <= 99; ++i) {
            const double beta = i / 100.0;
            const PRPair pr{geometric_p(beta), geometric_r(beta)};
            const double direct = var_xi_k_closed(pr, 0) - var_xi_inf_closed(pr);
            worst = std::max(worst, std::abs(direct - geometric_gain_absolute(beta)));
        }
        check(worst < 1e-10, "geometric gain identity var0 - varinf (err " +
                                 std::to_string(worst) + ")");
    }

    // Variance formula nonincreasing in k.
    {
        bool mono = true;
        for (double p : {0.15, 0.35, 0.55, 0.75, 0.95}) {
            for (double frac : {0.1, 0.5, 0.9}) {
                const double r_lo = std::max(1e-9, 2.0 * p - 1.0);
                const double r = r_lo + frac * (p - r_lo);
                const PRPair pr{p, r};
                double prev = var_xi_k_closed(pr, 0);
                for (int k = 1; k <= 40; ++k) {
                    const double cur = var_xi_k_closed(pr, k);
                    if (cur > prev + 1e-12) mono = false;
                    prev = cur;
                }
                if (var_xi_inf_closed(pr) > prev + 1e-12) mono = false;
            }
        }
        check(mono, "closed-form variance nonincreasing in k");
    }

    // Exact reversibility of the geometric model's accepted-state kernel.
    {
        const double beta = 0.3;
        const Model model = make_geometric_rw(beta);
        const int K = 50;
        double worst = 0.0;
        auto pi = [&](int x) { return std::exp(model.target.log_density(State::integer(x))); };
        auto q = [&](int y, int x) {
            return std::exp(model.proposal.log_density(State::integer(y), State::integer(x)));
        };
        auto alpha = [&](int x, int y) {
            return acceptance_prob(State::integer(x), State::integer(y), model.target,
                                   model.proposal);
        };
        for (int x = 0; x <= K; ++x) {
            for (int y : {x - 1, x, x + 1}) {
                if (y < 0 || y > K) continue;
                const double lhs = pi(x) * alpha(x, y) * q(y, x);
                const double rhs = pi(y) * alpha(y, x) * q(x, y);
                worst = std::max(worst, std::abs(lhs - rhs));
            }
        }
        check(worst < 1e-12, "geometric z-kernel detailed balance (err " +
                                 std::to_string(worst) + ")");
    }

    // Unbiasedness smoke test: order-0 weight at z = 0 of the Exp(1)/Exp(.5)
    // model has mean 1/p(0) = 2.
    {
        const Model model = make_exp_independence(1.0, 0.5);
        RngStream rng(20240917);
        WeightSpec spec;
        spec.order = 0;
        const int n = 20000;
        std::vector<double> draws(n);
        for (auto& d : draws)
            d = xi_hat_k(State::real1(0.0), spec, model.target, model.proposal, rng).xi;
        const double m = stats::mean(draws);
        const double se = stats::mean_se(draws);
        check(std::abs(m - 2.0) < 4.0 * se,
              "order-0 weight unbiased for 1/p (mean " + std::to_string(m) + ")");
    }

    // Path/block representation identity on a random chain.
    {
        const Model model = make_gaussian_rw(2.0);
        const auto rec = run_chain(model.target, model.proposal, State::real1(0.3), 5000, 99);
        const auto h = resolve_h("x2");
        const double path_form = delta_plain(rec, h.state_fn);
        const double block_form = delta_plain_blocks(rec.blocks, rec.n_budget, h.state_fn);
        check(path_form == block_form, "path-form and block-form estimates identical");
        const auto redone = decompose_chain(rec.path);
        check(expand_blocks(redone.blocks) == rec.path, "decompose/expand round trip");
    }

    // Acceptance probability spot value: two independent routes.
    {
        const Model model = make_gaussian_rw(1.0);
        const double direct =
            acceptance_prob(State::real1(0.0), State::real1(1.0), model.target, model.proposal);
        check(std::abs(direct - std::exp(-0.5)) < 1e-15,
              "gaussian acceptance alpha(0,1) = exp(-1/2)");
    }

    out << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
    return failures;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Metropolis-Hastings benchmark harness with Rao-Blackwellised weights"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a configured experiment and write its report");
    std::string config_path;
    RunOverrides ov;
    run->add_option("--config", config_path, "JSON experiment config")->required();
    std::uint64_t seed_val = 0;
    auto* seed_opt = run->add_option("--seed", seed_val, "base seed (overrides config)");
    std::string outdir_val;
    auto* outdir_opt = run->add_option("--output-dir", outdir_val, "output directory");
    int threads_val = 0;
    auto* threads_opt = run->add_option("--threads", threads_val, "worker threads (0 = auto)");
    std::int64_t iters_val = 0;
    auto* iters_opt = run->add_option("--iterations", iters_val, "chain length per replication");
    int reps_val = 0;
    auto* reps_opt = run->add_option("--replications", reps_val, "replication count");
    std::string model_val;
    auto* model_opt = run->add_option("--model", model_val, "model name");
    run->add_option("--scales", ov.scales, "proposal scales");
    run->add_option("--k-list", ov.k_list, "weight orders (integers or 'inf')");
    run->add_option("--h-list", ov.h_list, "test function names");

    auto* tables = app.add_subcommand("tables", "render table files from a report.json");
    std::string tables_report, tables_out;
    tables->add_option("--report", tables_report, "path to report.json")->required();
    tables->add_option("--output-dir", tables_out, "directory for CSV output");

    auto* figures = app.add_subcommand("figures", "render envelope files from a report.json");
    std::string figures_report, figures_out = ".";
    figures->add_option("--report", figures_report, "path to report.json")->required();
    figures->add_option("--output-dir", figures_out, "directory for CSV output");

    auto* selftest = app.add_subcommand("selftest", "run the built-in oracle checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    if (run->parsed()) {
        if (*seed_opt) ov.seed = seed_val;
        if (*outdir_opt) ov.output_dir = outdir_val;
        if (*threads_opt) ov.threads = threads_val;
        if (*iters_opt) ov.iterations = iters_val;
        if (*reps_opt) ov.replications = reps_val;
        if (*model_opt) ov.model = model_val;
        return cmd_run(config_path, ov, out, err);
    }
    if (tables->parsed()) return cmd_tables(tables_report, tables_out, out, err);
    if (figures->parsed()) return cmd_figures(figures_report, figures_out, out, err);
    if (selftest->parsed()) return run_selftest(out) == 0 ? 0 : 1;
    err << "no subcommand given\n";
    return 1;
}

}  // namespace rbmh
