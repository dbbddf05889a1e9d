#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "json.hpp"
#include "rbmh/chain.hpp"
#include "rbmh/cli.hpp"
#include "rbmh/estimators.hpp"
#include "rbmh/experiment.hpp"
#include "rbmh/models.hpp"
#include "rbmh/probit.hpp"
#include "rbmh/weights.hpp"

namespace py = pybind11;
using namespace rbmh;

namespace {

State state_from_object(const py::object& obj) {
    if (py::isinstance<State>(obj)) return obj.cast<State>();
    if (py::isinstance<py::bool_>(obj)) throw py::type_error("state cannot be a bool");
    if (py::isinstance<py::int_>(obj)) return State::integer(obj.cast<std::int64_t>());
    if (py::isinstance<py::float_>(obj)) return State::real1(obj.cast<double>());
    if (py::isinstance<py::sequence>(obj))
        return State::reals(obj.cast<std::vector<double>>());
    throw py::type_error("state must be an int, float, sequence of floats, or State");
}

py::object state_to_object(const State& s) {
    if (s.is_integer()) return py::int_(s.as_integer());
    const auto& v = s.as_reals();
    if (v.size() == 1) return py::float_(v[0]);
    return py::cast(v);
}

WeightSpec make_spec(int order, std::int64_t max_proposals, double product_floor) {
    WeightSpec spec;
    spec.order = order;
    spec.max_proposals = max_proposals;
    spec.product_floor = product_floor;
    return spec;
}

ChainRecord run_weighted_chain(const Model& model, const py::object& x0, std::int64_t n,
                               std::uint64_t seed, const std::vector<int>& orders,
                               bool control_variate) {
    ChainRngs rngs = ChainRngs::from_seed(seed);
    ChainRecord rec =
        run_chain(model.target, model.proposal, state_from_object(x0), n, seed, rngs);
    if (!orders.empty()) {
        WeightSpec spec;
        attach_weights(rec.complete_blocks(), orders, spec, model.target, model.proposal,
                       rngs.weights);
    }
    if (control_variate)
        attach_control_variates(rec.complete_blocks(), model.target, model.proposal,
                                rngs.control_variate);
    return rec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Metropolis-Hastings sampling with Rao-Blackwellised occupation weights";

    m.attr("INF_ORDER") = kInfiniteOrder;

    py::class_<State>(m, "State")
        .def(py::init([](const py::object& obj) { return state_from_object(obj); }))
        .def_property_readonly("is_integer", &State::is_integer)
        .def("value", [](const State& s) { return state_to_object(s); })
        .def("__eq__", [](const State& a, const State& b) { return a == b; })
        .def("__repr__", [](const State& s) {
            return "State(" + py::str(state_to_object(s)).cast<std::string>() + ")";
        });
    py::implicitly_convertible<py::object, State>();

    py::class_<RngStream>(m, "RngStream")
        .def(py::init<std::uint64_t>())
        .def_static("substream", &RngStream::substream)
        .def("uniform", &RngStream::uniform)
        .def("normal", &RngStream::normal)
        .def("exponential", &RngStream::exponential);

    py::class_<AcceptedBlock>(m, "AcceptedBlock")
        .def_property_readonly("z", [](const AcceptedBlock& b) { return state_to_object(b.z); })
        .def_readonly("n_occupation", &AcceptedBlock::n_occupation)
        .def_readonly("weights", &AcceptedBlock::weights)
        .def_readonly("cv_draw", &AcceptedBlock::cv_draw);

    py::class_<ChainRecord>(m, "ChainRecord")
        .def_property_readonly("path",
                               [](const ChainRecord& r) {
                                   py::list out;
                                   for (const auto& s : r.path) out.append(state_to_object(s));
                                   return out;
                               })
        .def_readonly("blocks", &ChainRecord::blocks)
        .def_readonly("n_budget", &ChainRecord::n_budget)
        .def_readonly("m", &ChainRecord::m)
        .def_readonly("m_complete", &ChainRecord::m_complete)
        .def_readonly("seed", &ChainRecord::seed)
        .def_readonly("acceptance_rate", &ChainRecord::acceptance_rate);

    py::class_<Model>(m, "Model")
        .def_readonly("name", &Model::name)
        .def_property_readonly("has_oracle",
                               [](const Model& m_) { return m_.target.oracle != nullptr; })
        .def("log_density",
             [](const Model& m_, const py::object& s) {
                 return m_.target.log_density(state_from_object(s));
             })
        .def("p_exact",
             [](const Model& m_, const py::object& s) {
                 if (!m_.target.oracle) throw py::value_error("model has no closed-form oracle");
                 return m_.target.oracle->p_exact(state_from_object(s));
             })
        .def("r_exact", [](const Model& m_, const py::object& s) {
            if (!m_.target.oracle) throw py::value_error("model has no closed-form oracle");
            return m_.target.oracle->r_exact(state_from_object(s));
        });

    m.def("make_gaussian_rw", &make_gaussian_rw, py::arg("tau"));
    m.def("make_cauchy_independence", &make_cauchy_independence, py::arg("tau"));
    m.def("make_exp_independence", &make_exp_independence, py::arg("lambda_"), py::arg("mu"));
    m.def("make_geometric_rw", &make_geometric_rw, py::arg("beta"));
    m.def("geometric_p", &geometric_p);
    m.def("geometric_r", &geometric_r);
    m.def("geometric_gain_absolute", &geometric_gain_absolute);
    m.def("geometric_gain_relative", &geometric_gain_relative);

    m.def(
        "acceptance_prob",
        [](const Model& model, const py::object& x, const py::object& y) {
            return acceptance_prob(state_from_object(x), state_from_object(y), model.target,
                                   model.proposal);
        },
        py::arg("model"), py::arg("x"), py::arg("y"));

    m.def(
        "run_chain",
        [](const Model& model, const py::object& x0, std::int64_t n, std::uint64_t seed) {
            return run_chain(model.target, model.proposal, state_from_object(x0), n, seed);
        },
        py::arg("model"), py::arg("x0"), py::arg("n"), py::arg("seed"));

    m.def("run_weighted_chain", &run_weighted_chain, py::arg("model"), py::arg("x0"),
          py::arg("n"), py::arg("seed"), py::arg("orders"),
          py::arg("control_variate") = false,
          "run_chain plus weight/control-variate attachment on the complete blocks");

    m.def(
        "xi_hat_k",
        [](const Model& model, const py::object& z, int order, RngStream& rng,
           std::int64_t max_proposals, double product_floor) {
            const auto res = xi_hat_k(state_from_object(z),
                                      make_spec(order, max_proposals, product_floor),
                                      model.target, model.proposal, rng);
            return py::make_tuple(res.xi, res.proposals_used, res.truncated);
        },
        py::arg("model"), py::arg("z"), py::arg("order"), py::arg("rng"),
        py::arg("max_proposals") = 1'000'000, py::arg("product_floor") = 1e-12,
        "returns (xi, proposals_used, truncated)");

    m.def("var_xi_k_closed",
          [](double p, double r, int k) { return var_xi_k_closed(PRPair{p, r}, k); });
    m.def("var_xi_inf_closed", [](double p, double r) { return var_xi_inf_closed(PRPair{p, r}); });

    m.def(
        "control_variate_draw",
        [](const Model& model, const py::object& z, RngStream& rng) {
            return control_variate_draw(state_from_object(z), model.target, model.proposal, rng);
        },
        py::arg("model"), py::arg("z"), py::arg("rng"));

    m.def(
        "delta_plain",
        [](const ChainRecord& rec, const std::string& h) {
            return delta_plain(rec, resolve_h(h).state_fn);
        },
        py::arg("record"), py::arg("h"));
    m.def(
        "delta_k",
        [](const ChainRecord& rec, int order, const std::string& h) {
            return delta_weighted(rec.complete_blocks(), order, resolve_h(h).block_fn);
        },
        py::arg("record"), py::arg("order"), py::arg("h"));
    m.def(
        "delta_oracle",
        [](const ChainRecord& rec, const Model& model, const std::string& h) {
            if (!model.target.oracle) throw py::value_error("model has no closed-form oracle");
            return delta_oracle(rec.complete_blocks(), *model.target.oracle,
                                resolve_h(h).block_fn);
        },
        py::arg("record"), py::arg("model"), py::arg("h"));
    m.def(
        "component_variance_ratio",
        [](const ChainRecord& rec, int order, const std::string& h) {
            return component_variance_ratio(rec.complete_blocks(), order, resolve_h(h).block_fn);
        },
        py::arg("record"), py::arg("order"), py::arg("h"));

    py::class_<ProbitData>(m, "ProbitData")
        .def_property_readonly("n_obs", &ProbitData::n_obs)
        .def_readonly("bmi_mean", &ProbitData::bmi_mean)
        .def_readonly("bmi_sd", &ProbitData::bmi_sd);
    m.def(
        "load_pima",
        [](const std::string& path, const std::string& bmi_column,
           const std::string& outcome_column) {
            return load_pima(path, ProbitLoadSpec{bmi_column, outcome_column});
        },
        py::arg("path"), py::arg("bmi_column") = "bmi", py::arg("outcome_column") = "type");
    m.def("generate_probit_data", &generate_probit_data, py::arg("n_obs"), py::arg("beta"),
          py::arg("seed"));
    m.def("save_probit_csv", &save_probit_csv, py::arg("data"), py::arg("path"));
    m.def(
        "log_posterior",
        [](const std::array<double, 2>& beta, const ProbitData& data) {
            return log_posterior(beta, data);
        },
        py::arg("beta"), py::arg("data"));
    m.def("fit_mle", [](const ProbitData& data) { return fit_mle(data); });
    m.def(
        "make_probit_model",
        [](const ProbitData& data, double tau) {
            return make_probit_model(std::make_shared<ProbitData>(data), tau);
        },
        py::arg("data"), py::arg("tau"));

    m.def(
        "run_experiment_json",
        [](const std::string& config_json) {
            const auto doc = nlohmann::json::parse(config_json);
            const auto report = run_experiment(ExperimentConfig::from_json(doc));
            return report.to_json().dump();
        },
        py::arg("config_json"), "run an experiment from a JSON config string; returns JSON");

    m.def(
        "run_experiment_to_dir",
        [](const std::string& config_json, const std::string& output_dir) {
            const auto doc = nlohmann::json::parse(config_json);
            auto config = ExperimentConfig::from_json(doc);
            config.output_dir = output_dir;
            const auto report = run_experiment(config);
            write_outputs(report, output_dir);
        },
        py::arg("config_json"), py::arg("output_dir"));

    m.def("selftest", []() {
        std::ostringstream out;
        const int failures = run_selftest(out);
        return py::make_tuple(failures, out.str());
    });
}
