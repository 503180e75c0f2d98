// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "jwdm/cli.hpp"
#include "jwdm/data.hpp"
#include "jwdm/metrics.hpp"
#include "jwdm/ot.hpp"
#include "jwdm/synthesis.hpp"
#include "jwdm/trainer.hpp"

namespace py = pybind11;
using namespace jwdm;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
    if (a.ndim() == 1) return Tensor::matrix(static_cast<std::size_t>(a.shape(0)), 1,
                                             std::vector<double>(a.data(), a.data() + a.size()));
    if (a.ndim() != 2) throw std::invalid_argument("expected a 1-D or 2-D array");
    return Tensor::matrix(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                          std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor& t) {
    Array out({static_cast<py::ssize_t>(t.rows()), static_cast<py::ssize_t>(t.cols())});
    std::copy(t.data().begin(), t.data().end(), out.mutable_data());
    return out;
}

Array to_array(std::span<const double> v, std::size_t rows, std::size_t cols) {
    Array out({static_cast<py::ssize_t>(rows), static_cast<py::ssize_t>(cols)});
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::map<std::string, std::string> to_fields(const py::dict& d) {
    std::map<std::string, std::string> f;
    for (const auto& [k, v] : d) {
        const auto key = py::str(k).cast<std::string>();
        if (py::isinstance<py::bool_>(v)) f[key] = v.cast<bool>() ? "true" : "false";
        else if (py::isinstance<py::list>(v) || py::isinstance<py::tuple>(v)) {
            std::string s;
            for (const auto& item : v) s += (s.empty() ? "" : ",") + py::str(item).cast<std::string>();
            f[key] = s;
        } else {
            f[key] = py::str(v).cast<std::string>();
        }
    }
    return f;
}

py::dict report_dict(const EvalReport& r) {
    py::dict d;
    d["frechet_x"] = r.frechet_x;
    d["frechet_y"] = r.frechet_y;
    d["correspondence_rmse"] = r.correspondence_rmse ? py::cast(*r.correspondence_rmse) : py::none();
    d["cycle_l1_x"] = r.cycle_l1_x;
    d["cycle_l1_y"] = r.cycle_l1_y;
    d["w2_x"] = r.w2_x ? py::cast(*r.w2_x) : py::none();
    d["w2_y"] = r.w2_y ? py::cast(*r.w2_y) : py::none();
    return d;
}

Direction parse_direction(const std::string& s) {
    if (s == "x_to_y") return Direction::x_to_y;
    if (s == "y_to_x") return Direction::y_to_x;
    throw std::invalid_argument("direction must be 'x_to_y' or 'y_to_x'");
}

ot::DiscreteDistribution distribution(const Array& points, const std::optional<Array>& weights) {
    auto t = to_tensor(points);
    if (!weights) return ot::DiscreteDistribution::uniform(std::move(t));
    return {std::move(t), std::vector<double>(weights->data(), weights->data() + weights->size())};
}

/// A trained model together with the configuration it came from.
struct Model {
    TrainConfig config;
    TrainingState state;

    static Model from_checkpoint(const std::filesystem::path& path) {
        auto c = load_checkpoint(path);
        return {c.config, c.state};
    }
};

}  // namespace

PYBIND11_MODULE(_jwdm, m) {
    m.doc() = "Joint Wasserstein distribution matching: OT solvers, training and synthesis";

    py::register_exception<ot::ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
    py::register_exception<TrainingDiverged>(m, "TrainingDiverged", PyExc_RuntimeError);

    m.def(
        "gen_data",
        [](const py::dict& spec) {
            const auto ds = data::gen_domain_pair(data::DomainSpec::from_fields(to_fields(spec)));
            return py::make_tuple(to_array(ds.x), to_array(ds.y));
        },
        py::arg("spec") = py::dict(),
        "Samples (x, y) point sets. `spec` overrides generator fields such as kind, n, seed, paired.");

    m.def(
        "default_config", [] { return TrainConfig{}.to_fields(); },
        "Default training configuration as a flat string mapping.");

    py::class_<Model>(m, "Model")
        .def_static("load", &Model::from_checkpoint, py::arg("path"))
        .def_property_readonly("epoch", [](const Model& s) { return s.state.epoch; })
        .def_property_readonly("step", [](const Model& s) { return s.state.step; })
        .def_property_readonly("config", [](const Model& s) { return s.config.to_fields(); })
        .def(
            "save",
            [](const Model& s, const std::filesystem::path& path) {
                save_checkpoint({s.config, s.config.hash(), s.state}, path);
            },
            py::arg("path"))
        .def(
            "translate",
            [](const Model& s, const Array& pts, const std::string& dir) {
                return to_array(translate(s.state.bundle, to_tensor(pts), parse_direction(dir)));
            },
            py::arg("points"), py::arg("direction") = "x_to_y")
        .def(
            "cycle",
            [](const Model& s, const Array& pts, const std::string& dir) {
                return to_array(cycle(s.state.bundle, to_tensor(pts), parse_direction(dir)));
            },
            py::arg("points"), py::arg("direction") = "x_to_y")
        .def(
            "evaluate",
            [](const Model& s, std::size_t eval_n, std::size_t ot_n, std::uint64_t seed) {
                const auto ds = data::gen_domain_pair(s.config.dataset);
                return report_dict(evaluate(s.state.bundle, ds, EvalConfig{eval_n, ot_n, seed}));
            },
            py::arg("eval_n") = 1000, py::arg("ot_n") = 64, py::arg("seed") = 0)
        .def(
            "interpolate",
            [](const Model& s, std::vector<double> begin, std::vector<double> end, int n) {
                const auto t = interpolate(s.state.bundle, begin, end, n);
                py::dict d;
                d["rho"] = t.rho;
                d["source"] = to_array(t.source);
                d["target"] = to_array(t.target);
                d["latent"] = to_array(t.latent);
                return d;
            },
            py::arg("x_begin"), py::arg("x_end"), py::arg("n") = 8);

    m.def(
        "train",
        [](const py::dict& config, std::optional<int> until) {
            const auto c = TrainConfig::from_fields(to_fields(config));
            const auto ds = data::gen_domain_pair(c.dataset);
            py::gil_scoped_release release;
            auto r = train(c, ds, until);
            return Model{c, std::move(r.state)};
        },
        py::arg("config") = py::dict(), py::arg("until_epoch") = py::none(),
        "Trains on the configured synthetic task. Keys follow default_config(); dataset keys use a 'data.' prefix.");

    m.def(
        "resume",
        [](const Model& model, int extra_epochs) {
            const auto ds = data::gen_domain_pair(model.config.dataset);
            const Checkpoint ckpt{model.config, model.config.hash(), model.state};
            py::gil_scoped_release release;
            auto r = resume(ckpt, model.config, ds, extra_epochs);
            return Model{model.config, std::move(r.state)};
        },
        py::arg("model"), py::arg("extra_epochs"));

    m.def(
        "cost_matrix",
        [](const Array& a, const Array& b, const std::string& metric) {
            const auto c = ot::cost_matrix(to_tensor(a), to_tensor(b), ot::parse_metric(metric));
            return to_array(c.values, c.rows, c.cols);
        },
        py::arg("a"), py::arg("b"), py::arg("metric") = "sqeuclidean");

    m.def(
        "exact_wasserstein",
        [](const Array& a, const Array& b, std::optional<Array> wa, std::optional<Array> wb,
           const std::string& metric) {
            const auto mu = distribution(a, wa), nu = distribution(b, wb);
            const auto c = ot::cost_matrix(mu.points(), nu.points(), ot::parse_metric(metric));
            const auto r = ot::exact_wasserstein(mu, nu, c);
            return py::make_tuple(r.value, to_array(r.coupling.plan, c.rows, c.cols));
        },
        py::arg("a"), py::arg("b"), py::arg("weights_a") = py::none(), py::arg("weights_b") = py::none(),
        py::arg("metric") = "sqeuclidean", "Exact OT value and plan between two point clouds.");

    m.def(
        "hungarian",
        [](const Array& cost) {
            const auto t = to_tensor(cost);
            const ot::CostMatrix c{t.rows(), t.cols(), std::vector<double>(t.data().begin(), t.data().end()),
                                   ot::Metric::l1};
            return py::make_tuple(ot::hungarian(c).value, ot::solve_assignment(c));
        },
        py::arg("cost"), "Uniform assignment value and the column chosen for every row.");

    m.def(
        "sinkhorn",
        [](const Array& a, const Array& b, std::optional<Array> wa, std::optional<Array> wb,
           const std::string& metric, double epsilon, std::size_t max_iters, double tol) {
            const auto mu = distribution(a, wa), nu = distribution(b, wb);
            const auto c = ot::cost_matrix(mu.points(), nu.points(), ot::parse_metric(metric));
            ot::SinkhornOptions o;
            o.epsilon = epsilon;
            o.max_iters = max_iters;
            o.tol = tol;
            const auto r = ot::sinkhorn(mu, nu, c, o);
            return py::make_tuple(r.value, to_array(r.coupling.plan, c.rows, c.cols), r.iterations);
        },
        py::arg("a"), py::arg("b"), py::arg("weights_a") = py::none(), py::arg("weights_b") = py::none(),
        py::arg("metric") = "sqeuclidean", py::arg("epsilon") = 0.01, py::arg("max_iters") = 100000,
        py::arg("tol") = 1e-6);

    m.def(
        "decomposition",
        [](const Array& a_first, const Array& a_second, std::vector<double> a_weights, const Array& b_first,
           const Array& b_second, std::vector<double> b_weights, const std::string& metric) {
            const ot::JointPairDistribution pa(to_tensor(a_first), to_tensor(a_second), std::move(a_weights));
            const ot::JointPairDistribution pb(to_tensor(b_first), to_tensor(b_second), std::move(b_weights));
            const auto mt = ot::parse_metric(metric);
            const auto r = ot::decomposition_report(pa, pb, mt, mt);
            py::dict d;
            d["joint"] = r.joint;
            d["first"] = r.first;
            d["second"] = r.second;
            d["gap"] = r.gap;
            d["independent"] = r.independent;
            return d;
        },
        py::arg("a_first"), py::arg("a_second"), py::arg("a_weights"), py::arg("b_first"), py::arg("b_second"),
        py::arg("b_weights"), py::arg("metric") = "sqeuclidean",
        "Joint OT cost between two pair distributions against the sum of the marginal costs.");

    m.def(
        "gaussian_frechet", [](const Array& a, const Array& b) { return gaussian_frechet(to_tensor(a), to_tensor(b)); },
        py::arg("a"), py::arg("b"));

    m.def(
        "run_cli",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "jwdm");
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = run_cli(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs a jwdm subcommand in-process; returns (exit_code, stdout, stderr).");
}
