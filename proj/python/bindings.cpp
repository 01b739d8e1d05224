#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "auctionlab/dist.hpp"
#include "auctionlab/equilibrium.hpp"
#include "auctionlab/error.hpp"
#include "auctionlab/harness.hpp"
#include "auctionlab/mechanism.hpp"
#include "auctionlab/rng.hpp"

namespace py = pybind11;
using namespace auctionlab;

// JSON crosses the boundary as text; the package wrapper converts to dicts.
PYBIND11_MODULE(_core, m) {
    m.attr("__version__") = std::string(version());
    m.attr("SCHEMA_VERSION") = kSchemaVersion;

    static py::handle auction_error = py::exception<Error>(m, "AuctionError", PyExc_RuntimeError).release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object err = py::reinterpret_borrow<py::object>(auction_error)(e.what());
            err.attr("kind") = std::string(to_string(e.kind()));
            PyErr_SetObject(auction_error.ptr(), err.ptr());
        }
    });

    py::class_<Distribution>(m, "Distribution")
        .def_static("from_json", [](const std::string& s) { return Distribution::from_json(json::parse(s)); })
        .def("cdf", [](const Distribution& d, double x) { return d.cdf(x); })
        .def("pdf", [](const Distribution& d, double x) { return d.pdf(x); })
        .def("quantile", [](const Distribution& d, double q) { return d.quantile(q); })
        .def("mean", [](const Distribution& d) { return d.mean(); })
        .def("is_discrete", [](const Distribution& d) { return d.is_discrete(); })
        .def("support", [](const Distribution& d) { return py::make_tuple(d.support().lo, d.support().hi); })
        .def(
            "sample",
            [](const Distribution& d, std::size_t n, std::uint64_t seed) {
                Rng rng(seed, 0, "python.sample");
                std::vector<double> out(n);
                for (auto& x : out)
                    x = d.sample(rng);
                return out;
            },
            py::arg("n"), py::arg("seed"));

    m.def("monopoly_price", [](const Distribution& d) { return monopoly_price(d); });
    m.def("monopoly_revenue", &monopoly_revenue);
    m.def("virtual_value", &virtual_value);

    m.def(
        "first_price_bids",
        [](const Distribution& d, std::size_t n, const std::vector<double>& values) {
            Strategy beta = fp_symmetric_equilibrium(d, n);
            std::vector<double> out;
            for (double x : values)
                out.push_back(beta(x));
            return out;
        },
        py::arg("dist"), py::arg("n"), py::arg("values"));

    m.def(
        "run_auction",
        [](const std::string& mechanism, const std::vector<double>& bids) {
            auto res = Mechanism::from_json(json::parse(mechanism)).run(bids);
            py::object winner = res.winner ? py::object(py::int_(*res.winner)) : py::none();
            return py::make_tuple(winner, res.payments);
        },
        py::arg("mechanism"), py::arg("bids"));

    m.def("scenario_names", &scenario_names);
    m.def(
        "run_experiment_json",
        [](const std::string& config) {
            auto cfg = ExperimentConfig::from_json(json::parse(config));
            py::gil_scoped_release release;
            return dump_json(run_experiment(cfg).to_json(), -1);
        },
        py::arg("config"));
    m.def(
        "plot_data_csv",
        [](const std::string& report, const std::string& kind) {
            return emit_plot_data(RunReport::from_json(json::parse(report)), kind).to_csv();
        },
        py::arg("report"), py::arg("kind"));
}
