#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "lendsim/amm_pool.hpp"
#include "lendsim/analytics/regression.hpp"
#include "lendsim/engine.hpp"
#include "lendsim/error.hpp"
#include "lendsim/interest_model.hpp"
#include "lendsim/run_io.hpp"
#include "lendsim/scenario.hpp"

namespace py = pybind11;
using namespace lendsim;

namespace {

InterestParams params_of(double base, double slope_low, double slope_high, double kink, double reserve_factor) {
    InterestParams p{Wad::from_double(base), Wad::from_double(slope_low), Wad::from_double(slope_high),
                     Wad::from_double(kink), Wad::from_double(reserve_factor)};
    p.validate();
    return p;
}

analytics::Matrix matrix_of(const std::vector<std::vector<double>>& rows) {
    const std::size_t k = rows.empty() ? 0 : rows.front().size();
    analytics::Matrix m(rows.size(), k);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != k) throw Error(Errc::InvalidArgument, "ragged design matrix");
        for (std::size_t c = 0; c < k; ++c) m(r, c) = rows[r][c];
    }
    return m;
}

py::dict result_dict(const analytics::RegressionResult& r) {
    py::dict d;
    d["method"] = r.method;
    d["names"] = r.names;
    d["coef"] = r.coef;
    d["se"] = r.se;
    d["t"] = r.t;
    d["p"] = r.p;
    d["covariance"] = r.covariance;
    d["observations"] = r.observations;
    d["clusters"] = r.clusters;
    d["r_squared"] = r.r_squared;
    d["log_likelihood"] = r.log_likelihood;
    return d;
}

py::dict simulate(const std::string& scenario_json, const std::string& base_dir) {
    RunOutput out;
    {
        py::gil_scoped_release release;
        out = run(parse_scenario(nlohmann::json::parse(scenario_json), base_dir));
    }
    std::ostringstream ledger, snapshots;
    out.ledger.write_jsonl(ledger);
    io::write_snapshots(snapshots, out);
    py::dict d;
    d["summary"] = io::summary_json(out.summary).dump();
    d["ledger"] = ledger.str();
    d["snapshots"] = snapshots.str();
    return d;
}

}  // namespace

PYBIND11_MODULE(_lendsim, m) {
    py::register_exception<Error>(m, "LendsimError", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

    m.def("simulate", &simulate, py::arg("scenario_json"), py::arg("base_dir") = "");

    m.def(
        "cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = cli::run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));

    m.def(
        "borrow_rate",
        [](double u, double base, double slope_low, double slope_high, double kink, double reserve_factor) {
            return borrow_rate(params_of(base, slope_low, slope_high, kink, reserve_factor), Wad::from_double(u))
                .to_double();
        },
        py::arg("utilization"), py::arg("base_rate"), py::arg("slope_low"), py::arg("slope_high"), py::arg("kink"),
        py::arg("reserve_factor") = 0.0);
    m.def(
        "supply_rate",
        [](double u, double base, double slope_low, double slope_high, double kink, double reserve_factor) {
            return supply_rate(params_of(base, slope_low, slope_high, kink, reserve_factor), Wad::from_double(u))
                .to_double();
        },
        py::arg("utilization"), py::arg("base_rate"), py::arg("slope_low"), py::arg("slope_high"), py::arg("kink"),
        py::arg("reserve_factor") = 0.0);

    m.def("divergent_loss", &divergent_loss, py::arg("price_ratio"));

    m.def(
        "ols_newey_west",
        [](const std::vector<std::vector<double>>& x, const std::vector<double>& y, int lag,
           std::vector<std::string> names) {
            return result_dict(analytics::ols_newey_west(matrix_of(x), y, lag, std::move(names)));
        },
        py::arg("x"), py::arg("y"), py::arg("lag") = 1, py::arg("names") = std::vector<std::string>{});
    m.def(
        "logistic_clustered",
        [](const std::vector<std::vector<double>>& x, const std::vector<double>& y,
           const std::vector<std::uint32_t>& clusters, std::vector<std::string> names) {
            return result_dict(analytics::logistic_clustered(matrix_of(x), y, clusters, std::move(names)));
        },
        py::arg("x"), py::arg("y"), py::arg("clusters"), py::arg("names") = std::vector<std::string>{});

    m.attr("__version__") = io::kToolVersion;
}
