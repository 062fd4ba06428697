#include "qkdc/bounds.hpp"
#include "qkdc/cli.hpp"
#include "qkdc/divergences.hpp"
#include "qkdc/gaussian.hpp"
#include "qkdc/io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <stdexcept>

namespace py = pybind11;
using namespace qkdc;

namespace {

// Reports cross the boundary as JSON text; the Python side turns them into dicts.
std::string report(const BoundReport& r) { return to_json(r).dump(); }

DensityOperator state(const Mat& m) { return DensityOperator(m); }

BosonicChannelParams bosonic(const std::string& kind, double a, double nb) {
    nlohmann::json j{{"kind", kind}};
    if (kind == "thermal" || kind == "pure-loss") j["eta"] = a;
    else if (kind == "amplifier" || kind == "ql-amplifier") j["G"] = a;
    else if (kind == "additive") j["xi"] = a;
    if (kind == "thermal" || kind == "amplifier") j["nb"] = nb;
    return bosonic_from_json(j);
}

} // namespace

PYBIND11_MODULE(_qkdc, m) {
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def("inv_gaussian_cdf", &inv_gaussian_cdf, py::arg("eps"));
    m.def("binary_entropy", &binary_entropy, py::arg("x"));
    m.def("chebyshev_constant", &chebyshev_constant, py::arg("eps"));
    m.def("eb_bound", &eb_bound, py::arg("n"), py::arg("eps"));
    m.def("chebyshev_dh_bound", &chebyshev_dh_bound, py::arg("D"), py::arg("V"), py::arg("eps"), py::arg("n"));
    m.def("second_order_rate", &second_order_rate, py::arg("D"), py::arg("V"), py::arg("eps"), py::arg("n"));

    m.def("dephasing_boundary", [](double g, long n, double e) { return report(dephasing_boundary(g, n, e)); },
          py::arg("gamma"), py::arg("n"), py::arg("eps"));
    m.def("erasure_boundary", [](double p, long n, double e) { return report(erasure_boundary(p, n, e)); },
          py::arg("p"), py::arg("n"), py::arg("eps"));
    m.def("gaussian_bound",
          [](const std::string& kind, double a, double nb, long n, double e) {
              return report(finite_n_bound(bosonic(kind, a, nb), n, e));
          },
          py::arg("kind"), py::arg("param"), py::arg("nb"), py::arg("n"), py::arg("eps"));

    m.def("rel_entropy", [](const Mat& r, const Mat& s) { return rel_entropy(state(r), state(s)); });
    m.def("sandwiched_renyi", [](const Mat& r, const Mat& s, double a) { return sandwiched_renyi(state(r), state(s), a); });
    m.def("hypothesis_test_divergence",
          [](const Mat& r, const Mat& s, double e) { return hypothesis_test_divergence(state(r), state(s), e).value; });
    m.def("hypothesis_test_divergence_classical_iid", &hypothesis_test_divergence_classical_iid, py::arg("p"),
          py::arg("q"), py::arg("eps"), py::arg("n"));

    m.def("run_cli", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
    });
}
