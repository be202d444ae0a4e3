// Python bindings over the core library. Grids cross as 2-D numpy arrays.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "aquah/error.hpp"
#include "aquah/gauge.hpp"
#include "aquah/grid.hpp"
#include "aquah/metrics.hpp"
#include "aquah/params.hpp"
#include "aquah/pipeline.hpp"
#include "aquah/waterbalance.hpp"

namespace py = pybind11;
using namespace aquah;

namespace {

PyObject* g_error_type = nullptr;

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Raster to_raster(const Array& a, double cell_size, double nodata) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-D array");
  GridSpec s;
  s.rows = static_cast<std::size_t>(a.shape(0));
  s.cols = static_cast<std::size_t>(a.shape(1));
  s.cell_size = cell_size;
  s.nodata = nodata;
  return Raster(s, std::vector<double>(a.data(), a.data() + a.size()));
}

template <class T, class Get>
py::array_t<T> to_array(const GridSpec& s, Get get) {
  py::array_t<T> out({s.rows, s.cols});
  auto m = out.template mutable_unchecked<2>();
  for (std::size_t r = 0; r < s.rows; ++r)
    for (std::size_t c = 0; c < s.cols; ++c) m(r, c) = get(s.index(r, c));
  return out;
}

py::dict metrics_dict(const MetricBundle& m) {
  py::dict d;
  d["valid_pairs"] = m.valid_pairs;
  d["nse"] = m.nse;
  d["kge"] = m.kge;
  d["cc"] = m.cc;
  d["rmse"] = m.rmse;
  d["bias_mean"] = m.bias_mean;
  d["bias_percent"] = m.bias_percent;
  return d;
}

CrestParams crest_from(const py::dict& d) {
  CrestParams p;
  auto take = [&](const char* k, double& slot) {
    if (d.contains(k)) slot = d[k].cast<double>();
  };
  take("wm", p.wm);
  take("b", p.b);
  take("im", p.im);
  take("ke", p.ke);
  take("fc", p.fc);
  take("iwu", p.iwu);
  return p;
}

}  // namespace

PYBIND11_MODULE(_aquah, m) {
  m.doc() = "Distributed hydrologic simulation core";

  py::object error = py::exception<Error>(m, "AquahError");
  g_error_type = error.inc_ref().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(g_error_type)(e.describe());
      exc.attr("category") = static_cast<int>(e.category());
      exc.attr("stage") = e.stage();
      PyErr_SetObject(g_error_type, exc.ptr());
    }
  });

  m.def(
      "d8",
      [](const Array& dem, double cell_size, double nodata) {
        const DirectionGrid dirs = d8_flow_directions(to_raster(dem, cell_size, nodata));
        return to_array<std::uint8_t>(dirs.spec(), [&](std::size_t i) { return dirs.code(i); });
      },
      py::arg("dem"), py::arg("cell_size") = 1.0, py::arg("nodata") = GridSpec{}.nodata,
      "D8 direction codes (E=1 ... NE=128, 0 outlet) for a DEM.");

  m.def(
      "flow_accumulation",
      [](const Array& dem, double cell_size, double nodata) {
        const Raster fam = flow_accumulation(d8_flow_directions(to_raster(dem, cell_size, nodata)));
        return to_array<double>(fam.spec(), [&](std::size_t i) { return fam.at(i); });
      },
      py::arg("dem"), py::arg("cell_size") = 1.0, py::arg("nodata") = GridSpec{}.nodata,
      "Upstream cell counts, each cell counting itself.");

  m.def(
      "cell_step",
      [](double w, const py::dict& params, double precip, double pet, double dt) {
        const auto r = cell_step(CellState{w}, crest_from(params), precip, pet, dt);
        py::dict d;
        d["w"] = r.state.w;
        d["actual_et"] = r.fluxes.actual_et;
        d["overland"] = r.fluxes.overland;
        d["interflow_recharge"] = r.fluxes.interflow_recharge;
        d["clamp_residue"] = r.clamp_residue;
        return d;
      },
      py::arg("w"), py::arg("params"), py::arg("precip"), py::arg("pet"), py::arg("dt") = 3600.0,
      "One water-balance step for a single cell; depths in mm.");

  m.def(
      "metrics",
      [](std::vector<double> obs, std::vector<double> sim) {
        return metrics_dict(compute_metrics(PairedSeries(std::move(obs), std::move(sim))));
      },
      py::arg("observed"), py::arg("simulated"), "NSE, KGE, CC, RMSE and bias over valid pairs.");

  m.def("param_ranges", [] {
    py::dict d;
    for (const auto& r : default_ranges()) d[py::str(r.name)] = py::make_tuple(r.lower, r.upper, r.unit);
    return d;
  });

  m.def(
      "select_outlet",
      [](const std::string& gauges_csv, std::optional<std::string> hint) {
        const auto r = select_outlet(load_gauges(gauges_csv), hint);
        return py::make_tuple(r.gauge_id, r.explanation);
      },
      py::arg("gauges_csv"), py::arg("hint") = py::none());

  m.def(
      "make_fixture",
      [](const std::string& root, const std::string& name, std::size_t size, int days) {
        FixtureOptions o;
        o.size = size;
        o.days = days;
        return write_synthetic_basin(root, name, o).string();
      },
      py::arg("root"), py::arg("name") = "synthetic", py::arg("size") = 24, py::arg("days") = 10);

  m.def(
      "run",
      [](const std::string& prompt, const std::string& data_root, const std::string& out_dir,
         const std::string& decider) {
        RequestDefaults d;
        d.data_root = data_root;
        d.decider = decider;
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_pipeline(parse_request(prompt, d), out_dir);
        }
        py::dict out;
        out["out_dir"] = r.out_dir.string();
        out["gauge"] = r.gauge_id;
        out["metrics"] = r.metrics ? py::object(metrics_dict(*r.metrics)) : py::object(py::none());
        out["ledger_relative_error"] = r.ledger_relative_error;
        py::list notes;
        for (const auto& n : r.notifications) notes.append(py::make_tuple(n.stage, n.message));
        out["notifications"] = notes;
        py::dict params;
        for (ParamId id : kAllParams) params[py::str(std::string(param_name(id)))] = r.params.get(id);
        out["params"] = params;
        return out;
      },
      py::arg("prompt"), py::arg("data_root") = "data", py::arg("out_dir") = "out", py::arg("decider") = "none",
      "Parse a free-form request and run the whole pipeline.");
}
