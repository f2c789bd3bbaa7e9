#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gnet/contagion.hpp"
#include "gnet/error.hpp"
#include "gnet/generator.hpp"
#include "gnet/io.hpp"
#include "gnet/metrics.hpp"
#include "gnet/powerlaw.hpp"

namespace py = pybind11;
using namespace gnet;

namespace {

py::dict metrics_dict(const MetricsReport& r) {
  py::dict d;
  d["month"] = r.month.to_string();
  for (const auto& m : scalar_metrics(r)) {
    if (m.value)
      d[py::str(m.name)] = *m.value;
    else
      d[py::str(m.name)] = py::none();
  }
  d["path_length_estimated"] = r.paths.estimated;
  return d;
}

py::dict summary_dict(const MonteCarloSummary& s) {
  py::dict d;
  d["month"] = s.month.to_string();
  d["scenario"] = std::string(to_string(s.scenario));
  d["p"] = s.seed_fraction;
  d["seeds"] = s.seeds;
  d["runs"] = s.runs;
  d["mean_final_ratio"] = s.mean_final_ratio;
  d["sd"] = s.sd ? py::cast(*s.sd) : py::none();
  d["mean_net_ratio"] = s.mean_net_ratio;
  d["final_ratios"] = s.final_ratios;
  return d;
}

}  // namespace

PYBIND11_MODULE(gnet, m) {
  m.doc() = "Guarantee network metrics, generation and default contagion";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<FitError>(m, "FitError", PyExc_RuntimeError);
  py::register_exception<GenerationError>(m, "GenerationError", PyExc_RuntimeError);
  py::register_exception<LookupError>(m, "LookupError", PyExc_KeyError);

  py::class_<Enterprise>(m, "Enterprise")
      .def(py::init([](std::string id, double asset, double liability, double loan, double credit_line, bool listed,
                       bool defaulted) {
             return Enterprise{std::move(id), asset, liability, loan, credit_line, listed, defaulted};
           }),
           py::arg("id"), py::arg("asset"), py::arg("liability") = 0.0, py::arg("loan") = 0.0,
           py::arg("credit_line") = 0.0, py::arg("listed") = false, py::arg("defaulted") = false)
      .def_readwrite("id", &Enterprise::id)
      .def_readwrite("asset", &Enterprise::asset)
      .def_readwrite("liability", &Enterprise::liability)
      .def_readwrite("loan", &Enterprise::loan)
      .def_readwrite("credit_line", &Enterprise::credit_line)
      .def_readwrite("listed", &Enterprise::listed)
      .def_readwrite("defaulted", &Enterprise::defaulted);

  py::class_<NetworkSnapshot>(m, "Snapshot")
      .def_static(
          "build",
          [](const std::string& month, std::vector<Enterprise> nodes,
             const std::vector<std::tuple<std::string, std::string, double>>& edges) {
            const YearMonth ym = YearMonth::parse(month);
            std::vector<GuaranteeEdge> list;
            for (const auto& [g, d, amount] : edges) list.push_back({g, d, amount, ym});
            return build_snapshot(ym, std::move(nodes), list);
          },
          py::arg("month"), py::arg("nodes"), py::arg("edges"))
      .def_property_readonly("month", [](const NetworkSnapshot& g) { return g.month().to_string(); })
      .def_property_readonly("node_count", &NetworkSnapshot::node_count)
      .def_property_readonly("edge_count", &NetworkSnapshot::edge_count)
      .def("ids",
           [](const NetworkSnapshot& g) {
             std::vector<std::string> ids;
             for (const auto& e : g.nodes()) ids.push_back(e.id);
             return ids;
           })
      .def("edges",
           [](const NetworkSnapshot& g) {
             std::vector<std::tuple<std::string, std::string, double>> out;
             for (const auto& e : g.export_edges()) out.emplace_back(e.guarantor_id, e.debtor_id, e.amount);
             return out;
           })
      .def("in_degrees", [](const NetworkSnapshot& g) { return in_degrees(g); })
      .def("out_degrees", [](const NetworkSnapshot& g) { return out_degrees(g); })
      .def("__eq__", [](const NetworkSnapshot& a, const NetworkSnapshot& b) { return a == b; });

  m.def("preset_names", &preset_names);
  m.def(
      "generate",
      [](const std::string& preset, std::uint64_t seed) {
        if (is_dynamic_preset(preset)) {
          const auto d = generate_dynamic(preset_plan(preset, seed));
          return std::vector<NetworkSnapshot>(d.begin(), d.end());
        }
        return std::vector<NetworkSnapshot>{generate_snapshot(preset_config(preset, seed))};
      },
      py::arg("preset"), py::arg("seed") = 1, "Snapshots generated from a named preset.");
  m.def(
      "generate_json",
      [](const std::string& json, std::uint64_t seed) {
        auto c = generator_config_from_json(json);
        c.seed = seed;
        return generate_snapshot(c);
      },
      py::arg("config"), py::arg("seed") = 1);

  m.def(
      "load",
      [](const std::filesystem::path& dir) {
        const auto d = io::load_dynamic(dir);
        return std::vector<NetworkSnapshot>(d.begin(), d.end());
      },
      py::arg("directory"));
  m.def(
      "save",
      [](const std::vector<NetworkSnapshot>& snapshots, const std::filesystem::path& dir) {
        DynamicNetwork d;
        for (const auto& g : snapshots) d.push_back(g);
        io::save_dynamic(d, dir);
      },
      py::arg("snapshots"), py::arg("directory"));

  m.def(
      "metrics",
      [](const NetworkSnapshot& g, std::uint64_t path_seed) {
        MetricsOptions o;
        o.paths.seed = path_seed;
        return metrics_dict(compute_metrics(g, o));
      },
      py::arg("snapshot"), py::arg("path_seed") = 1);
  m.def("reciprocal_couple_ratio", [](const NetworkSnapshot& g) { return reciprocal_couple_ratio(g); });
  m.def("null_model_couple_ratio", &null_model_couple_ratio, py::arg("snapshot"), py::arg("swaps"),
        py::arg("seed"));

  m.def(
      "powerlaw_fit",
      [](const std::vector<std::uint64_t>& values, std::optional<std::uint64_t> x_min) {
        const auto fit = x_min ? powerlaw_fit(values, FixedXmin{*x_min}) : powerlaw_fit(values, ScanXmin{});
        py::dict d;
        d["exponent"] = fit.exponent;
        d["x_min"] = fit.x_min;
        d["tail_count"] = fit.tail_count;
        d["ks_distance"] = fit.ks_distance;
        return d;
      },
      py::arg("values"), py::arg("x_min") = std::optional<std::uint64_t>(1),
      "Discrete power-law MLE; x_min=None scans for the KS-optimal lower cutoff.");

  m.def("default_probability", &default_probability, py::arg("enterprise"), py::arg("defaulted_guaranteed_amount"),
        py::arg("k"), py::arg("delta"));
  m.def(
      "cascade",
      [](const NetworkSnapshot& g, const std::vector<std::string>& seeds, double k, double delta,
         std::uint64_t seed) {
        ContagionParams p;
        p.k = k;
        p.delta = delta;
        const auto r = run_cascade(g, seeds, p, seed);
        py::dict d;
        std::vector<std::string> ids;
        for (auto v : r.defaulted) ids.push_back(g.node(v).id);
        d["defaulted"] = ids;
        d["new_defaults"] = r.new_defaults;
        d["final_ratio"] = r.final_ratio;
        d["steps"] = r.steps;
        return d;
      },
      py::arg("snapshot"), py::arg("seeds"), py::arg("k") = 1.0, py::arg("delta") = 0.5, py::arg("seed") = 1);
  m.def(
      "monte_carlo",
      [](const NetworkSnapshot& g, const std::string& scenario, double p, std::size_t runs, double k, double delta,
         std::uint64_t seed, std::size_t importance_runs, unsigned threads) {
        ContagionParams params;
        params.scenario = parse_scenario(scenario);
        params.seed_fraction = p;
        params.runs = runs;
        params.k = k;
        params.delta = delta;
        params.seed = seed;
        params.importance_runs_per_node = importance_runs;
        params.threads = threads;
        MonteCarloSummary s;
        {
          py::gil_scoped_release release;
          s = monte_carlo(g, params);
        }
        return summary_dict(s);
      },
      py::arg("snapshot"), py::arg("scenario") = "random", py::arg("p") = 0.05, py::arg("runs") = 1000,
      py::arg("k") = 1.0, py::arg("delta") = 0.5, py::arg("seed") = 1, py::arg("importance_runs") = 50,
      py::arg("threads") = 0);
}
