#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "linr/app_config.hpp"
#include "linr/bench.hpp"
#include "linr/error.hpp"
#include "linr/index.hpp"
#include "linr/ingest.hpp"
#include "linr/quantize.hpp"
#include "linr/retrieval.hpp"
#include "linr/scoring.hpp"

namespace py = pybind11;
using namespace linr;

namespace {

using AttrMap = std::map<std::string, std::vector<std::uint64_t>>;

std::vector<std::vector<std::uint64_t>> to_lists(const IndexConfig& config, const AttrMap& attrs) {
  std::vector<std::vector<std::uint64_t>> lists(config.clause_schema.size());
  for (const auto& [name, ids] : attrs) lists[config.clause_index(name)] = ids;
  return lists;
}

AttrMap to_map(const IndexConfig& config, const std::vector<std::vector<std::uint64_t>>& lists) {
  AttrMap out;
  for (std::size_t c = 0; c < lists.size(); ++c) out[config.clause_schema[c].name] = lists[c];
  return out;
}

IndexConfig make_config(std::size_t dim, std::size_t capacity, std::uint32_t quant_bits, std::uint64_t seed,
                        const std::vector<std::tuple<std::string, std::string, std::uint32_t>>& clauses) {
  IndexConfig config;
  config.dim = dim;
  config.capacity = capacity;
  config.quant_bits = quant_bits;
  config.seed = seed;
  for (const auto& [name, polarity, max_attrs] : clauses) {
    config.clause_schema.push_back({name, parse_polarity(polarity), max_attrs});
  }
  config.validate();
  return config;
}

class PyIndex {
 public:
  explicit PyIndex(std::unique_ptr<Index> index) : index_(std::move(index)), scorer_(make_dot_scorer()) {}

  const IndexConfig& config() const { return index_->config(); }

  void upsert(std::uint64_t id, std::vector<float> emb, const AttrMap& attrs) {
    ChangeRecord record = ChangeRecord::upsert(id, std::move(emb), to_lists(config(), attrs));
    py::gil_scoped_release release;
    index_->upsert(record);
  }

  bool erase(std::uint64_t id) { return index_->erase(id); }

  std::vector<std::pair<std::uint64_t, float>> query(std::vector<float> emb, std::size_t k,
                                                     const AttrMap& filter, const std::string& algo,
                                                     double keep_fraction) const {
    Query q;
    q.embedding = std::move(emb);
    q.k = k;
    q.filter = QueryFilter::normalized(to_lists(config(), filter));
    q.algo = algo == "auto" ? choose_algo(*index_, q.filter) : parse_algo(algo);
    q.keep_fraction = keep_fraction;
    RetrievalResult result;
    {
      py::gil_scoped_release release;
      result = run_query(*index_, q, *scorer_);
    }
    std::vector<std::pair<std::uint64_t, float>> out;
    for (const auto& item : result.items) out.emplace_back(item.id, item.score);
    return out;
  }

  std::optional<py::dict> get(std::uint64_t id) const {
    const auto item = index_->get(id);
    if (!item) return std::nullopt;
    py::dict d;
    d["id"] = item->id;
    d["slot"] = item->slot;
    d["embedding"] = item->embedding;
    d["attrs"] = to_map(config(), item->attrs);
    d["code"] = item->code;
    return d;
  }

  void set_scorer(const std::string& kind, const std::optional<std::string>& weights,
                  const std::vector<std::string>& components, std::optional<std::size_t> num_clusters) {
    ScorerSpec spec;
    spec.kind = parse_scorer_kind(kind);
    spec.weights_path = weights;
    spec.components = components;
    spec.num_clusters = num_clusters;
    scorer_ = make_scorer(spec, config().dim);
  }

  std::uint64_t save(const std::filesystem::path& path, const std::string& precision) const {
    const ValuePrecision p = precision == "f16" ? ValuePrecision::kF16 : ValuePrecision::kF32;
    if (precision != "f16" && precision != "f32") fail(ErrorCode::kInvalidArgument, "precision must be f16 or f32");
    return write_snapshot(*index_, path, {}, p);
  }

  Index& index() { return *index_; }

 private:
  std::unique_ptr<Index> index_;
  std::shared_ptr<const Scorer> scorer_;
};

py::object json_loads(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

AppConfig app_config_from(const py::object& config) {
  const std::string text = py::module_::import("json").attr("dumps")(config).cast<std::string>();
  return parse_app_config(text);
}

}  // namespace

PYBIND11_MODULE(_linr, m) {
  m.doc() = "Filtered exhaustive embedding retrieval";

  // Leaked on purpose: the type must outlive interpreter teardown.
  static auto* linr_error = new py::object(py::exception<Error>(m, "LinrError", PyExc_RuntimeError));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = (*linr_error)(std::string(error_code_name(e.code())) + ": " + e.what());
      exc.attr("code") = std::string(error_code_name(e.code()));
      PyErr_SetObject(linr_error->ptr(), exc.ptr());
    }
  });

  py::class_<IndexConfig>(m, "IndexConfig")
      .def(py::init(&make_config), py::arg("dim"), py::arg("capacity"), py::arg("quant_bits") = 0,
           py::arg("seed") = 0,
           py::arg("clauses") = std::vector<std::tuple<std::string, std::string, std::uint32_t>>{})
      .def_readonly("dim", &IndexConfig::dim)
      .def_readonly("capacity", &IndexConfig::capacity)
      .def_readonly("quant_bits", &IndexConfig::quant_bits)
      .def_readonly("seed", &IndexConfig::seed)
      .def_property_readonly("clauses",
                             [](const IndexConfig& c) {
                               std::vector<std::tuple<std::string, std::string, std::uint32_t>> out;
                               for (const auto& s : c.clause_schema) {
                                 out.emplace_back(s.name, polarity_name(s.polarity), s.max_attrs);
                               }
                               return out;
                             })
      .def("footprint", [](const IndexConfig& c) {
        const auto f = estimate_footprint(c);
        py::dict d;
        d["embedding_bytes"] = f.embedding_bytes;
        d["clause_bytes"] = f.clause_bytes;
        d["code_bytes"] = f.code_bytes;
        d["registry_bytes"] = f.registry_bytes;
        d["total_bytes"] = f.total();
        return d;
      });

  py::class_<PyIndex>(m, "Index")
      .def(py::init([](const IndexConfig& config) { return PyIndex(create_index(config)); }), py::arg("config"))
      .def_static(
          "load",
          [](const std::filesystem::path& path, const IndexConfig& config) {
            return PyIndex(load_snapshot(path, config));
          },
          py::arg("path"), py::arg("config"))
      .def_static(
          "bootstrap",
          [](const std::optional<std::filesystem::path>& snapshot, const std::filesystem::path& changelog,
             const IndexConfig& config) { return PyIndex(bootstrap(snapshot, changelog, config).index); },
          py::arg("snapshot"), py::arg("changelog"), py::arg("config"))
      .def_property_readonly("config", &PyIndex::config)
      .def("upsert", &PyIndex::upsert, py::arg("id"), py::arg("embedding"), py::arg("attrs") = AttrMap{})
      .def("delete", &PyIndex::erase, py::arg("id"))
      .def("query", &PyIndex::query, py::arg("embedding"), py::arg("k") = 10, py::arg("filter") = AttrMap{},
           py::arg("algo") = "v1", py::arg("keep_fraction") = 1.0)
      .def("get", &PyIndex::get, py::arg("id"))
      .def("contains", [](PyIndex& self, std::uint64_t id) { return self.index().contains(id); })
      .def("set_scorer", &PyIndex::set_scorer, py::arg("kind"), py::arg("weights") = std::nullopt,
           py::arg("components") = std::vector<std::string>{}, py::arg("num_clusters") = std::nullopt)
      .def("save", &PyIndex::save, py::arg("path"), py::arg("precision") = "f32")
      .def("__len__", [](PyIndex& self) { return self.index().live_count(); })
      .def_property_readonly("live_count", [](PyIndex& self) { return self.index().live_count(); })
      .def_property_readonly("high_water_mark", [](PyIndex& self) { return self.index().high_water_mark(); })
      .def_property_readonly("applied_seq", [](PyIndex& self) { return self.index().applied_seq(); });

  py::class_<ChangeLogWriter>(m, "ChangeLog")
      .def(py::init<std::filesystem::path, IndexConfig>(), py::arg("path"), py::arg("config"))
      .def(
          "upsert",
          [](ChangeLogWriter& w, std::uint64_t id, std::vector<float> emb, const AttrMap& attrs,
             const IndexConfig& config) {
            return w.append(ChangeRecord::upsert(id, std::move(emb), to_lists(config, attrs)));
          },
          py::arg("id"), py::arg("embedding"), py::arg("attrs"), py::arg("config"))
      .def(
          "delete", [](ChangeLogWriter& w, std::uint64_t id) { return w.append(ChangeRecord::erase(id)); },
          py::arg("id"))
      .def_property_readonly("last_seq", &ChangeLogWriter::last_seq);

  m.def(
      "encode",
      [](const std::vector<float>& emb, std::uint32_t bits, std::uint64_t seed) {
        return oporp_encode(OporpParams::make(emb.size(), bits, seed), emb);
      },
      py::arg("embedding"), py::arg("bits"), py::arg("seed") = 0, "Sign code of an embedding as 64-bit words.");
  m.def(
      "matched_bits",
      [](const BitCode& a, const BitCode& b) { return matched_bits(negate(a), b); }, py::arg("a"), py::arg("b"));
  m.def("est_cosine", &est_cosine, py::arg("matched"), py::arg("bits"));
  m.def(
      "quantize_eval",
      [](std::size_t dim, std::uint32_t bits, std::size_t pairs, std::uint64_t seed) {
        const auto row = quantize_eval(dim, bits, pairs, seed);
        py::dict d;
        d["bits"] = row.bits;
        d["mean_abs_error"] = row.mean_abs_error;
        d["max_abs_error"] = row.max_abs_error;
        d["pairs"] = row.pairs;
        return d;
      },
      py::arg("dim"), py::arg("bits"), py::arg("pairs"), py::arg("seed") = 0);
  m.def(
      "compression_report",
      [](std::uint64_t items, std::size_t dim, std::size_t bytes_per_value, std::uint32_t bits) {
        const auto r = compression_report(items, dim, bytes_per_value, bits);
        py::dict d;
        d["embedding_bytes"] = r.embedding_bytes;
        d["code_bytes"] = r.code_bytes;
        d["ratio"] = r.ratio();
        return d;
      },
      py::arg("items"), py::arg("dim"), py::arg("bytes_per_value"), py::arg("bits"));

  m.def(
      "gen_synthetic",
      [](const py::object& config, const std::filesystem::path& dir) {
        const auto paths = gen_synthetic(app_config_from(config).bench, dir);
        return std::make_pair(paths.changelog, paths.queries);
      },
      py::arg("config"), py::arg("dir"), "Writes changes.jsonl and queries.jsonl; config as in the CLI file.");
  m.def(
      "run_benchmark",
      [](const py::object& config, const std::filesystem::path& dir) {
        const AppConfig app = app_config_from(config);
        std::string text;
        {
          py::gil_scoped_release release;
          text = run_benchmark(app.bench, dir).to_json();
        }
        return json_loads(text);
      },
      py::arg("config"), py::arg("dir"));
}
