// Python surface for the frbm core: model types, exact evaluation, sampling,
// both trainers, AIS, features, and file formats.
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "frbm/cd.hpp"
#include "frbm/config.hpp"
#include "frbm/dataio.hpp"
#include "frbm/dataset.hpp"
#include "frbm/evaluation.hpp"
#include "frbm/exact.hpp"
#include "frbm/fw.hpp"
#include "frbm/io.hpp"
#include "frbm/model.hpp"
#include "frbm/sampling.hpp"
#include "frbm/threads.hpp"

namespace py = pybind11;
using namespace frbm;

namespace {

BinaryDataset dataset_from_array(py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> rows,
                                 const std::vector<std::uint16_t>& labels) {
    if (rows.ndim() != 2) throw std::invalid_argument("rows must be a 2d array of 0/1 bytes");
    const auto n = rows.shape(0);
    const auto dim = rows.shape(1);
    BinaryDataset data(static_cast<int>(dim));
    auto view = rows.unchecked<2>();
    Bits row(static_cast<std::size_t>(dim));
    for (py::ssize_t i = 0; i < n; ++i) {
        for (py::ssize_t j = 0; j < dim; ++j) row[static_cast<std::size_t>(j)] = view(i, j) ? 1 : 0;
        data.append(row);
    }
    if (!labels.empty()) data.set_labels(labels);
    return data;
}

py::array_t<std::uint8_t> matrix_to_array(const PackedBitMatrix& m) {
    py::array_t<std::uint8_t> out({m.rows(), static_cast<std::int64_t>(m.dim())});
    auto view = out.mutable_unchecked<2>();
    for (std::int64_t r = 0; r < m.rows(); ++r) {
        for (int j = 0; j < m.dim(); ++j) view(r, j) = static_cast<std::uint8_t>(m.get(r, j));
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_frbm, m) {
    m.doc() = "Boltzmann machines with a growing hidden layer: training, "
              "sampling, and likelihood evaluation.";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<WeightAtom>(m, "WeightAtom")
        .def_readonly("w", &WeightAtom::w)
        .def_readonly("mass", &WeightAtom::mass);

    py::class_<WeightAtomMix>(m, "WeightAtomMix")
        .def(py::init<int>(), py::arg("visible_dim"))
        .def(py::init<int, Vec, double>(), py::arg("visible_dim"), py::arg("bias"),
             py::arg("alpha"))
        .def_property_readonly("visible_dim", &WeightAtomMix::visible_dim)
        .def_property_readonly("atom_count", &WeightAtomMix::atom_count)
        .def_property_readonly("atoms", &WeightAtomMix::atoms)
        .def_property("bias", &WeightAtomMix::bias, &WeightAtomMix::set_bias)
        .def_property("alpha", &WeightAtomMix::alpha, &WeightAtomMix::set_alpha)
        .def("add_atom", &WeightAtomMix::add_atom, py::arg("w"), py::arg("mass"))
        .def("set_mass", &WeightAtomMix::set_mass, py::arg("i"), py::arg("mass"))
        .def("scale_masses", &WeightAtomMix::scale_masses, py::arg("factor"))
        .def("is_standard", &WeightAtomMix::is_standard);

    py::class_<RbmModel>(m, "RbmModel")
        .def(py::init<Mat, Vec>(), py::arg("weights"), py::arg("bias"))
        .def_readonly("weights", &RbmModel::weights)
        .def_readonly("bias", &RbmModel::bias)
        .def_property_readonly("visible_dim", &RbmModel::visible_dim)
        .def_property_readonly("hidden_dim", &RbmModel::hidden_dim);

    m.def("to_standard_rbm", &to_standard_rbm);
    m.def("from_standard_rbm", &from_standard_rbm);
    m.def("fractional_proposal_rbm", &fractional_proposal_rbm);
    m.def("unnormalized_log_prob",
          py::overload_cast<const WeightAtomMix&, const Bits&>(&unnormalized_log_prob));
    m.def("hidden_conditional", py::overload_cast<const RbmModel&, const Bits&>(&hidden_conditional));
    m.def("visible_conditional",
          py::overload_cast<const RbmModel&, const Bits&>(&visible_conditional));

    py::class_<BinaryDataset>(m, "BinaryDataset")
        .def(py::init(&dataset_from_array), py::arg("rows"),
             py::arg("labels") = std::vector<std::uint16_t>{})
        .def_property_readonly("dim", &BinaryDataset::dim)
        .def("__len__", [](const BinaryDataset& d) { return d.size(); })
        .def_property_readonly("labels", &BinaryDataset::labels)
        .def("has_labels", &BinaryDataset::has_labels)
        .def("mean", &BinaryDataset::mean)
        .def("to_array", [](const BinaryDataset& d) { return matrix_to_array(d.vectors()); });

    m.def(
        "split",
        [](const BinaryDataset& d, std::int64_t n, std::uint64_t seed) {
            SplitResult r = split(d, n, seed);
            return py::make_tuple(std::move(r.train), std::move(r.validation));
        },
        py::arg("data"), py::arg("validation_count"), py::arg("seed"));

    m.def("exact_log_partition", py::overload_cast<const WeightAtomMix&>(&exact_log_partition));
    m.def("exact_log_partition", py::overload_cast<const RbmModel&>(&exact_log_partition));
    m.def("exact_visible_distribution",
          py::overload_cast<const WeightAtomMix&>(&exact_visible_distribution));
    m.def("exact_avg_loglik",
          py::overload_cast<const WeightAtomMix&, const BinaryDataset&>(&exact_avg_loglik));
    m.def("exact_avg_loglik",
          py::overload_cast<const RbmModel&, const BinaryDataset&>(&exact_avg_loglik));

    py::class_<SampleBuffer>(m, "SampleBuffer")
        .def_property_readonly("samples",
                               [](const SampleBuffer& b) { return matrix_to_array(b.samples); })
        .def_readonly("model_digest", &SampleBuffer::model_digest)
        .def_readonly("burn_in", &SampleBuffer::burn_in)
        .def_readonly("thinning", &SampleBuffer::thinning);

    m.def("run_chain", &run_chain, py::arg("model"), py::arg("n"), py::arg("burn_in"),
          py::arg("thinning"), py::arg("seed"), py::arg("n_chains") = 1,
          py::call_guard<py::gil_scoped_release>());

    py::enum_<AlphaMode>(m, "AlphaMode")
        .value("Count", AlphaMode::Count)
        .value("Gradient", AlphaMode::Gradient);

    py::class_<FwConfig>(m, "FwConfig")
        .def(py::init<>())
        .def_readwrite("lambda_", &FwConfig::lambda)
        .def_readwrite("eta", &FwConfig::eta)
        .def_readwrite("max_units", &FwConfig::max_units)
        .def_readwrite("inner_tol", &FwConfig::inner_tol)
        .def_readwrite("inner_max_iters", &FwConfig::inner_max_iters)
        .def_readwrite("samples_per_iter", &FwConfig::samples_per_iter)
        .def_readwrite("minibatch", &FwConfig::minibatch)
        .def_readwrite("bias_epochs", &FwConfig::bias_epochs)
        .def_readwrite("alpha_mode", &FwConfig::alpha_mode)
        .def_readwrite("alpha_grad_steps", &FwConfig::alpha_grad_steps)
        .def_readwrite("alpha_grad_rate", &FwConfig::alpha_grad_rate)
        .def_readwrite("eval_every", &FwConfig::eval_every)
        .def_readwrite("early_stop", &FwConfig::early_stop)
        .def_readwrite("early_stop_patience", &FwConfig::early_stop_patience)
        .def_readwrite("atom_stop_tol", &FwConfig::atom_stop_tol)
        .def_readwrite("seed", &FwConfig::seed)
        .def_readwrite("n_chains", &FwConfig::n_chains)
        .def_readwrite("burn_in", &FwConfig::burn_in)
        .def_readwrite("thinning", &FwConfig::thinning)
        .def_readwrite("exact_negative", &FwConfig::exact_negative);

    py::class_<TrainRecord>(m, "TrainRecord")
        .def_readonly("t", &TrainRecord::t)
        .def_readonly("inner_value", &TrainRecord::inner_value)
        .def_readonly("inner_grad_norm", &TrainRecord::inner_grad_norm)
        .def_readonly("w_norm", &TrainRecord::w_norm)
        .def_readonly("train_avg_ull", &TrainRecord::train_avg_ull)
        .def_readonly("valid_avg_ull", &TrainRecord::valid_avg_ull)
        .def_readonly("gap", &TrainRecord::gap)
        .def_readonly("evaluated", &TrainRecord::evaluated);

    py::class_<TrainReport>(m, "TrainReport")
        .def_readonly("records", &TrainReport::records)
        .def_readonly("selected_t", &TrainReport::selected_t)
        .def_readonly("stopped_early", &TrainReport::stopped_early);

    py::class_<FwResult>(m, "FwResult")
        .def_readonly("model", &FwResult::model)
        .def_readonly("report", &FwResult::report);

    m.def("fw_train",
          py::overload_cast<const BinaryDataset&, const BinaryDataset&, const FwConfig&>(&fw_train),
          py::arg("train"), py::arg("valid"), py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("fw_train",
          py::overload_cast<const BinaryDataset&, const BinaryDataset&, const FwConfig&,
                            const WeightAtomMix&>(&fw_train),
          py::arg("train"), py::arg("valid"), py::arg("config"), py::arg("warm_start"),
          py::call_guard<py::gil_scoped_release>());

    py::enum_<RestartSelect>(m, "RestartSelect")
        .value("Gap", RestartSelect::Gap)
        .value("Exact", RestartSelect::Exact);

    py::class_<CdConfig>(m, "CdConfig")
        .def(py::init<>())
        .def_readwrite("k", &CdConfig::k)
        .def_readwrite("learning_rate", &CdConfig::learning_rate)
        .def_readwrite("minibatch", &CdConfig::minibatch)
        .def_readwrite("epochs", &CdConfig::epochs)
        .def_readwrite("persistent", &CdConfig::persistent)
        .def_readwrite("hidden_units", &CdConfig::hidden_units)
        .def_readwrite("init_scale", &CdConfig::init_scale)
        .def_readwrite("restarts", &CdConfig::restarts)
        .def_readwrite("eval_every", &CdConfig::eval_every)
        .def_readwrite("early_stop_patience", &CdConfig::early_stop_patience)
        .def_readwrite("restart_select", &CdConfig::restart_select)
        .def_readwrite("seed", &CdConfig::seed);

    py::class_<CdRecord>(m, "CdRecord")
        .def_readonly("restart", &CdRecord::restart)
        .def_readonly("epoch", &CdRecord::epoch)
        .def_readonly("train_avg_ull", &CdRecord::train_avg_ull)
        .def_readonly("valid_avg_ull", &CdRecord::valid_avg_ull)
        .def_readonly("gap", &CdRecord::gap);

    py::class_<CdReport>(m, "CdReport")
        .def_readonly("records", &CdReport::records)
        .def_readonly("selected_restart", &CdReport::selected_restart)
        .def_readonly("selected_epoch", &CdReport::selected_epoch)
        .def_readonly("stopped_early", &CdReport::stopped_early);

    py::class_<CdResult>(m, "CdResult")
        .def_readonly("model", &CdResult::model)
        .def_readonly("report", &CdResult::report);

    m.def("cd_train",
          py::overload_cast<const BinaryDataset&, const BinaryDataset&, const CdConfig&>(&cd_train),
          py::arg("train"), py::arg("valid"), py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("cd_train",
          py::overload_cast<const BinaryDataset&, const BinaryDataset&, const CdConfig&,
                            const RbmModel&>(&cd_train),
          py::arg("train"), py::arg("valid"), py::arg("config"), py::arg("init_model"),
          py::call_guard<py::gil_scoped_release>());

    m.def("default_schedule", &default_schedule);
    m.def("uniform_schedule", &uniform_schedule, py::arg("n"));

    py::class_<AisConfig>(m, "AisConfig")
        .def(py::init<>())
        .def_readwrite("schedule", &AisConfig::schedule)
        .def_readwrite("runs", &AisConfig::runs)
        .def_readwrite("base_bias", &AisConfig::base_bias)
        .def_readwrite("seed", &AisConfig::seed);

    py::class_<LikelihoodEstimate>(m, "LikelihoodEstimate")
        .def_readonly("log_z_mean", &LikelihoodEstimate::log_z_mean)
        .def_readonly("log_z_std", &LikelihoodEstimate::log_z_std)
        .def_readonly("base_log_z", &LikelihoodEstimate::base_log_z)
        .def_readonly("run_log_weights", &LikelihoodEstimate::run_log_weights)
        .def_readonly("avg_test_loglik", &LikelihoodEstimate::avg_test_loglik)
        .def_readonly("n_test", &LikelihoodEstimate::n_test);

    m.def("ais_log_partition", &ais_log_partition, py::arg("model"), py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("evaluate_ais", &evaluate_ais, py::arg("model"), py::arg("test"), py::arg("config"),
          py::call_guard<py::gil_scoped_release>());

    m.def("extract_features", &extract_features, py::arg("model"), py::arg("data"));

    py::class_<ClassifyResult>(m, "ClassifyResult")
        .def_readonly("error_rate", &ClassifyResult::error_rate)
        .def_readonly("predictions", &ClassifyResult::predictions);

    m.def("softmax_classify", &softmax_classify, py::arg("train_x"), py::arg("train_y"),
          py::arg("test_x"), py::arg("test_y"), py::arg("l2") = 1e-4, py::arg("iters") = 500);

    m.def("save_frbm", &save_frbm, py::arg("path"), py::arg("mix"));
    m.def("load_frbm", &load_frbm, py::arg("path"));
    m.def("save_frbm_text", &save_frbm_text, py::arg("path"), py::arg("mix"));
    m.def("load_frbm_text", &load_frbm_text, py::arg("path"));
    m.def("save_fset", &save_fset, py::arg("path"), py::arg("data"));
    m.def("load_fset", &load_fset, py::arg("path"));
    m.def("model_digest", py::overload_cast<const WeightAtomMix&>(&model_digest));

    m.def("set_thread_cap", &set_thread_cap, py::arg("n"));
    m.def("thread_cap", &thread_cap);
    m.attr("__version__") = "0.1.0";
}
