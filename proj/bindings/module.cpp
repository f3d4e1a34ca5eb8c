#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "uee/commands.hpp"
#include "uee/config.hpp"
#include "uee/core.hpp"
#include "uee/environment.hpp"
#include "uee/errors.hpp"
#include "uee/evaluation.hpp"
#include "uee/policy.hpp"

namespace py = pybind11;
using namespace uee;

PYBIND11_MODULE(ueeucb, m) {
    m.doc() = "Unsupervised exit selection for multi-exit cascades";
    m.attr("__version__") = kToolVersion;

    py::register_exception<Error>(m, "UeeError");

    py::class_<ExitProfile>(m, "ExitProfile")
        .def(py::init<std::vector<int>, std::vector<double>>(), py::arg("layer_positions"),
             py::arg("costs"))
        .def_property_readonly("num_exits", &ExitProfile::num_exits)
        .def_property_readonly("layer_positions", &ExitProfile::layer_positions)
        .def_property_readonly("costs", &ExitProfile::costs);

    py::class_<PredictionRecord>(m, "PredictionRecord")
        .def(py::init([](std::vector<Label> predictions, std::optional<Label> true_label) {
                 return PredictionRecord{std::move(predictions), true_label};
             }),
             py::arg("predictions"), py::arg("true_label") = std::nullopt)
        .def_readwrite("predictions", &PredictionRecord::predictions)
        .def_readwrite("true_label", &PredictionRecord::true_label);

    py::class_<LossVector>(m, "LossVector")
        .def_property_readonly("gammas", &LossVector::gammas)
        .def_property_readonly("losses", &LossVector::losses);

    py::class_<BanditState>(m, "BanditState")
        .def_readonly("observations", &BanditState::observations)
        .def_readonly("disagreements", &BanditState::disagreements)
        .def_readonly("disagreement_rate", &BanditState::disagreement_rate)
        .def_readonly("round", &BanditState::round);

    m.def("build_loss_vector", &build_loss_vector, py::arg("gammas"), py::arg("profile"));
    m.def("optimal_exit", &optimal_exit, py::arg("losses"));
    m.def("reward_gaps", &reward_gaps, py::arg("losses"));

    py::class_<EnvironmentSpec>(m, "EnvironmentSpec")
        .def(py::init<std::vector<double>, double, double, std::uint64_t,
                      std::optional<std::int64_t>>(),
             py::arg("gammas"), py::arg("label_prior") = 0.5, py::arg("violation_rate") = 0.0,
             py::arg("seed") = 0, py::arg("max_samples") = std::nullopt)
        .def_readonly("gammas", &EnvironmentSpec::gammas)
        .def_readonly("label_prior", &EnvironmentSpec::label_prior)
        .def_readonly("violation_rate", &EnvironmentSpec::violation_rate)
        .def_readwrite("seed", &EnvironmentSpec::seed)
        .def_property_readonly("num_exits", &EnvironmentSpec::num_exits);

    py::class_<Trace>(m, "Trace")
        .def(py::init<>())
        .def_readwrite("num_exits", &Trace::num_exits)
        .def_readwrite("label_alphabet", &Trace::label_alphabet)
        .def_readwrite("records", &Trace::records)
        .def_property_readonly("size", &Trace::size);

    m.def("open_trace", &open_trace, py::arg("path"));
    m.def("write_trace",
          py::overload_cast<const std::filesystem::path&, const Trace&>(&write_trace),
          py::arg("path"), py::arg("trace"));
    m.def("empirical_gammas", &empirical_gammas, py::arg("trace"));
    m.def("make_category_trace", &make_category_trace, py::arg("num_exits"),
          py::arg("sd_violation"), py::arg("all_wrong"), py::arg("all_correct"), py::arg("good"),
          py::arg("seed"));

    py::class_<SampleStream>(m, "SampleStream")
        .def("next", &SampleStream::next)
        .def("reset", &SampleStream::reset)
        .def_property_readonly("num_exits", &SampleStream::num_exits);

    py::class_<SyntheticStream, SampleStream>(m, "SyntheticStream")
        .def(py::init<EnvironmentSpec>(), py::arg("spec"));

    py::class_<TraceStream, SampleStream>(m, "TraceStream")
        .def(py::init<const Trace&, std::optional<std::uint64_t>>(), py::arg("trace"),
             py::arg("shuffle_seed") = std::nullopt, py::keep_alive<1, 2>());

    py::class_<PolicyKind>(m, "PolicyKind")
        .def_static("uee_ucb", &PolicyKind::uee_ucb, py::arg("alpha") = 1.0)
        .def_static("last_exit", &PolicyKind::last_exit)
        .def_static("random_exit", &PolicyKind::random_exit)
        .def_static("fixed", &PolicyKind::fixed, py::arg("exit"))
        .def_static("oracle_ucb1", &PolicyKind::oracle_ucb1, py::arg("alpha") = 1.0)
        .def_static("parse", &PolicyKind::parse, py::arg("text"), py::arg("alpha") = 1.0)
        .def_property_readonly("alpha", &PolicyKind::alpha)
        .def_property_readonly("supervised", &PolicyKind::is_supervised)
        .def_property_readonly("name", &PolicyKind::name);

    py::class_<Decision>(m, "Decision")
        .def_readonly("chosen_exit", &Decision::chosen_exit)
        .def_readonly("ucb_indices", &Decision::ucb_indices);

    m.def("uee_indices", &uee_indices, py::arg("disagreement_rate"), py::arg("observations"),
          py::arg("costs"), py::arg("t"), py::arg("alpha") = 1.0);

    py::class_<Policy>(m, "Policy")
        .def(py::init<const ExitProfile&, PolicyKind, std::uint64_t>(), py::arg("profile"),
             py::arg("kind"), py::arg("seed"))
        .def("decide", py::overload_cast<std::int64_t>(&Policy::decide), py::arg("t"))
        .def("decide", py::overload_cast<>(&Policy::decide))
        .def(
            "update",
            [](Policy& self, const std::vector<Label>& prefix, std::optional<Label> true_label) {
                self.update(std::span<const Label>(prefix.data(), prefix.size()), true_label);
            },
            py::arg("observed_prefix"), py::arg("true_label") = std::nullopt)
        .def_property_readonly("state", &Policy::state, py::return_value_policy::copy)
        .def_property_readonly("num_exits", &Policy::num_exits);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("chosen_exits", &Trajectory::chosen_exits)
        .def_readonly("per_round_regret", &Trajectory::per_round_regret)
        .def_readonly("cumulative_regret", &Trajectory::cumulative_regret)
        .def_readonly("trial_seed", &Trajectory::trial_seed);

    py::class_<CategoryCounts>(m, "CategoryCounts")
        .def_readonly("sd_violation", &CategoryCounts::sd_violation)
        .def_readonly("all_wrong", &CategoryCounts::all_wrong)
        .def_readonly("all_correct", &CategoryCounts::all_correct)
        .def_readonly("good", &CategoryCounts::good)
        .def_readonly("total", &CategoryCounts::total);

    py::class_<RegretSummary>(m, "RegretSummary")
        .def_readonly("policy", &RegretSummary::policy)
        .def_readonly("trials", &RegretSummary::trials)
        .def_readonly("mean_cumulative_regret", &RegretSummary::mean_cumulative_regret)
        .def_readonly("ci_halfwidth", &RegretSummary::ci_halfwidth);

    py::class_<SweepPoint>(m, "SweepPoint")
        .def_readonly("epsilon", &SweepPoint::epsilon)
        .def_readonly("summary", &SweepPoint::summary);

    m.def("run_episode", &run_episode, py::arg("profile"), py::arg("kind"), py::arg("stream"),
          py::arg("losses"), py::arg("rounds"), py::arg("seed"));
    m.def("run_synthetic_trials", &run_synthetic_trials, py::arg("profile"), py::arg("kind"),
          py::arg("spec"), py::arg("losses"), py::arg("rounds"), py::arg("trials"),
          py::arg("base_seed"), py::arg("parallelism") = 1,
          py::call_guard<py::gil_scoped_release>());
    m.def("run_replay_trials", &run_replay_trials, py::arg("profile"), py::arg("kind"),
          py::arg("trace"), py::arg("shuffle"), py::arg("losses"), py::arg("rounds"),
          py::arg("trials"), py::arg("base_seed"), py::arg("parallelism") = 1,
          py::call_guard<py::gil_scoped_release>());
    m.def("aggregate_trials", &aggregate_trials, py::arg("trajectories"));
    m.def("categorize", &categorize, py::arg("trace"));
    m.def("theorem_bound", &theorem_bound, py::arg("losses"), py::arg("rounds"));
    m.def("sd_violation_sweep", &sd_violation_sweep, py::arg("base"), py::arg("epsilons"),
          py::arg("kind"), py::arg("profile"), py::arg("rounds"), py::arg("trials"),
          py::arg("base_seed"), py::arg("parallelism") = 1,
          py::call_guard<py::gil_scoped_release>());

    m.def("parse_exit_configuration", &parse_exit_configuration, py::arg("bits"));
    m.def("build_cs1", &build_cs1, py::arg("layer_positions"), py::arg("lambda"));
    m.def("build_cs2", &build_cs2, py::arg("layer_positions"), py::arg("threshold") = 7,
          py::arg("low") = 0.5, py::arg("high") = 1.0);
}
