#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "spot/agent/policy.hpp"
#include "spot/agent/train.hpp"
#include "spot/cli/app.hpp"
#include "spot/cli/artifacts.hpp"
#include "spot/cli/config.hpp"
#include "spot/cvae/cvae.hpp"
#include "spot/cvae/density.hpp"
#include "spot/cvae/gaussian.hpp"
#include "spot/data/generate.hpp"
#include "spot/envs/env.hpp"
#include "spot/finetune/finetune.hpp"
#include "spot/tabular/mdp.hpp"

namespace py = pybind11;
using namespace spot;
using autodiff::Tensor;

namespace {

// pybind11 holders cannot be pointers to const; models are never mutated
// through this handle.
using Density = std::shared_ptr<cvae::BehaviorDensity>;

Density share(std::shared_ptr<const cvae::BehaviorDensity> d) {
  return std::const_pointer_cast<cvae::BehaviorDensity>(std::move(d));
}
using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using release_gil = py::call_guard<py::gil_scoped_release>;

// Config for `env` with a JSON object of overrides in the CLI config format.
cli::RunConfig resolve(const std::string& env, const std::string& overrides) {
  cli::RunConfig c = cli::apply_overrides(cli::default_config(env),
                                          nlohmann::json::parse(overrides.empty() ? "{}" : overrides));
  cli::validate(c);
  return c;
}

Tensor to_tensor(const Array& a, std::size_t cols) {
  if (a.ndim() != 2 || static_cast<std::size_t>(a.shape(1)) != cols) {
    throw ShapeError("expected a 2-D array with " + std::to_string(cols) + " columns");
  }
  Tensor t(static_cast<std::size_t>(a.shape(0)), cols);
  std::copy(a.data(), a.data() + a.size(), t.data().begin());
  return t;
}

py::array_t<double> rows_of(const data::OfflineDataset& ds, std::size_t cols,
                            std::span<const double> (data::OfflineDataset::*row)(std::size_t)
                                const) {
  py::array_t<double> out({ds.size(), cols});
  double* p = out.mutable_data();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto r = (ds.*row)(i);
    std::copy(r.begin(), r.end(), p + i * cols);
  }
  return out;
}

py::dict eval_dict(const agent::PolicyEvaluation& e) {
  py::dict d;
  d["mean_return"] = e.mean_return;
  d["normalized_score"] = e.normalized_score;
  d["goal_rate"] = e.goal_rate;
  return d;
}

std::vector<py::dict> summary_of(const agent::TrainLog& log) {
  std::vector<py::dict> out;
  for (const agent::EvalRecord& e : log.evals()) {
    py::dict d;
    d["step"] = e.step;
    d["eval_return"] = e.eval_return;
    d["normalized_score"] = e.normalized_score;
    d["goal_rate"] = e.goal_rate;
    d["percentile5_logpb"] = e.percentile5_logpb;
    d["lambda"] = e.lambda;
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Supported policy optimization: datasets, behavior densities, agents";

  py::register_local_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const IoError& e) {
      PyErr_SetString(PyExc_OSError, e.what());
    } catch (const Error& e) {
      PyErr_SetString(PyExc_RuntimeError,
                      (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    } catch (const nlohmann::json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  py::class_<data::OfflineDataset>(m, "Dataset")
      .def_property_readonly("env", &data::OfflineDataset::env_name)
      .def_property_readonly("regime",
                             [](const data::OfflineDataset& d) { return data::to_string(d.regime()); })
      .def_property_readonly("state_dim", &data::OfflineDataset::state_dim)
      .def_property_readonly("action_dim", &data::OfflineDataset::action_dim)
      .def_property_readonly("normalized", &data::OfflineDataset::normalized)
      .def("__len__", &data::OfflineDataset::size)
      .def_property_readonly("states",
                             [](const data::OfflineDataset& d) {
                               return rows_of(d, d.state_dim(), &data::OfflineDataset::state);
                             })
      .def_property_readonly("actions",
                             [](const data::OfflineDataset& d) {
                               return rows_of(d, d.action_dim(), &data::OfflineDataset::action);
                             })
      .def_property_readonly("rewards",
                             [](const data::OfflineDataset& d) {
                               py::array_t<double> out(d.size());
                               for (std::size_t i = 0; i < d.size(); ++i) {
                                 out.mutable_at(i) = d.reward(i);
                               }
                               return out;
                             })
      .def("save", [](const data::OfflineDataset& d, const std::filesystem::path& p) {
        data::save_dataset(p, d);
      })
      .def("__eq__", [](const data::OfflineDataset& a, const data::OfflineDataset& b) {
        return a == b;
      });

  m.def(
      "generate_dataset",
      [](const std::string& env, const std::string& regime, std::size_t size, std::uint64_t seed,
         bool normalize) {
        data::OfflineDataset ds =
            data::generate(env, data::parse_regime(regime), size, seed);
        return normalize ? data::normalize_states(ds) : ds;
      },
      py::arg("env"), py::arg("regime"), py::arg("size"), py::arg("seed") = 0,
      py::arg("normalize") = true, release_gil());
  m.def("load_dataset", &data::load_dataset, py::arg("path"));

  py::class_<cvae::BehaviorDensity, Density>(m, "Density")
      .def_property_readonly("kind", &cvae::BehaviorDensity::kind)
      .def_property_readonly("state_dim", &cvae::BehaviorDensity::state_dim)
      .def_property_readonly("action_dim", &cvae::BehaviorDensity::action_dim)
      .def(
          "log_density",
          [](const cvae::BehaviorDensity& d, const Array& s, const Array& a,
             std::size_t samples, std::uint64_t seed) {
            const Tensor st = to_tensor(s, d.state_dim());
            const Tensor at = to_tensor(a, d.action_dim());
            std::mt19937_64 rng(seed);
            return d.estimate_log_density(st, at, samples, rng);
          },
          py::arg("states"), py::arg("actions"), py::arg("samples") = 500, py::arg("seed") = 0)
      .def("save", [](const cvae::BehaviorDensity& d, const std::filesystem::path& p) {
        cvae::save_density(p, d);
      });

  m.def(
      "train_density",
      [](const data::OfflineDataset& ds, const std::string& overrides,
         std::uint64_t seed) -> std::pair<Density, std::vector<double>> {
        const cli::RunConfig c = resolve(ds.env_name(), overrides);
        if (c.density == "gaussian") {
          auto r = cvae::gaussian_density_baseline(ds, c.vae, seed);
          return {std::make_shared<cvae::GaussianDensityModel>(std::move(r.model)),
                  std::move(r.loss_trace)};
        }
        auto r = cvae::train_vae(ds, c.vae, seed);
        return {std::make_shared<cvae::CvaeModel>(std::move(r.model)),
                std::move(r.loss_trace)};
      },
      py::arg("dataset"), py::arg("overrides") = "{}", py::arg("seed") = 0, release_gil());
  m.def(
      "load_density", [](const std::filesystem::path& p) -> Density { return Density(cvae::load_density(p)); },
      py::arg("path"));

  py::class_<agent::SpotAgent>(m, "Agent")
      .def_property_readonly("lam", &agent::SpotAgent::lambda)
      .def_property_readonly("state_dim", &agent::SpotAgent::state_dim)
      .def_property_readonly("update_count", &agent::SpotAgent::update_count)
      .def_property_readonly("density",
                             [](const agent::SpotAgent& a) { return share(a.density_ptr()); })
      .def(
          "act",
          [](const agent::SpotAgent& a, const std::vector<double>& obs) {
            return a.policy().act_raw(obs);
          },
          py::arg("observation"))
      .def("save", [](const agent::SpotAgent& a, const std::filesystem::path& p) {
        agent::save_agent(p, a);
      })
      .def("same_parameters", &agent::SpotAgent::same_parameters);

  m.def(
      "train_spot",
      [](const data::OfflineDataset& ds, Density density, const std::string& overrides,
         std::uint64_t seed) {
        const cli::RunConfig c = resolve(ds.env_name(), overrides);
        std::optional<agent::OfflineRun> run;
        {
          py::gil_scoped_release release;
          run.emplace(agent::train_offline(ds, std::move(density), c.spot, seed));
        }
        return std::make_pair(std::move(run->agent), summary_of(run->log));
      },
      py::arg("dataset"), py::arg("density"), py::arg("overrides") = "{}", py::arg("seed") = 0);
  m.def("load_agent", &agent::load_agent, py::arg("path"));

  m.def(
      "evaluate",
      [](const agent::SpotAgent& a, const std::string& env, std::size_t episodes,
         std::uint64_t seed) {
        const auto e = envs::make_env(env);
        agent::PolicyEvaluation ev;
        {
          py::gil_scoped_release release;
          ev = agent::evaluate(a.policy(), *e, episodes, seed);
        }
        return eval_dict(ev);
      },
      py::arg("agent"), py::arg("env"), py::arg("episodes") = 20, py::arg("seed") = 0);

  m.def(
      "finetune",
      [](const agent::SpotAgent& a, const data::OfflineDataset& ds, const std::string& overrides,
         std::uint64_t seed) {
        const cli::RunConfig c = resolve(ds.env_name(), overrides);
        std::optional<finetune::FinetuneRun> run;
        {
          py::gil_scoped_release release;
          run.emplace(finetune::finetune(a, ds, c.finetune, seed));
        }
        return std::make_pair(std::move(run->agent), summary_of(run->log));
      },
      py::arg("agent"), py::arg("dataset"), py::arg("overrides") = "{}", py::arg("seed") = 0);

  m.def(
      "lambda_at",
      [](double lambda0, std::size_t total_steps, std::size_t t) {
        return finetune::lambda_at({lambda0, total_steps}, t);
      },
      py::arg("lambda0"), py::arg("total_steps"), py::arg("t"));

  m.def(
      "suboptimality_gap",
      [](std::size_t states, std::size_t actions, double gamma, std::uint64_t seed, double eps) {
        const tabular::GapReport r =
            tabular::suboptimality_gap(tabular::random_mdp(states, actions, gamma, seed), eps);
        py::dict d;
        d["gap"] = r.gap;
        d["bound"] = r.bound;
        d["alpha"] = r.alpha;
        return d;
      },
      py::arg("states"), py::arg("actions"), py::arg("gamma"), py::arg("seed"), py::arg("eps"));

  m.def("default_config",
        [](const std::string& env) { return cli::to_json(cli::default_config(env)).dump(); },
        py::arg("env"));
  m.def("env_names", &envs::env_names);
  m.def("git_blob_hash", [](const py::bytes& b) { return cli::git_blob_hash(std::string(b)); });

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
