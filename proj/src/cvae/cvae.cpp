#include "spot/cvae/cvae.hpp"

#include <cmath>
#include <numbers>

#include "spot/autodiff/adam.hpp"
#include "spot/autodiff/ops.hpp"
#include "spot/envs/env.hpp"
#include "spot/errors.hpp"
#include "spot/numerics.hpp"

namespace spot::cvae {

using autodiff::Graph;
using autodiff::Mlp;
using autodiff::NamedTensor;
using autodiff::Tensor;
using autodiff::Var;

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double log_normal(double x, double mu, double log_var) {
  const double d = x - mu;
  return -0.5 * (kLog2Pi + log_var + d * d * std::exp(-log_var));
}

Tensor concat(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("concat: row counts " + std::to_string(a.rows()) +
                               " and " + std::to_string(b.rows()) + " differ");
  }
  Tensor out(a.rows(), a.cols() + b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto dst = out.row_span(r);
    std::ranges::copy(a.row_span(r), dst.begin());
    std::ranges::copy(b.row_span(r), dst.begin() + a.cols());
  }
  return out;
}

Tensor meta_row(std::initializer_list<double> values) {
  return Tensor::row(values);
}

std::size_t as_size(double v) { return static_cast<std::size_t>(std::llround(v)); }

}  // namespace

CvaeModel::CvaeModel(std::size_t state_dim, ActionBounds bounds,
                     const CvaeConfig& config, std::mt19937_64& rng)
    : state_dim_(state_dim), bounds_(std::move(bounds)),
      latent_dim_(config.latent_dim ? config.latent_dim : 2 * bounds_.dim()),
      kl_weight_(config.kl_weight), decoder_log_var_(config.decoder_log_var),
      log_var_min_(config.log_var_min), log_var_max_(config.log_var_max) {
  bounds_.validate();
  if (config.kl_weight < 0.0) throw ConfigError("kl_weight must be >= 0");
  const std::size_t ad = bounds_.dim();
  encoder_ = Mlp(autodiff::make_mlp_spec(state_dim_ + ad, config.hidden,
                                         config.layers, 2 * latent_dim_),
                 rng);
  decoder_ = Mlp(autodiff::make_mlp_spec(state_dim_ + latent_dim_,
                                         config.hidden, config.layers, ad),
                 rng);
}

CvaeModel::CvaeModel(std::size_t state_dim, ActionBounds bounds,
                     const CvaeConfig& config, Mlp encoder, Mlp decoder)
    : state_dim_(state_dim), bounds_(std::move(bounds)),
      latent_dim_(config.latent_dim ? config.latent_dim : 2 * bounds_.dim()),
      kl_weight_(config.kl_weight), decoder_log_var_(config.decoder_log_var),
      log_var_min_(config.log_var_min), log_var_max_(config.log_var_max),
      encoder_(std::move(encoder)), decoder_(std::move(decoder)) {
  bounds_.validate();
  const std::size_t ad = bounds_.dim();
  if (encoder_.spec().input_width() != state_dim_ + ad ||
      encoder_.spec().output_width() != 2 * latent_dim_ ||
      decoder_.spec().input_width() != state_dim_ + latent_dim_ ||
      decoder_.spec().output_width() != ad) {
    throw ShapeError("encoder/decoder widths do not fit the CVAE dims");
  }
}

CvaeModel::Bound CvaeModel::bind(Graph& g, bool trainable) const {
  return Bound{this, encoder_.bind(g, trainable), decoder_.bind(g, trainable)};
}

ElboTerms elbo_terms(const CvaeModel::Bound& bound, Var s, Var a,
                     const Tensor& noise, const ElboOptions& options) {
  using namespace autodiff;
  const CvaeModel& m = *bound.model;
  Graph& g = s.graph();
  const std::size_t latent = m.latent_dim();
  const Var enc = bound.encoder.forward(concat_cols(s, a));
  const Var mu = slice_cols(enc, 0, latent);
  const Var log_var =
      clip(slice_cols(enc, latent, 2 * latent), m.log_var_min(), m.log_var_max());
  const Var z = reparameterized_gaussian_sample(mu, log_var, noise);
  const Var mean_a =
      squash_to_bounds(bound.decoder.forward(concat_cols(s, z)), m.bounds());
  const Var dec_log_var =
      g.constant(Tensor(1, m.action_dim(), m.decoder_log_var()));
  ElboTerms terms;
  terms.reconstruction = row_sum(gaussian_log_density(a, mean_a, dec_log_var));
  if (options.kl == KlEstimator::kAnalytic) {
    terms.kl = scale(
        row_sum(add_scalar(exp(log_var) + square(mu) - log_var, -1.0)), 0.5);
  } else {
    const Var zero = g.constant(Tensor(1, latent, 0.0));
    terms.kl = row_sum(gaussian_log_density(z, mu, log_var)) -
               row_sum(gaussian_log_density(z, zero, zero));
  }
  terms.loss = scale(terms.kl, options.kl_weight) - terms.reconstruction;
  return terms;
}

Var elbo_loss(const CvaeModel::Bound& bound, Var s, Var a, const Tensor& noise,
              const ElboOptions& options) {
  return autodiff::mean(elbo_terms(bound, s, a, noise, options).loss);
}

std::vector<double> elbo_loss_rows(const CvaeModel& model, const Tensor& s,
                                   const Tensor& a, const Tensor& noise,
                                   const ElboOptions& options) {
  Graph g;
  const Var loss = elbo_terms(model.bind(g, false), g.constant(s),
                              g.constant(a), noise, options)
                       .loss;
  return loss.value().storage();
}

Var CvaeModel::log_density(Graph& g, Var s, Var a, const Tensor& noise) const {
  return autodiff::neg(elbo_terms(bind(g, false), s, a, noise, training_elbo()).loss);
}

Var CvaeModel::log_density_samples(Graph& g, Var s, Var a, const Tensor& noise,
                                  std::size_t samples) const {
  using namespace autodiff;
  if (samples == 0) throw ContractError("density estimate needs at least one sample");
  if (noise.cols() != samples * latent_dim_) {
    throw ShapeError("log_density_samples: noise shape " + to_string(noise.shape()) +
                     " should be [B, L * latent]");
  }
  if (samples == 1) return log_density(g, s, a, noise);
  const Bound bound = bind(g, false);
  const std::size_t rows = noise.rows();
  std::vector<Var> log_w;
  for (std::size_t l = 0; l < samples; ++l) {
    Tensor eps(rows, latent_dim_);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t k = 0; k < latent_dim_; ++k) eps(r, k) = noise(r, l * latent_dim_ + k);
    }
    log_w.push_back(neg(elbo_terms(bound, s, a, eps, {1.0, KlEstimator::kSampled}).loss));
  }
  // Log-mean-exp with the row max held constant.
  Tensor shift(rows, 1);
  for (std::size_t r = 0; r < rows; ++r) {
    double hi = log_w[0].value()[r];
    for (const Var& w : log_w) hi = std::max(hi, w.value()[r]);
    shift[r] = hi;
  }
  const Var m = g.constant(shift);
  Var total = exp(log_w[0] - m);
  for (std::size_t l = 1; l < samples; ++l) total = total + exp(log_w[l] - m);
  return add_scalar(log(total) + m, -std::log(static_cast<double>(samples)));
}

std::vector<DensityEstimate> iw_log_density(const CvaeModel& model,
                                            const Tensor& s, const Tensor& a,
                                            std::size_t num_samples,
                                            const Tensor& noise) {
  if (num_samples == 0) throw ContractError("iw_log_density needs L >= 1");
  const std::size_t batch = s.rows();
  const std::size_t latent = model.latent_dim();
  const std::size_t ad = model.action_dim();
  if (a.rows() != batch || s.cols() != model.state_dim() || a.cols() != ad) {
    throw ShapeError("iw_log_density: state/action shapes " +
                               autodiff::to_string(s.shape()) + " and " +
                               autodiff::to_string(a.shape()) +
                               " do not fit the model");
  }
  if (noise.rows() != batch * num_samples || noise.cols() != latent) {
    throw ShapeError("iw_log_density: noise shape " +
                               autodiff::to_string(noise.shape()) +
                               " should be [B * L, latent]");
  }
  const Tensor enc = model.encoder().predict(concat(s, a));
  const std::size_t rows = batch * num_samples;
  Tensor dec_in(rows, model.state_dim() + latent);
  Tensor mu(rows, latent);
  Tensor log_var(rows, latent);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t l = 0; l < num_samples; ++l) {
      const std::size_t r = b * num_samples + l;
      auto dst = dec_in.row_span(r);
      std::ranges::copy(s.row_span(b), dst.begin());
      for (std::size_t k = 0; k < latent; ++k) {
        const double m = enc(b, k);
        const double lv = std::clamp(enc(b, latent + k), model.log_var_min(),
                                     model.log_var_max());
        mu(r, k) = m;
        log_var(r, k) = lv;
        dst[model.state_dim() + k] = m + std::exp(0.5 * lv) * noise(r, k);
      }
    }
  }
  const Tensor mean_a =
      squash_to_bounds(model.decoder().predict(dec_in), model.bounds());
  std::vector<DensityEstimate> out(batch);
  std::vector<double> log_w(num_samples);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t l = 0; l < num_samples; ++l) {
      const std::size_t r = b * num_samples + l;
      double recon = 0.0;
      for (std::size_t j = 0; j < ad; ++j) {
        recon += log_normal(a(b, j), mean_a(r, j), model.decoder_log_var());
      }
      double log_q = 0.0;
      double log_prior = 0.0;
      for (std::size_t k = 0; k < latent; ++k) {
        const double z = dec_in(r, model.state_dim() + k);
        log_q += log_normal(z, mu(r, k), log_var(r, k));
        log_prior += log_normal(z, 0.0, 0.0);
      }
      log_w[l] = recon - (log_q - log_prior);
    }
    const double value =
        log_sum_exp(log_w) - std::log(static_cast<double>(num_samples));
    if (!std::isfinite(value)) {
      throw NumericError("iw_log_density: non-finite estimate at row " +
                         std::to_string(b));
    }
    out[b] = DensityEstimate{value, num_samples};
  }
  return out;
}

std::vector<double> CvaeModel::estimate_log_density(
    const Tensor& s, const Tensor& a, std::size_t num_samples,
    std::mt19937_64& rng) const {
  Tensor noise(s.rows() * num_samples, latent_dim_);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : noise.storage()) v = normal(rng);
  const std::vector<DensityEstimate> est =
      iw_log_density(*this, s, a, num_samples, noise);
  std::vector<double> out(est.size());
  for (std::size_t i = 0; i < est.size(); ++i) out[i] = est[i].value;
  return out;
}

std::vector<NamedTensor> CvaeModel::to_tensors(const std::string& prefix) const {
  std::vector<NamedTensor> out;
  out.push_back({prefix + "kind.cvae", meta_row({1.0})});
  out.push_back({prefix + "dims",
                 meta_row({static_cast<double>(state_dim_),
                           static_cast<double>(bounds_.dim()),
                           static_cast<double>(latent_dim_),
                           static_cast<double>(encoder_.spec().widths[1]),
                           static_cast<double>(encoder_.spec().num_layers())})});
  out.push_back({prefix + "scalars", meta_row({kl_weight_, decoder_log_var_,
                                               log_var_min_, log_var_max_})});
  out.push_back({prefix + "action_low", Tensor::row(bounds_.low)});
  out.push_back({prefix + "action_high", Tensor::row(bounds_.high)});
  const auto add = [&](const Mlp& net, const std::string& name) {
    const auto names = net.param_names(prefix + name);
    for (std::size_t i = 0; i < names.size(); ++i) {
      out.push_back({names[i], net.params()[i]});
    }
  };
  add(encoder_, "encoder");
  add(decoder_, "decoder");
  return out;
}

CvaeModel CvaeModel::from_tensors(const std::vector<NamedTensor>& ts,
                                  const std::string& prefix) {
  using autodiff::find_tensor;
  const Tensor& dims = find_tensor(ts, prefix + "dims");
  const Tensor& scalars = find_tensor(ts, prefix + "scalars");
  if (dims.size() != 5 || scalars.size() != 4) {
    throw FormatError("malformed CVAE metadata");
  }
  const std::size_t sd = as_size(dims[0]);
  const std::size_t ad = as_size(dims[1]);
  CvaeConfig config;
  config.latent_dim = as_size(dims[2]);
  config.hidden = as_size(dims[3]);
  config.layers = as_size(dims[4]);
  config.kl_weight = scalars[0];
  config.decoder_log_var = scalars[1];
  config.log_var_min = scalars[2];
  config.log_var_max = scalars[3];
  const Tensor& low = find_tensor(ts, prefix + "action_low");
  const Tensor& high = find_tensor(ts, prefix + "action_high");
  ActionBounds bounds{low.storage(), high.storage()};
  if (bounds.dim() != ad) throw FormatError("CVAE bounds do not match action_dim");
  const auto load = [&](const std::string& name, autodiff::MlpSpec spec) {
    std::vector<Tensor> params;
    for (std::size_t i = 0; i < spec.num_layers(); ++i) {
      params.push_back(find_tensor(ts, prefix + name + ".w" + std::to_string(i)));
      params.push_back(find_tensor(ts, prefix + name + ".b" + std::to_string(i)));
    }
    return Mlp(std::move(spec), std::move(params));
  };
  Mlp encoder = load("encoder",
                     autodiff::make_mlp_spec(sd + ad, config.hidden, config.layers,
                                             2 * config.latent_dim));
  Mlp decoder = load("decoder",
                     autodiff::make_mlp_spec(sd + config.latent_dim, config.hidden,
                                             config.layers, ad));
  return CvaeModel(sd, std::move(bounds), config, std::move(encoder),
                   std::move(decoder));
}

std::unique_ptr<BehaviorDensity> CvaeModel::clone() const {
  return std::make_unique<CvaeModel>(*this);
}

std::pair<Tensor, Tensor> state_action_tensors(const data::OfflineDataset& ds) {
  Tensor s(ds.size(), ds.state_dim());
  Tensor a(ds.size(), ds.action_dim());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::ranges::copy(ds.state(i), s.row_span(i).begin());
    std::ranges::copy(ds.action(i), a.row_span(i).begin());
  }
  return {std::move(s), std::move(a)};
}

ActionBounds bounds_for_env(const std::string& env_name) {
  const auto env = envs::make_env(env_name);
  return ActionBounds{env->spec().action_low, env->spec().action_high};
}

namespace {

// Rows of `src` at `idx`.
Tensor take_rows(const Tensor& src, const std::vector<std::size_t>& idx) {
  Tensor out(idx.size(), src.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    std::ranges::copy(src.row_span(idx[k]), out.row_span(k).begin());
  }
  return out;
}

}  // namespace

VaeTrainResult train_vae(const Tensor& states, const Tensor& actions,
                         const ActionBounds& bounds, const CvaeConfig& config,
                         std::uint64_t seed) {
  if (states.rows() == 0) throw ContractError("train_vae: empty dataset");
  if (states.rows() != actions.rows()) {
    throw ShapeError("train_vae: states and actions differ in rows");
  }
  if (config.batch_size == 0) throw ConfigError("batch_size must be positive");
  std::mt19937_64 rng(seed);
  VaeTrainResult result{CvaeModel(states.cols(), bounds, config, rng), {}};
  CvaeModel& model = result.model;
  autodiff::AdamState enc_state =
      autodiff::AdamState::zeros_like(model.encoder().params());
  autodiff::AdamState dec_state =
      autodiff::AdamState::zeros_like(model.decoder().params());
  const autodiff::AdamConfig adam{config.learning_rate};
  const ElboOptions options = model.training_elbo();
  std::uniform_int_distribution<std::size_t> pick(0, states.rows() - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::size_t> idx(config.batch_size);
  result.loss_trace.reserve(config.iterations);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    try {
      for (std::size_t& i : idx) i = pick(rng);
      Tensor noise(config.batch_size, model.latent_dim());
      for (double& v : noise.storage()) v = normal(rng);
      Graph g;
      const CvaeModel::Bound bound = model.bind(g, true);
      const Var loss = elbo_loss(bound, g.constant(take_rows(states, idx)),
                                 g.constant(take_rows(actions, idx)), noise,
                                 options);
      g.backward(loss);
      autodiff::adam_step(model.encoder().params(),
                          g.grads(bound.encoder.params), enc_state, adam);
      autodiff::adam_step(model.decoder().params(),
                          g.grads(bound.decoder.params), dec_state, adam);
      result.loss_trace.push_back(loss.value().item());
    } catch (const NumericError& e) {
      throw NumericError("train_vae iteration " + std::to_string(it) + ": " +
                         e.what());
    }
  }
  return result;
}

VaeTrainResult train_vae(const data::OfflineDataset& dataset,
                         const CvaeConfig& config, std::uint64_t seed) {
  if (dataset.empty()) throw ContractError("train_vae: empty dataset");
  const auto [s, a] = state_action_tensors(dataset);
  return train_vae(s, a, bounds_for_env(dataset.env_name()), config, seed);
}

}  // namespace spot::cvae
