#include "spot/cvae/density.hpp"

#include "spot/cvae/cvae.hpp"
#include "spot/cvae/gaussian.hpp"
#include "spot/errors.hpp"

namespace spot::cvae {

autodiff::Var BehaviorDensity::log_density_samples(autodiff::Graph& g,
                                                  autodiff::Var s, autodiff::Var a,
                                                  const autodiff::Tensor& noise,
                                                  std::size_t samples) const {
  if (samples == 0) throw ContractError("density estimate needs at least one sample");
  if (samples != 1 && noise_width() != 0) {
    throw ContractError(kind() + " density has no multi-sample estimator");
  }
  return log_density(g, s, a, noise);
}

autodiff::Tensor sample_density_noise(const BehaviorDensity& model,
                                      std::size_t rows, std::mt19937_64& rng,
                                      std::size_t samples) {
  autodiff::Tensor noise(rows, model.noise_width() * samples);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : noise.storage()) v = normal(rng);
  return noise;
}

std::unique_ptr<BehaviorDensity> density_from_tensors(
    const std::vector<autodiff::NamedTensor>& tensors,
    const std::string& prefix) {
  for (const autodiff::NamedTensor& t : tensors) {
    if (t.name == prefix + "kind.cvae") {
      return std::make_unique<CvaeModel>(CvaeModel::from_tensors(tensors, prefix));
    }
    if (t.name == prefix + "kind.gaussian") {
      return std::make_unique<GaussianDensityModel>(
          GaussianDensityModel::from_tensors(tensors, prefix));
    }
  }
  throw FormatError("no density model under prefix '" + prefix + "'");
}

void save_density(const std::filesystem::path& path,
                  const BehaviorDensity& model) {
  autodiff::save_checkpoint(path, model.to_tensors(""));
}

std::unique_ptr<BehaviorDensity> load_density(const std::filesystem::path& path) {
  return density_from_tensors(autodiff::load_checkpoint(path), "");
}

}  // namespace spot::cvae
