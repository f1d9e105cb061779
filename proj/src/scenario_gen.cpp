#include "gridreach/scenario_gen.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "gridreach/errors.hpp"
#include "gridreach/rng.hpp"

namespace gridreach {

namespace {

// Plain full-batch Adam on a ReLU MLP.  Everything is seeded and runs on a
// fixed iteration count in a fixed order, so a given (architecture, seed)
// pair always yields the same weights.
struct Mlp {
  std::vector<Eigen::MatrixXd> W;
  std::vector<Eigen::VectorXd> b;

  explicit Mlp(const std::vector<int>& widths, std::mt19937_64& g) {
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      const int in = widths[l];
      const int out = widths[l + 1];
      Eigen::MatrixXd w(out, in);
      const double s = std::sqrt(2.0 / in);
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = s * normal(g);
      }
      W.push_back(std::move(w));
      b.push_back(Eigen::VectorXd::Zero(out));
    }
  }

  // Activations per layer (column-major batches); acts[0] is the input.
  std::vector<Eigen::MatrixXd> forward(const Eigen::MatrixXd& X) const {
    std::vector<Eigen::MatrixXd> acts;
    acts.push_back(X);
    for (std::size_t l = 0; l < W.size(); ++l) {
      Eigen::MatrixXd z = (W[l] * acts.back()).colwise() + b[l];
      if (l + 1 < W.size()) z = z.cwiseMax(0.0);
      acts.push_back(std::move(z));
    }
    return acts;
  }
};

void train_adam(Mlp& net, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                int epochs, double lr) {
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const double invn = 1.0 / static_cast<double>(X.cols());
  std::vector<Eigen::MatrixXd> mW, vW;
  std::vector<Eigen::VectorXd> mb, vb;
  for (std::size_t l = 0; l < net.W.size(); ++l) {
    mW.push_back(Eigen::MatrixXd::Zero(net.W[l].rows(), net.W[l].cols()));
    vW.push_back(Eigen::MatrixXd::Zero(net.W[l].rows(), net.W[l].cols()));
    mb.push_back(Eigen::VectorXd::Zero(net.b[l].size()));
    vb.push_back(Eigen::VectorXd::Zero(net.b[l].size()));
  }

  for (int t = 1; t <= epochs; ++t) {
    const std::vector<Eigen::MatrixXd> acts = net.forward(X);
    // Mean-squared-error gradient at the output.
    Eigen::MatrixXd delta = (acts.back() - Y) * invn;
    const double corr1 = 1.0 - std::pow(b1, t);
    const double corr2 = 1.0 - std::pow(b2, t);
    for (std::size_t l = net.W.size(); l-- > 0;) {
      const Eigen::MatrixXd gW = delta * acts[l].transpose();
      const Eigen::VectorXd gb = delta.rowwise().sum();
      if (l > 0) {
        delta = (net.W[l].transpose() * delta).eval();
        // ReLU mask of the previous layer's activation.
        delta = delta.cwiseProduct(
            (acts[l].array() > 0.0).cast<double>().matrix());
      }
      mW[l] = b1 * mW[l] + (1 - b1) * gW;
      vW[l] = b2 * vW[l] + (1 - b2) * gW.cwiseProduct(gW);
      mb[l] = b1 * mb[l] + (1 - b1) * gb;
      vb[l] = b2 * vb[l] + (1 - b2) * gb.cwiseProduct(gb);
      net.W[l] -= (lr * (mW[l] / corr1).array() /
                   ((vW[l] / corr2).array().sqrt() + eps))
                      .matrix();
      net.b[l] -= (lr * (mb[l] / corr1).array() /
                   ((vb[l] / corr2).array().sqrt() + eps))
                      .matrix();
    }
  }
}

// Assembles the trained stack into a Network, folding the input scaling
// into the first affine layer and the output scaling into the last one, so
// the artifact consumes and produces raw physical units.
Network assemble(const Mlp& net, int in_dim, const Eigen::VectorXd& in_scale,
                 const Eigen::VectorXd& out_scale) {
  std::vector<Layer> layers;
  for (std::size_t l = 0; l < net.W.size(); ++l) {
    Eigen::MatrixXd W = net.W[l];
    Eigen::VectorXd b = net.b[l];
    if (l == 0) W = W * in_scale.asDiagonal();
    if (l + 1 == net.W.size()) {
      W = out_scale.asDiagonal() * W;
      b = (out_scale.asDiagonal() * b).eval();
    }
    layers.push_back(Layer::affine(std::move(W), std::move(b)));
    if (l + 1 < net.W.size()) layers.push_back(Layer::relu());
  }
  return Network(in_dim, std::move(layers));
}

constexpr int kSamples = 1024;
constexpr int kEpochs = 3000;
constexpr double kLearningRate = 3e-3;

}  // namespace

Network gen_taxi_surrogate(std::uint64_t seed) {
  std::mt19937_64 g = make_rng(seed, 0x7a78u);  // stream tag for this model

  // Scaled training coordinates: p/12, theta/0.6, z1, z2 in [-1, 1].
  Eigen::MatrixXd X(4, kSamples);
  Eigen::MatrixXd Y(2, kSamples);
  for (int s = 0; s < kSamples; ++s) {
    const double ps = uniform(g, -1.0, 1.0);
    const double ts = uniform(g, -1.0, 1.0);
    const double z1 = uniform(g, -1.0, 1.0);
    const double z2 = uniform(g, -1.0, 1.0);
    X.col(s) << ps, ts, z1, z2;
    // Near-identity observation; the latent channels perturb crosstrack
    // and heading with a mild state-dependent gain.
    Y.col(s) << ps + 0.025 * z1 * (1.0 + 0.3 * std::tanh(0.6 * ts)),
        ts + 0.025 * z2 * (1.0 + 0.3 * std::tanh(2.4 * ps));
  }

  // Kept deliberately small: exact star propagation enumerates the ReLU
  // activation pattern over every grid cell, and the leaf count grows with
  // the number of hyperplanes crossing a cell.
  Mlp net({4, 12, 8, 2}, g);
  train_adam(net, X, Y, 8000, kLearningRate);

  Eigen::VectorXd in_scale(4);
  in_scale << 1.0 / 12.0, 1.0 / 0.6, 1.0, 1.0;
  Eigen::VectorXd out_scale(2);
  out_scale << 12.0, 0.6;
  return assemble(net, 4, in_scale, out_scale);
}

Network gen_brake_surrogate(std::uint64_t seed) {
  std::mt19937_64 g = make_rng(seed, 0x6272u);

  // Scaled coordinates: d/60, v/30 in [0, 1]; latents scaled by 100 so the
  // raw +-0.01 environment box maps to [-1, 1].
  Eigen::MatrixXd X(6, kSamples);
  Eigen::MatrixXd Y(1, kSamples);
  for (int s = 0; s < kSamples; ++s) {
    const double ds = uniform(g, 0.0, 1.0);
    const double vs = uniform(g, 0.0, 1.0);
    const double z1 = uniform(g, -1.0, 1.0);
    const double z2 = uniform(g, -1.0, 1.0);
    const double z3 = uniform(g, -1.0, 1.0);
    const double z4 = uniform(g, -1.0, 1.0);
    X.col(s) << ds, vs, z1, z2, z3, z4;
    // Brake harder when fast and close; the tanh ridge makes the policy
    // genuinely nonlinear in the state.
    Y.col(s) << 0.9 * vs - 0.3 * ds + 0.15 +
                    0.25 * std::tanh(2.0 * (vs - ds)) + 0.008 * z1 -
                    0.005 * z2 + 0.004 * z3 - 0.003 * z4;
  }

  Mlp net({6, 16, 12, 1}, g);
  train_adam(net, X, Y, kEpochs, kLearningRate);

  Eigen::VectorXd in_scale(6);
  in_scale << 1.0 / 60.0, 1.0 / 30.0, 100.0, 100.0, 100.0, 100.0;
  Eigen::VectorXd out_scale(1);
  out_scale << 1.0;
  Network raw = assemble(net, 6, in_scale, out_scale);

  // Clamp to [0, 1]: u -> 1 - relu(1 - relu(u)).
  Eigen::MatrixXd neg(1, 1);
  neg << -1.0;
  Eigen::VectorXd one(1);
  one << 1.0;
  std::vector<Layer> layers = raw.layers();
  layers.push_back(Layer::relu());
  layers.push_back(Layer::affine(neg, one));
  layers.push_back(Layer::relu());
  layers.push_back(Layer::affine(neg, one));
  return Network(6, std::move(layers));
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

nlohmann::json probe_list(const Network& net,
                          const std::vector<std::vector<double>>& inputs) {
  nlohmann::json probes = nlohmann::json::array();
  for (const std::vector<double>& in : inputs) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(in.size()));
    for (std::size_t i = 0; i < in.size(); ++i) {
      x(static_cast<Eigen::Index>(i)) = in[i];
    }
    const Eigen::VectorXd y = net.eval(x);
    nlohmann::json jy = nlohmann::json::array();
    for (Eigen::Index i = 0; i < y.size(); ++i) jy.push_back(y(i));
    probes.push_back({{"x", in}, {"y", std::move(jy)}});
  }
  return probes;
}

std::string hash_hex(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

// Largest |output - state| over a state sweep at zero latent input; the
// observation is supposed to be near-identity there, and the achieved
// quality is recorded alongside the artifact.
double taxi_z0_error(const Network& net) {
  double worst = 0.0;
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const double p = -11.0 + 22.0 * i / 20.0;
      const double th = -0.5236 + 1.0472 * j / 20.0;
      Eigen::VectorXd x(4);
      x << p, th, 0.0, 0.0;
      const Eigen::VectorXd y = net.eval(x);
      worst = std::max(worst, std::abs(y[0] - p));
      worst = std::max(worst, std::abs(y[1] - th));
    }
  }
  return worst;
}

}  // namespace

void write_generated_artifacts(const std::string& dir, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);

  const Network taxi = gen_taxi_surrogate(seed);
  const Network brake = gen_brake_surrogate(seed);
  taxi.save((base / "taxi_surrogate.json").string());
  brake.save((base / "brake_surrogate.json").string());

  // Trivial exact-identity observation used by the pole scenario; built by
  // hand so its behavior is transparent.
  Eigen::MatrixXd sel = Eigen::MatrixXd::Zero(2, 4);
  sel(0, 0) = 1.0;
  sel(1, 1) = 1.0;
  const Network ident(4, {Layer::affine(sel, Eigen::VectorXd::Zero(2))});
  ident.save((base / "pole_net.json").string());

  const auto read_back = [&](const std::string& name) {
    std::ifstream in((base / name).string(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };

  nlohmann::json goldens;
  goldens["seed"] = seed;
  goldens["taxi"] = {
      {"hash", hash_hex(fnv1a64(read_back("taxi_surrogate.json")))},
      {"z0_max_err", taxi_z0_error(taxi)},
      {"probes", probe_list(taxi, {{0.0, 0.0, 0.0, 0.0},
                                   {5.0, 0.2, 0.5, -0.5},
                                   {-8.0, -0.3, 0.8, 0.8},
                                   {10.5, 0.5, -0.8, 0.1}})},
  };
  goldens["brake"] = {
      {"hash", hash_hex(fnv1a64(read_back("brake_surrogate.json")))},
      {"probes", probe_list(brake, {{30.0, 15.0, 0.0, 0.0, 0.0, 0.0},
                                    {5.0, 28.0, 0.01, -0.01, 0.01, -0.01},
                                    {55.0, 2.0, -0.01, 0.01, 0.0, 0.0},
                                    {12.0, 0.02, 0.005, 0.005, -0.005, 0.005}}
                            )},
  };
  goldens["pole"] = {
      {"hash", hash_hex(fnv1a64(read_back("pole_net.json")))},
  };

  std::ofstream out((base / "goldens.json").string(), std::ios::binary);
  if (!out) throw ConfigError("cannot write goldens into " + dir);
  out << goldens.dump(1) << '\n';
}

}  // namespace gridreach
