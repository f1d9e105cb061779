#ifndef GRIDREACH_NETWORK_HPP
#define GRIDREACH_NETWORK_HPP

// Feed-forward ReLU network model: JSON (de)serialization, concrete
// evaluation, and the structural builders (affine append, state
// passthrough, control-period unrolling) that turn a closed-loop system
// into one network a propagation engine can analyze.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridreach/dynamics.hpp"
#include "gridreach/errors.hpp"

namespace gridreach {

struct Layer {
  enum class Kind { Affine, Relu };

  Kind kind = Kind::Relu;
  Eigen::MatrixXd W;  // used when kind == Affine
  Eigen::VectorXd b;  // used when kind == Affine

  static Layer affine(Eigen::MatrixXd W, Eigen::VectorXd b);
  static Layer relu();
};

class Network {
 public:
  // Validates that layer shapes chain from in_dim; ReLU layers are
  // elementwise and keep the width.
  Network(int in_dim, std::vector<Layer> layers);

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  const std::vector<Layer>& layers() const { return layers_; }

  Eigen::VectorXd eval(const Eigen::VectorXd& x) const;

  // JSON schema: {"in_dim": int, "layers": [{"type": "affine", "w": [[...]],
  // "b": [...]} | {"type": "relu"}]}.  The loader rejects NaN/Inf weights
  // and reports shape problems with the offending layer index; weights
  // round-trip bit-identically.
  static Network load(const std::string& path);
  void save(const std::string& path) const;
  std::string to_json_text() const;
  static Network from_json_text(const std::string& text);

 private:
  int in_dim_ = 0;
  int out_dim_ = 0;
  std::vector<Layer> layers_;
};

// Network computing A * n(x) + b — dynamics or control maps as a layer.
Network append_affine(const Network& n, const Eigen::MatrixXd& A,
                      const Eigen::VectorXd& b);

// second(first(x)): layer concatenation.
Network compose(const Network& first, const Network& second);

// Network computing (x_state, n(x)) where x_state is the first state_dims
// inputs.  Carried channels survive ReLU layers exactly by being split into
// relu(s) - relu(-s) pairs, so state-control dependency is preserved
// bit-for-bit.
Network build_state_passthrough(const Network& n, int state_dims);

// Network computing (n(x), z) on input (x, z) with carry_dims extra inputs
// appended after n's inputs; same exact-pair construction as above.  Used
// to thread unconsumed latent blocks through earlier control periods.
Network carry_trailing(const Network& n, int carry_dims);

// Unrolls m control periods of the closed loop into one network.  n maps
// (x, z) to the control command; dyn (affine) is applied `substeps` times
// per period with the command held.  The result maps (x0, z_0, ..., z_{m-1})
// to x_m; each period consumes its own latent block of latent_dims inputs.
Network unroll_affine_system(const Network& n, const AffineDynamics& dyn,
                             int substeps, int m, int latent_dims);

}  // namespace gridreach

#endif
