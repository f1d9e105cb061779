#include "gridreach/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>

#include "json.hpp"

#include "gridreach/errors.hpp"

namespace gridreach {

namespace {

using nlohmann::json;

void require_finite_matrix(const Eigen::MatrixXd& m, const std::string& what) {
  if (!m.allFinite()) {
    throw ConfigError(what + " contains a non-finite value");
  }
}

Eigen::MatrixXd identity(Eigen::Index n) {
  return Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

Layer Layer::affine(Eigen::MatrixXd w, Eigen::VectorXd b) {
  if (w.rows() != b.size()) {
    throw ConfigError("affine layer has " + std::to_string(w.rows()) +
                      " weight rows but " + std::to_string(b.size()) +
                      " bias entries");
  }
  if (w.rows() == 0) {
    throw ConfigError("affine layer must have at least one output");
  }
  require_finite_matrix(w, "affine layer weights");
  require_finite_matrix(b, "affine layer bias");
  Layer l;
  l.kind = Kind::Affine;
  l.W = std::move(w);
  l.b = std::move(b);
  return l;
}

Layer Layer::relu() {
  Layer l;
  l.kind = Kind::Relu;
  return l;
}

Network::Network(int in_dim, std::vector<Layer> layers)
    : in_dim_(in_dim), layers_(std::move(layers)) {
  if (in_dim_ <= 0) {
    throw ConfigError("network input dimension must be positive");
  }
  Eigen::Index cur = in_dim_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    if (l.kind == Layer::Kind::Affine) {
      if (l.W.cols() != cur) {
        throw ConfigError("layer " + std::to_string(i) + " expects " +
                          std::to_string(l.W.cols()) +
                          " inputs but receives " + std::to_string(cur));
      }
      cur = l.W.rows();
    }
  }
  out_dim_ = static_cast<int>(cur);
}

Eigen::VectorXd Network::eval(const Eigen::VectorXd& x) const {
  if (x.size() != in_dim_) {
    throw AnalysisError("network evaluated on a vector of size " +
                        std::to_string(x.size()) + ", expected " +
                        std::to_string(in_dim_));
  }
  Eigen::VectorXd v = x;
  for (const Layer& l : layers_) {
    if (l.kind == Layer::Kind::Affine) {
      v = (l.W * v + l.b).eval();
    } else {
      v = v.cwiseMax(0.0);
    }
  }
  return v;
}

std::string Network::to_json_text() const {
  json layers = json::array();
  for (const Layer& l : layers_) {
    if (l.kind == Layer::Kind::Relu) {
      layers.push_back({{"type", "relu"}});
      continue;
    }
    json rows = json::array();
    for (Eigen::Index r = 0; r < l.W.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < l.W.cols(); ++c) row.push_back(l.W(r, c));
      rows.push_back(std::move(row));
    }
    json bias = json::array();
    for (Eigen::Index r = 0; r < l.b.size(); ++r) bias.push_back(l.b(r));
    layers.push_back({{"type", "affine"}, {"w", std::move(rows)},
                      {"b", std::move(bias)}});
  }
  json doc;
  doc["in_dim"] = in_dim_;
  doc["layers"] = std::move(layers);
  return doc.dump(1);
}

Network Network::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed network JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("network JSON must be an object");
  for (const auto& item : doc.items()) {
    if (item.key() != "in_dim" && item.key() != "layers") {
      throw ConfigError("network JSON has unknown key \"" + item.key() + "\"");
    }
  }
  if (!doc.contains("in_dim") || !doc["in_dim"].is_number_integer()) {
    throw ConfigError("network JSON needs an integer \"in_dim\"");
  }
  if (!doc.contains("layers") || !doc["layers"].is_array()) {
    throw ConfigError("network JSON needs a \"layers\" array");
  }
  const int in_dim = doc["in_dim"].get<int>();
  std::vector<Layer> layers;
  std::size_t index = 0;
  for (const json& jl : doc["layers"]) {
    const std::string where = "layer " + std::to_string(index);
    if (!jl.is_object() || !jl.contains("type") || !jl["type"].is_string()) {
      throw ConfigError(where + " must be an object with a \"type\" string");
    }
    const std::string type = jl["type"].get<std::string>();
    if (type == "relu") {
      for (const auto& item : jl.items()) {
        if (item.key() != "type") {
          throw ConfigError(where + " (relu) has unexpected key \"" +
                            item.key() + "\"");
        }
      }
      layers.push_back(Layer::relu());
    } else if (type == "affine") {
      for (const auto& item : jl.items()) {
        if (item.key() != "type" && item.key() != "w" && item.key() != "b") {
          throw ConfigError(where + " (affine) has unexpected key \"" +
                            item.key() + "\"");
        }
      }
      if (!jl.contains("w") || !jl["w"].is_array() || jl["w"].empty()) {
        throw ConfigError(where + " needs a non-empty \"w\" matrix");
      }
      if (!jl.contains("b") || !jl["b"].is_array()) {
        throw ConfigError(where + " needs a \"b\" vector");
      }
      const json& jw = jl["w"];
      const std::size_t rows = jw.size();
      if (!jw[0].is_array() || jw[0].empty()) {
        throw ConfigError(where + ": \"w\" rows must be non-empty arrays");
      }
      const std::size_t cols = jw[0].size();
      Eigen::MatrixXd W(static_cast<Eigen::Index>(rows),
                        static_cast<Eigen::Index>(cols));
      for (std::size_t r = 0; r < rows; ++r) {
        if (!jw[r].is_array() || jw[r].size() != cols) {
          throw ConfigError(where + ": \"w\" row " + std::to_string(r) +
                            " has the wrong length");
        }
        for (std::size_t c = 0; c < cols; ++c) {
          if (!jw[r][c].is_number()) {
            throw ConfigError(where + ": \"w\" entry (" + std::to_string(r) +
                              ", " + std::to_string(c) + ") is not a number");
          }
          const double v = jw[r][c].get<double>();
          if (!std::isfinite(v)) {
            throw ConfigError(where + ": \"w\" entry (" + std::to_string(r) +
                              ", " + std::to_string(c) + ") is not finite");
          }
          W(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
      }
      const json& jb = jl["b"];
      if (jb.size() != rows) {
        throw ConfigError(where + ": \"b\" has " + std::to_string(jb.size()) +
                          " entries but \"w\" has " + std::to_string(rows) +
                          " rows");
      }
      Eigen::VectorXd b(static_cast<Eigen::Index>(rows));
      for (std::size_t r = 0; r < rows; ++r) {
        if (!jb[r].is_number()) {
          throw ConfigError(where + ": \"b\" entry " + std::to_string(r) +
                            " is not a number");
        }
        const double v = jb[r].get<double>();
        if (!std::isfinite(v)) {
          throw ConfigError(where + ": \"b\" entry " + std::to_string(r) +
                            " is not finite");
        }
        b(static_cast<Eigen::Index>(r)) = v;
      }
      layers.push_back(Layer::affine(std::move(W), std::move(b)));
    } else {
      throw ConfigError(where + " has unknown type \"" + type +
                        "\" (expected \"affine\" or \"relu\")");
    }
    ++index;
  }
  return Network(in_dim, std::move(layers));
}

Network Network::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open network file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return from_json_text(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void Network::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write network file: " + path);
  out << to_json_text() << '\n';
  if (!out) throw ConfigError("failed while writing network file: " + path);
}

Network append_affine(const Network& n, const Eigen::MatrixXd& A,
                      const Eigen::VectorXd& b) {
  if (A.cols() != n.out_dim()) {
    throw ConfigError("appended affine map expects " +
                      std::to_string(A.cols()) + " inputs but the network " +
                      "produces " + std::to_string(n.out_dim()));
  }
  std::vector<Layer> layers = n.layers();
  layers.push_back(Layer::affine(A, b));
  return Network(n.in_dim(), std::move(layers));
}

Network compose(const Network& first, const Network& second) {
  if (second.in_dim() != first.out_dim()) {
    throw ConfigError("cannot compose: first network produces " +
                      std::to_string(first.out_dim()) +
                      " values, second expects " +
                      std::to_string(second.in_dim()));
  }
  std::vector<Layer> layers = first.layers();
  for (const Layer& l : second.layers()) layers.push_back(l);
  return Network(first.in_dim(), std::move(layers));
}

namespace {

// Threads carry = S * x through `n` untouched while n itself consumes
// P * x.  The carried block rides along as the pair (carry, -carry): after
// the first ReLU the pair holds (max(carry,0), max(-carry,0)) and further
// ReLUs leave it fixed, so the exit affine recovers carry = u - v with the
// exact original bits (one of u, v is carry or -carry, the other is zero;
// the subtraction is then exact in floating point).  If `n` has no ReLU
// layer the pair is never rectified and still holds (carry, -carry) at the
// exit, so the exit reads the first half alone.
Network with_carry(const Network& n, const Eigen::MatrixXd& S,
                   const Eigen::MatrixXd& P, bool carry_front) {
  const Eigen::Index total_in = S.cols();
  const Eigen::Index c = S.rows();
  if (c == 0) {
    throw ConfigError("carry block must have at least one coordinate");
  }
  const bool rectified =
      std::any_of(n.layers().begin(), n.layers().end(), [](const Layer& l) {
        return l.kind == Layer::Kind::Relu;
      });
  std::vector<Layer> layers;
  layers.reserve(n.layers().size() + 2);

  Eigen::MatrixXd entry(2 * c + n.in_dim(), total_in);
  entry.topRows(c) = S;
  entry.middleRows(c, c) = -S;
  entry.bottomRows(n.in_dim()) = P;
  layers.push_back(
      Layer::affine(entry, Eigen::VectorXd::Zero(2 * c + n.in_dim())));

  for (const Layer& l : n.layers()) {
    if (l.kind == Layer::Kind::Relu) {
      layers.push_back(Layer::relu());
      continue;
    }
    Eigen::MatrixXd W =
        Eigen::MatrixXd::Zero(2 * c + l.W.rows(), 2 * c + l.W.cols());
    W.topLeftCorner(2 * c, 2 * c) = identity(2 * c);
    W.bottomRightCorner(l.W.rows(), l.W.cols()) = l.W;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * c + l.b.size());
    b.tail(l.b.size()) = l.b;
    layers.push_back(Layer::affine(std::move(W), std::move(b)));
  }

  const Eigen::Index out = n.out_dim();
  Eigen::MatrixXd exit = Eigen::MatrixXd::Zero(c + out, 2 * c + out);
  if (carry_front) {
    exit.topLeftCorner(c, c) = identity(c);
    if (rectified) exit.block(0, c, c, c) = -identity(c);
    exit.bottomRightCorner(out, out) = identity(out);
  } else {
    exit.topRightCorner(out, out) = identity(out);
    exit.block(out, 0, c, c) = identity(c);
    if (rectified) exit.block(out, c, c, c) = -identity(c);
  }
  layers.push_back(Layer::affine(exit, Eigen::VectorXd::Zero(c + out)));

  return Network(static_cast<int>(total_in), std::move(layers));
}

}  // namespace

Network build_state_passthrough(const Network& n, int state_dims) {
  if (state_dims <= 0 || state_dims > n.in_dim()) {
    throw ConfigError("state passthrough needs 1 <= state_dims <= in_dim");
  }
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(state_dims, n.in_dim());
  S.leftCols(state_dims) = identity(state_dims);
  return with_carry(n, S, identity(n.in_dim()), /*carry_front=*/true);
}

Network carry_trailing(const Network& n, int carry_dims) {
  if (carry_dims < 0) {
    throw ConfigError("carry_trailing needs carry_dims >= 0");
  }
  if (carry_dims == 0) return n;
  const Eigen::Index in = n.in_dim();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(carry_dims, in + carry_dims);
  S.rightCols(carry_dims) = identity(carry_dims);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(in, in + carry_dims);
  P.leftCols(in) = identity(in);
  return with_carry(n, S, P, /*carry_front=*/false);
}

Network unroll_affine_system(const Network& n, const AffineDynamics& dyn,
                             int substeps, int m, int latent_dims) {
  if (m < 1) throw ConfigError("unroll needs m >= 1");
  if (latent_dims < 0 || latent_dims >= n.in_dim()) {
    throw ConfigError("unroll needs 0 <= latent_dims < the network input");
  }
  const int state_dims = n.in_dim() - latent_dims;
  if (dyn.A_x.rows() != dyn.A_x.cols() || dyn.A_x.rows() != state_dims) {
    throw ConfigError("plant state matrix must be " +
                      std::to_string(state_dims) + "x" +
                      std::to_string(state_dims));
  }
  if (dyn.A_u.rows() != state_dims || dyn.A_u.cols() != n.out_dim()) {
    throw ConfigError("plant input matrix must be " +
                      std::to_string(state_dims) + "x" +
                      std::to_string(n.out_dim()));
  }
  if (dyn.c.size() != state_dims) {
    throw ConfigError("plant offset must have " + std::to_string(state_dims) +
                      " entries");
  }
  const AffineDynamics per = compose_substeps(dyn, substeps);

  // One period: (x, z) -> A_x x + A_u g(x, z) + c, with the command taken
  // from the dependency-preserving joint network.
  const Network joint = build_state_passthrough(n, state_dims);
  Eigen::MatrixXd A(state_dims, state_dims + n.out_dim());
  A.leftCols(state_dims) = per.A_x;
  A.rightCols(n.out_dim()) = per.A_u;
  const Network period = append_affine(joint, A, per.c);

  // Chain m periods; stage j consumes (x, z_j) and carries the later
  // periods' latents (z_{j+1}, ..., z_{m-1}) through to its output.
  Network acc = carry_trailing(period, (m - 1) * latent_dims);
  for (int j = 1; j < m; ++j) {
    acc = compose(acc, carry_trailing(period, (m - 1 - j) * latent_dims));
  }
  return acc;
}

}  // namespace gridreach
