#pragma once

#include "fracpinn/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace fracpinn {

enum class OutputHead { softmax, softplus };

// Fully connected t -> (s,e,i,r,d) approximator. The input is time scaled
// to [0,1]; hidden activation is tanh; the head maps logits either onto the
// simplex (softmax) or to positive values (softplus).
struct Network {
    std::vector<int> layer_dims; // {1, hidden..., 5}
    OutputHead head = OutputHead::softmax;
    std::vector<Eigen::MatrixXd> weights; // weights[l]: dims[l+1] x dims[l]
    std::vector<Eigen::VectorXd> biases;

    std::size_t n_layers() const { return weights.size(); }
    std::size_t n_params() const;
    void to_flat(Eigen::Ref<Eigen::VectorXd> out) const;
    void from_flat(const Eigen::Ref<const Eigen::VectorXd>& in);
};

// Uniform Xavier initialization, biases zero, deterministic in the seed.
Network init_xavier(const std::vector<int>& layer_dims, OutputHead head, std::uint64_t seed);

// Forward-pass record for one reverse sweep. Matrices are (points x units).
struct Tape {
    Eigen::VectorXd input;                  // t_scaled per point
    std::vector<Eigen::MatrixXd> hidden;    // post-tanh activations per hidden layer
    Eigen::MatrixXd logits;                 // pre-head outputs, points x 5
    Eigen::MatrixXd output;                 // after the head, points x 5
};

// Batch evaluation at many scaled times. Returns points x 5 outputs; fills
// the tape when given.
Eigen::MatrixXd forward(const Network& net, const Eigen::VectorXd& t_scaled, Tape* tape = nullptr);

Vec5 forward_one(const Network& net, double t_scaled);

struct NetGrad {
    std::vector<Eigen::MatrixXd> dweights;
    std::vector<Eigen::VectorXd> dbiases;
    Eigen::VectorXd dinput; // d(cotangent . output)/dt per point

    Eigen::VectorXd to_flat() const;
};

// Reverse sweep: exact gradients of <cotangent, output> with respect to all
// weights, biases, and the scaled time input. Accumulation over points is
// additive.
NetGrad backward(const Network& net, const Tape& tape, const Eigen::MatrixXd& cotangent);

// Versioned checkpoint: layer dims, head mode, row-major weights/biases and
// the raw parameter vector.
void save_checkpoint(const Network& net, const RawParams& raw, const std::string& path);
void load_checkpoint(const std::string& path, Network& net, RawParams& raw);

} // namespace fracpinn
