#include "fracpinn/net.hpp"

#include "fracpinn/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace fracpinn {

namespace {

void check_dims(const std::vector<int>& dims) {
    if (dims.size() < 2 || dims.front() != 1 || dims.back() != 5) {
        throw std::invalid_argument("Network: layer_dims must run from 1 to 5");
    }
    for (int d : dims) {
        if (d < 1) {
            throw std::invalid_argument("Network: layer dims must be positive");
        }
    }
}

} // namespace

std::size_t Network::n_params() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        n += static_cast<std::size_t>(weights[l].size()) + static_cast<std::size_t>(biases[l].size());
    }
    return n;
}

void Network::to_flat(Eigen::Ref<Eigen::VectorXd> out) const {
    Eigen::Index pos = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        const auto& w = weights[l];
        out.segment(pos, w.size()) = Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
        pos += w.size();
        out.segment(pos, biases[l].size()) = biases[l];
        pos += biases[l].size();
    }
}

void Network::from_flat(const Eigen::Ref<const Eigen::VectorXd>& in) {
    Eigen::Index pos = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        auto& w = weights[l];
        Eigen::Map<Eigen::VectorXd>(w.data(), w.size()) = in.segment(pos, w.size());
        pos += w.size();
        biases[l] = in.segment(pos, biases[l].size());
        pos += biases[l].size();
    }
}

Network init_xavier(const std::vector<int>& layer_dims, OutputHead head, std::uint64_t seed) {
    check_dims(layer_dims);
    Network net;
    net.layer_dims = layer_dims;
    net.head = head;
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        const int fan_in = layer_dims[l];
        const int fan_out = layer_dims[l + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        Eigen::MatrixXd w(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r) {
            for (int c = 0; c < fan_in; ++c) {
                w(r, c) = dist(rng);
            }
        }
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(Eigen::VectorXd::Zero(fan_out));
    }
    return net;
}

Eigen::MatrixXd forward(const Network& net, const Eigen::VectorXd& t_scaled, Tape* tape) {
    const Eigen::Index n = t_scaled.size();
    Eigen::MatrixXd act = t_scaled; // n x 1

    if (tape) {
        tape->input = t_scaled;
        tape->hidden.clear();
    }

    const std::size_t L = net.n_layers();
    for (std::size_t l = 0; l + 1 < L; ++l) {
        act = ((act * net.weights[l].transpose()).rowwise() + net.biases[l].transpose())
                  .array()
                  .tanh()
                  .matrix();
        if (tape) {
            tape->hidden.push_back(act);
        }
    }
    Eigen::MatrixXd logits =
        (act * net.weights[L - 1].transpose()).rowwise() + net.biases[L - 1].transpose();

    Eigen::MatrixXd out(n, 5);
    if (net.head == OutputHead::softmax) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double m = logits.row(j).maxCoeff();
            Eigen::Array<double, 1, 5> ex = (logits.row(j).array() - m).exp();
            out.row(j) = (ex / ex.sum()).matrix();
        }
    } else {
        out = logits.unaryExpr([](double x) { return softplus(x); });
    }
    if (tape) {
        tape->logits = std::move(logits);
        tape->output = out;
    }
    return out;
}

Vec5 forward_one(const Network& net, double t_scaled) {
    Eigen::VectorXd t(1);
    t(0) = t_scaled;
    const Eigen::MatrixXd out = forward(net, t);
    return {out(0, 0), out(0, 1), out(0, 2), out(0, 3), out(0, 4)};
}

Eigen::VectorXd NetGrad::to_flat() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < dweights.size(); ++l) {
        n += static_cast<std::size_t>(dweights[l].size()) + static_cast<std::size_t>(dbiases[l].size());
    }
    Eigen::VectorXd out(n);
    Eigen::Index pos = 0;
    for (std::size_t l = 0; l < dweights.size(); ++l) {
        const auto& w = dweights[l];
        out.segment(pos, w.size()) = Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
        pos += w.size();
        out.segment(pos, dbiases[l].size()) = dbiases[l];
        pos += dbiases[l].size();
    }
    return out;
}

NetGrad backward(const Network& net, const Tape& tape, const Eigen::MatrixXd& cotangent) {
    const std::size_t L = net.n_layers();
    if (tape.hidden.size() != L - 1 || cotangent.rows() != tape.output.rows() ||
        cotangent.cols() != 5) {
        throw std::invalid_argument("backward: tape does not match this forward pass");
    }

    NetGrad g;
    g.dweights.resize(L);
    g.dbiases.resize(L);

    // head
    Eigen::MatrixXd dlogits(cotangent.rows(), 5);
    if (net.head == OutputHead::softmax) {
        for (Eigen::Index j = 0; j < cotangent.rows(); ++j) {
            const auto y = tape.output.row(j).array();
            const auto dy = cotangent.row(j).array();
            const double dot = (dy * y).sum();
            dlogits.row(j) = (y * (dy - dot)).matrix();
        }
    } else {
        dlogits = cotangent.array() * tape.logits.unaryExpr([](double x) { return sigmoid(x); }).array();
    }

    Eigen::MatrixXd delta = dlogits; // n x dims[l+1], walking backwards
    for (std::size_t l = L; l-- > 0;) {
        const Eigen::MatrixXd& below =
            (l == 0) ? Eigen::MatrixXd(tape.input) : tape.hidden[l - 1];
        g.dweights[l] = delta.transpose() * below;
        g.dbiases[l] = delta.colwise().sum().transpose();
        Eigen::MatrixXd dbelow = delta * net.weights[l];
        if (l > 0) {
            // through tanh: 1 - a^2
            delta = dbelow.array() * (1.0 - tape.hidden[l - 1].array().square());
        } else {
            g.dinput = dbelow.col(0);
        }
    }
    return g;
}

void save_checkpoint(const Network& net, const RawParams& raw, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("save_checkpoint: cannot open " + path);
    }
    out << "FRACPINN-CKPT-1\n";
    out << (net.head == OutputHead::softmax ? "softmax" : "softplus") << "\n";
    out << net.layer_dims.size();
    for (int d : net.layer_dims) {
        out << " " << d;
    }
    out << "\n";
    char buf[64];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", v);
        out << buf;
    };
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        const auto& w = net.weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                emit(w(r, c));
            }
        }
        for (Eigen::Index r = 0; r < net.biases[l].size(); ++r) {
            emit(net.biases[l](r));
        }
    }
    for (double z : raw.vec()) {
        emit(z);
    }
}

void load_checkpoint(const std::string& path, Network& net, RawParams& raw) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("load_checkpoint: cannot open " + path);
    }
    std::string magic;
    std::getline(in, magic);
    if (magic != "FRACPINN-CKPT-1") {
        throw IoError("load_checkpoint: bad magic in " + path);
    }
    std::string head;
    std::getline(in, head);
    if (head == "softmax") {
        net.head = OutputHead::softmax;
    } else if (head == "softplus") {
        net.head = OutputHead::softplus;
    } else {
        throw IoError("load_checkpoint: unknown head '" + head + "'");
    }
    std::size_t n_dims = 0;
    in >> n_dims;
    net.layer_dims.resize(n_dims);
    for (std::size_t k = 0; k < n_dims; ++k) {
        in >> net.layer_dims[k];
    }
    check_dims(net.layer_dims);
    net.weights.clear();
    net.biases.clear();
    for (std::size_t l = 0; l + 1 < n_dims; ++l) {
        Eigen::MatrixXd w(net.layer_dims[l + 1], net.layer_dims[l]);
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                in >> w(r, c);
            }
        }
        Eigen::VectorXd b(net.layer_dims[l + 1]);
        for (Eigen::Index r = 0; r < b.size(); ++r) {
            in >> b(r);
        }
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    std::array<double, 5> z{};
    for (double& v : z) {
        in >> v;
    }
    if (!in) {
        throw IoError("load_checkpoint: truncated checkpoint " + path);
    }
    raw = RawParams::from_vec(z);
}

} // namespace fracpinn
