#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fracpinn/net.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace fracpinn;

namespace {

Network random_net(const std::vector<int>& dims, OutputHead head, std::uint64_t seed) {
    return init_xavier(dims, head, seed);
}

} // namespace

TEST_CASE("xavier init is deterministic and bounded") {
    const std::vector<int> dims{1, 32, 5};
    const auto a = init_xavier(dims, OutputHead::softmax, 42);
    const auto b = init_xavier(dims, OutputHead::softmax, 42);
    const auto c = init_xavier(dims, OutputHead::softmax, 43);
    REQUIRE(a.n_layers() == 2);
    bool identical = true, differs = false;
    const double bound0 = std::sqrt(6.0 / 33.0);
    for (std::size_t l = 0; l < a.n_layers(); ++l) {
        identical = identical && (a.weights[l] == b.weights[l]);
        differs = differs || (a.weights[l] != c.weights[l]);
        CHECK(a.biases[l].cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(identical);
    CHECK(differs);
    CHECK(a.weights[0].cwiseAbs().maxCoeff() <= bound0);
}

TEST_CASE("zero network with softmax head is uniform") {
    auto net = init_xavier({1, 8, 5}, OutputHead::softmax, 1);
    for (auto& w : net.weights) {
        w.setZero();
    }
    const auto y = forward_one(net, 0.3);
    for (double v : y) {
        CHECK(v == doctest::Approx(0.2).epsilon(1e-15));
    }
}

TEST_CASE("softmax head outputs sum to 1") {
    const auto net = random_net({1, 16, 16, 5}, OutputHead::softmax, 7);
    Eigen::VectorXd t(11);
    for (int j = 0; j < 11; ++j) {
        t(j) = j / 10.0;
    }
    const auto Y = forward(net, t);
    for (int j = 0; j < 11; ++j) {
        CHECK(std::abs(Y.row(j).sum() - 1.0) < 1e-15);
    }
}

TEST_CASE("softplus head outputs are positive") {
    const auto net = random_net({1, 16, 5}, OutputHead::softplus, 9);
    const auto y = forward_one(net, 0.6);
    for (double v : y) {
        CHECK(v > 0.0);
    }
}

TEST_CASE("batch and single evaluation agree") {
    const auto net = random_net({1, 24, 24, 5}, OutputHead::softmax, 5);
    Eigen::VectorXd t(7);
    for (int j = 0; j < 7; ++j) {
        t(j) = 0.13 * j;
    }
    const auto Y = forward(net, t);
    for (int j = 0; j < 7; ++j) {
        const auto y1 = forward_one(net, t(j));
        for (int c = 0; c < 5; ++c) {
            CHECK(Y(j, c) == doctest::Approx(y1[c]).epsilon(1e-14));
        }
    }
}

TEST_CASE("zero cotangent gives zero gradients") {
    const auto net = random_net({1, 8, 8, 5}, OutputHead::softmax, 3);
    Eigen::VectorXd t(4);
    t << 0.1, 0.4, 0.7, 0.9;
    Tape tape;
    forward(net, t, &tape);
    const auto g = backward(net, tape, Eigen::MatrixXd::Zero(4, 5));
    CHECK(g.to_flat().cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.dinput.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradient check against central finite differences") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double h = 1e-6;
    int pairs = 0;
    for (int trial = 0; trial < 25 && pairs < 100; ++trial) {
        const OutputHead head = trial % 2 == 0 ? OutputHead::softmax : OutputHead::softplus;
        auto net = random_net({1, 8, 8, 5}, head, 100 + trial);
        const int n_points = 4;
        Eigen::VectorXd t(n_points);
        for (int j = 0; j < n_points; ++j) {
            t(j) = u(rng);
        }
        Eigen::MatrixXd cot(n_points, 5);
        for (int j = 0; j < n_points; ++j) {
            for (int c = 0; c < 5; ++c) {
                cot(j, c) = 2.0 * u(rng) - 1.0;
            }
        }
        Tape tape;
        forward(net, t, &tape);
        const auto g = backward(net, tape, cot).to_flat();

        auto value = [&](const Network& n_eval) {
            return (forward(n_eval, t).array() * cot.array()).sum();
        };
        Eigen::VectorXd flat(net.n_params());
        net.to_flat(flat);
        std::uniform_int_distribution<int> pickp(0, static_cast<int>(net.n_params()) - 1);
        for (int q = 0; q < 4; ++q, ++pairs) {
            const int idx = pickp(rng);
            Eigen::VectorXd fp = flat, fm = flat;
            fp(idx) += h;
            fm(idx) -= h;
            Network np = net, nm = net;
            np.from_flat(fp);
            nm.from_flat(fm);
            const double fd = (value(np) - value(nm)) / (2.0 * h);
            CHECK(std::abs(g(idx) - fd) < 1e-5 * std::max(1.0, std::abs(fd)));
        }
        // time-input gradient
        for (int j = 0; j < n_points; ++j) {
            Eigen::VectorXd tp = t, tm = t;
            tp(j) += h;
            tm(j) -= h;
            const double fd =
                ((forward(net, tp).row(j) - forward(net, tm).row(j)).array() *
                 cot.row(j).array())
                    .sum() /
                (2.0 * h);
            const auto gin = backward(net, tape, cot).dinput;
            CHECK(std::abs(gin(j) - fd) < 1e-5 * std::max(1.0, std::abs(fd)));
        }
    }
    CHECK(pairs >= 100);
}

TEST_CASE("softmax jacobian preserves the constant-sum constraint") {
    const auto net = random_net({1, 12, 5}, OutputHead::softmax, 21);
    Eigen::VectorXd t(1);
    t << 0.5;
    Tape tape;
    forward(net, t, &tape);
    // cotangent (1,1,1,1,1) differentiates the constant sum: all grads 0
    const auto g = backward(net, tape, Eigen::MatrixXd::Ones(1, 5));
    CHECK(g.to_flat().cwiseAbs().maxCoeff() < 1e-14);
    CHECK(std::abs(g.dinput(0)) < 1e-14);
}

TEST_CASE("flat round trip") {
    auto net = random_net({1, 6, 7, 5}, OutputHead::softplus, 2);
    Eigen::VectorXd flat(net.n_params());
    net.to_flat(flat);
    auto other = random_net({1, 6, 7, 5}, OutputHead::softplus, 99);
    other.from_flat(flat);
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        CHECK(net.weights[l] == other.weights[l]);
        CHECK(net.biases[l] == other.biases[l]);
    }
}

TEST_CASE("checkpoint round trip") {
    const auto net = random_net({1, 10, 10, 5}, OutputHead::softmax, 13);
    const RawParams raw{0.1, -0.2, 0.3, -0.4, 2.5};
    const auto path = (std::filesystem::temp_directory_path() / "fracpinn_ckpt_rt.ckpt").string();
    save_checkpoint(net, raw, path);
    Network net2;
    RawParams raw2;
    load_checkpoint(path, net2, raw2);
    CHECK(net2.layer_dims == net.layer_dims);
    CHECK(net2.head == net.head);
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        CHECK(net.weights[l] == net2.weights[l]);
        CHECK(net.biases[l] == net2.biases[l]);
    }
    CHECK(raw2.z_beta == raw.z_beta);
    CHECK(raw2.z_alpha == raw.z_alpha);
    std::filesystem::remove(path);
}

TEST_CASE("checkpoint magic is enforced") {
    const auto path = (std::filesystem::temp_directory_path() / "fracpinn_bad.ckpt").string();
    {
        std::ofstream out(path);
        out << "NOT-A-CHECKPOINT\n";
    }
    Network net;
    RawParams raw;
    CHECK_THROWS(load_checkpoint(path, net, raw));
    std::filesystem::remove(path);
}
