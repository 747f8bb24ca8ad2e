#include "qtcq/net.hpp"

#include <cmath>
#include <random>

namespace qtcq {

void TinyNet::validate() const {
    if (layers.empty()) throw ShapeMismatch("network has no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const DenseLayer& layer = layers[l];
        if (layer.bias.size() != layer.weights.rows())
            throw ShapeMismatch("layer " + std::to_string(l) + " bias size mismatch");
        if (l > 0 && layers[l - 1].weights.rows() != layer.weights.cols())
            throw ShapeMismatch("layer " + std::to_string(l) + " does not chain");
    }
}

namespace {

void check_batch(const TinyNet& net, const Batch& batch) {
    net.validate();
    if (batch.features.rows() == 0) throw DimMismatch("empty batch");
    if (batch.features.cols() != net.input_dim())
        throw DimMismatch("batch features have " + std::to_string(batch.features.cols()) +
                          " columns, net expects " + std::to_string(net.input_dim()));
    if (static_cast<Index>(batch.targets.size()) != batch.features.rows())
        throw DimMismatch("one target per sample required");
    for (int t : batch.targets)
        if (t < 0 || t >= net.num_classes()) throw IndexOutOfRange("target class out of range");
}

Matrix layer_preact(const DenseLayer& layer, const Matrix& a) {
    Matrix z = a * layer.weights.transpose();
    z.rowwise() += layer.bias.transpose();
    return z;
}

// Row-wise softmax cross-entropy, mean over samples; stabilized by the
// row max.
double mean_cross_entropy(const Matrix& logits, const std::vector<int>& targets) {
    double total = 0.0;
    for (Index s = 0; s < logits.rows(); ++s) {
        const auto row = logits.row(s);
        const double m = row.maxCoeff();
        const double lse = m + std::log((row.array() - m).exp().sum());
        total += lse - row(targets[static_cast<std::size_t>(s)]);
    }
    return total / static_cast<double>(logits.rows());
}

struct Pass {
    double loss;
    NetTape tape;            // inputs filled
    std::vector<Matrix> zs;  // pre-activations per layer
    Matrix logits;
};

Pass run_forward(const TinyNet& net, const Batch& batch) {
    check_batch(net, batch);
    Pass p;
    p.tape.resize(net.layers.size());
    p.zs.resize(net.layers.size());
    Matrix a = batch.features;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        p.tape[l].inputs = a;
        p.zs[l] = layer_preact(net.layers[l], a);
        a = net.layers[l].activation == Activation::ReLU ? p.zs[l].cwiseMax(0.0) : p.zs[l];
    }
    p.logits = a;
    p.loss = mean_cross_entropy(p.logits, batch.targets);
    return p;
}

} // namespace

ForwardResult forward(const TinyNet& net, const Batch& batch) {
    Pass p = run_forward(net, batch);
    return {p.loss, std::move(p.tape)};
}

NetTape backward_taped(const TinyNet& net, const Batch& batch) {
    Pass p = run_forward(net, batch);
    const Index samples = batch.features.rows();
    const std::size_t depth = net.layers.size();

    // dL/dz at the head: (softmax - one_hot) / samples.
    Matrix dz(samples, net.num_classes());
    for (Index s = 0; s < samples; ++s) {
        const auto row = p.logits.row(s);
        const double m = row.maxCoeff();
        Eigen::RowVectorXd e = (row.array() - m).exp();
        dz.row(s) = e / e.sum();
        dz(s, batch.targets[static_cast<std::size_t>(s)]) -= 1.0;
    }
    dz /= static_cast<double>(samples);

    for (std::size_t l = depth; l-- > 0;) {
        p.tape[l].output_grads = dz;
        if (l == 0) break;
        Matrix da = dz * net.layers[l].weights;
        if (net.layers[l - 1].activation == Activation::ReLU)
            dz = ((p.zs[l - 1].array() > 0.0).cast<double>() * da.array()).matrix();
        else
            dz = std::move(da);
    }
    return p.tape;
}

std::vector<Matrix> weight_grads_from_tape(const NetTape& tape) {
    std::vector<Matrix> grads;
    grads.reserve(tape.size());
    for (const LayerTape& t : tape) {
        if (t.output_grads.size() == 0 || t.inputs.rows() != t.output_grads.rows())
            throw ShapeMismatch("tape entry is incomplete or inconsistent");
        grads.emplace_back(t.output_grads.transpose() * t.inputs);
    }
    return grads;
}

double central_difference(const std::function<double(double)>& f, double x, double eps) {
    if (!(eps > 0.0)) throw BadRange("eps must be > 0");
    return (f(x + eps) - f(x - eps)) / (2.0 * eps);
}

double finite_diff_grad(const TinyNet& net, const Batch& batch, int layer, Index i, Index j,
                        double eps) {
    if (layer < 0 || static_cast<std::size_t>(layer) >= net.layers.size())
        throw IndexOutOfRange("layer index out of range");
    const Matrix& w = net.layers[static_cast<std::size_t>(layer)].weights;
    if (i < 0 || i >= w.rows() || j < 0 || j >= w.cols())
        throw IndexOutOfRange("weight index out of range");
    TinyNet probe = net;
    Matrix& pw = probe.layers[static_cast<std::size_t>(layer)].weights;
    const double w0 = pw(i, j);
    return central_difference(
        [&](double v) {
            pw(i, j) = v;
            return forward(probe, batch).loss;
        },
        w0, eps);
}

Batch make_synthetic_batch(std::uint64_t seed, Index samples, Index in_dim, Index classes,
                           double label_noise) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(classes) - 1);

    Batch b;
    b.features.resize(samples, in_dim);
    for (Index s = 0; s < samples; ++s)
        for (Index c = 0; c < in_dim; ++c) b.features(s, c) = gauss(rng);

    Matrix teacher(classes, in_dim);
    for (Index r = 0; r < classes; ++r)
        for (Index c = 0; c < in_dim; ++c) teacher(r, c) = gauss(rng);

    const Matrix logits = b.features * teacher.transpose();
    b.targets.resize(static_cast<std::size_t>(samples));
    for (Index s = 0; s < samples; ++s) {
        Index best;
        logits.row(s).maxCoeff(&best);
        b.targets[static_cast<std::size_t>(s)] =
            unit(rng) < label_noise ? pick(rng) : static_cast<int>(best);
    }
    return b;
}

TinyNet make_random_net(std::uint64_t seed, const std::vector<Index>& dims) {
    if (dims.size() < 2) throw ShapeMismatch("need at least input and output dims");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    TinyNet net;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        DenseLayer layer;
        const Index in = dims[l], out = dims[l + 1];
        const double scale = 1.0 / std::sqrt(static_cast<double>(in));
        layer.weights.resize(out, in);
        for (Index r = 0; r < out; ++r)
            for (Index c = 0; c < in; ++c) {
                double v = gauss(rng) * scale;
                if (unit(rng) < 0.04) v *= 4.0; // heavy tail
                layer.weights(r, c) = v;
            }
        layer.bias = Vector::Zero(out);
        for (Index r = 0; r < out; ++r) layer.bias(r) = 0.1 * gauss(rng);
        layer.activation = l + 2 < dims.size() ? Activation::ReLU : Activation::None;
        net.layers.push_back(std::move(layer));
    }
    return net;
}

} // namespace qtcq
