#include "physadv/nn.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

namespace physadv::nn {

using json = nlohmann::ordered_json;

void NetworkSpec::validate() const {
    if (inputDim <= 0) {
        throw InvalidSpec("NetworkSpec: inputDim must be positive");
    }
    if (layers.empty()) {
        throw InvalidSpec("NetworkSpec: at least one layer required");
    }
    for (const auto& l : layers) {
        if (l.width <= 0) {
            throw InvalidSpec("NetworkSpec: zero-width layer");
        }
        if (l.dropoutAfter < 0.0 || l.dropoutAfter >= 1.0) {
            throw InvalidSpec("NetworkSpec: dropout probability must be in [0,1)");
        }
    }
    if (layers.back().activation != Activation::Softmax) {
        throw InvalidSpec("NetworkSpec: final layer must be softmax");
    }
    if (layers.back().width < 2) {
        throw InvalidSpec("NetworkSpec: softmax layer needs at least two classes");
    }
}

int NetworkSpec::layerCount() const {
    int n = 0;
    for (const auto& l : layers) {
        n += 1 + (l.dropoutAfter > 0.0 ? 1 : 0);
    }
    return n;
}

Vector oneHot(int label, Eigen::Index classes) {
    if (label < 0 || label >= classes) {
        throw Error("oneHot: label out of range");
    }
    Vector y = Vector::Zero(classes);
    y(label) = 1.0;
    return y;
}

double mseLoss(const Vector& probs, const Vector& target) {
    if (probs.size() != target.size()) {
        throw DimensionMismatch("mseLoss: size mismatch");
    }
    return (probs - target).squaredNorm() / static_cast<double>(probs.size());
}

FeatureScaler fitScaler(const Matrix& features) {
    if (features.rows() == 0) {
        throw EmptyDataset("fitScaler: no samples");
    }
    FeatureScaler s;
    s.mean = features.colwise().mean();
    const Matrix centered = features.rowwise() - s.mean.transpose();
    s.scale = (centered.array().square().colwise().sum() / static_cast<double>(features.rows()))
                  .sqrt()
                  .max(1e-8)
                  .matrix()
                  .transpose();
    return s;
}

Network buildNetwork(const NetworkSpec& spec) {
    spec.validate();
    Network net;
    net.spec = spec;
    std::mt19937_64 rng(spec.seed);
    Eigen::Index fanIn = spec.inputDim;
    for (const auto& l : spec.layers) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fanIn + l.width));
        std::uniform_real_distribution<double> dist(-limit, limit);
        Matrix w(l.width, fanIn);
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) {
                w(i, j) = dist(rng);
            }
        }
        net.weights.push_back(std::move(w));
        net.biases.push_back(Vector::Zero(l.width));
        fanIn = l.width;
    }
    return net;
}

namespace {

void softmaxInPlace(Vector& z) {
    const double m = z.maxCoeff();
    z = (z.array() - m).exp();
    z /= z.sum();
}

void softmaxRowsInPlace(Matrix& z) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double m = z.row(i).maxCoeff();
        z.row(i) = (z.row(i).array() - m).exp();
        z.row(i) /= z.row(i).sum();
    }
}

Vector applyScaler(const Network& net, const Vector& input) {
    if (!net.scaler) return input;
    return (input - net.scaler->mean).cwiseQuotient(net.scaler->scale);
}

Matrix applyScalerRows(const Network& net, const Matrix& inputs) {
    if (!net.scaler) return inputs;
    Matrix out = inputs.rowwise() - net.scaler->mean.transpose();
    out.array().rowwise() /= net.scaler->scale.transpose().array();
    return out;
}

// Backprop dL/dz for a softmax layer: dz_i = p_i (g_i - g . p).
Vector softmaxBackward(const Vector& p, const Vector& g) {
    const double dot = g.dot(p);
    return p.cwiseProduct(g.array().matrix() - Vector::Constant(p.size(), dot));
}

}  // namespace

Vector forward(const Network& net, const Vector& input) {
    if (input.size() != net.inputDim()) {
        throw DimensionMismatch("forward: input size mismatch");
    }
    Vector a = applyScaler(net, input);
    for (size_t k = 0; k < net.weights.size(); ++k) {
        Vector z = net.weights[k] * a + net.biases[k];
        if (net.spec.layers[k].activation == Activation::Relu) {
            a = z.cwiseMax(0.0);
        } else {
            softmaxInPlace(z);
            a = std::move(z);
        }
    }
    return a;
}

Matrix forwardBatch(const Network& net, const Matrix& inputs) {
    if (inputs.cols() != net.inputDim()) {
        throw DimensionMismatch("forwardBatch: input size mismatch");
    }
    Matrix a = applyScalerRows(net, inputs);
    for (size_t k = 0; k < net.weights.size(); ++k) {
        Matrix z = a * net.weights[k].transpose();
        z.rowwise() += net.biases[k].transpose();
        if (net.spec.layers[k].activation == Activation::Relu) {
            a = z.cwiseMax(0.0);
        } else {
            softmaxRowsInPlace(z);
            a = std::move(z);
        }
    }
    return a;
}

int predictLabel(const Network& net, const Vector& input) {
    Eigen::Index best = 0;
    forward(net, input).maxCoeff(&best);
    return static_cast<int>(best);
}

Vector inputGradient(const Network& net, const Vector& input, const Vector& target) {
    if (input.size() != net.inputDim()) {
        throw DimensionMismatch("inputGradient: input size mismatch");
    }
    if (target.size() != net.outputDim()) {
        throw DimensionMismatch("inputGradient: target size mismatch");
    }
    const size_t L = net.weights.size();
    std::vector<Vector> acts(L + 1);
    acts[0] = applyScaler(net, input);
    for (size_t k = 0; k < L; ++k) {
        Vector z = net.weights[k] * acts[k] + net.biases[k];
        if (net.spec.layers[k].activation == Activation::Relu) {
            acts[k + 1] = z.cwiseMax(0.0);
        } else {
            softmaxInPlace(z);
            acts[k + 1] = std::move(z);
        }
    }

    // L = (1/K) sum_j (p_j - y_j)^2
    const Vector& p = acts[L];
    Vector grad = 2.0 / static_cast<double>(p.size()) * (p - target);
    for (size_t k = L; k-- > 0;) {
        Vector dz;
        if (net.spec.layers[k].activation == Activation::Softmax) {
            dz = softmaxBackward(acts[k + 1], grad);
        } else {
            dz = grad.cwiseProduct((acts[k + 1].array() > 0.0).cast<double>().matrix());
        }
        grad = net.weights[k].transpose() * dz;
    }
    if (net.scaler) {
        grad = grad.cwiseQuotient(net.scaler->scale);
    }
    return grad;
}

Network trainSgd(Network net, const LabeledDataset& data, const TrainConfig& cfg) {
    if (data.size() == 0) {
        throw EmptyDataset("trainSgd: empty dataset");
    }
    if (data.features.cols() != net.inputDim()) {
        throw DimensionMismatch("trainSgd: feature dimension mismatch");
    }
    if (static_cast<Eigen::Index>(data.labels.size()) != data.size()) {
        throw DimensionMismatch("trainSgd: label count mismatch");
    }
    if (!(cfg.learningRate > 0.0)) {
        throw Error("trainSgd: learningRate must be positive");
    }
    if (cfg.batchSize < 1) {
        throw Error("trainSgd: batchSize must be at least 1");
    }

    const size_t L = net.weights.size();
    const Eigen::Index K = net.outputDim();
    const Eigen::Index n = data.size();

    Matrix targets = Matrix::Zero(n, K);
    for (Eigen::Index i = 0; i < n; ++i) {
        targets(i, data.labels[static_cast<size_t>(i)]) = 1.0;
    }

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Eigen::Index> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    double bestAcc = -1.0;
    int sinceImprove = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (Eigen::Index start = 0; start < n; start += cfg.batchSize) {
            const Eigen::Index b = std::min<Eigen::Index>(cfg.batchSize, n - start);
            Matrix x(b, net.inputDim());
            Matrix y(b, K);
            for (Eigen::Index i = 0; i < b; ++i) {
                x.row(i) = data.features.row(order[static_cast<size_t>(start + i)]);
                y.row(i) = targets.row(order[static_cast<size_t>(start + i)]);
            }

            // Forward with inverted dropout.
            std::vector<Matrix> acts(L + 1);
            std::vector<Matrix> masks(L);
            acts[0] = applyScalerRows(net, x);
            for (size_t k = 0; k < L; ++k) {
                Matrix z = acts[k] * net.weights[k].transpose();
                z.rowwise() += net.biases[k].transpose();
                if (net.spec.layers[k].activation == Activation::Relu) {
                    acts[k + 1] = z.cwiseMax(0.0);
                } else {
                    softmaxRowsInPlace(z);
                    acts[k + 1] = std::move(z);
                }
                const double p = net.spec.layers[k].dropoutAfter;
                if (p > 0.0) {
                    Matrix mask(b, net.spec.layers[k].width);
                    const double keepInv = 1.0 / (1.0 - p);
                    for (Eigen::Index i = 0; i < mask.rows(); ++i) {
                        for (Eigen::Index j = 0; j < mask.cols(); ++j) {
                            mask(i, j) = unit(rng) < 1.0 - p ? keepInv : 0.0;
                        }
                    }
                    acts[k + 1] = acts[k + 1].cwiseProduct(mask);
                    masks[k] = std::move(mask);
                }
            }

            // Batch-mean MSE backprop.
            Matrix grad = (2.0 / static_cast<double>(K * b)) * (acts[L] - y);
            for (size_t k = L; k-- > 0;) {
                Matrix dz(grad.rows(), grad.cols());
                if (net.spec.layers[k].activation == Activation::Softmax) {
                    for (Eigen::Index i = 0; i < grad.rows(); ++i) {
                        dz.row(i) = softmaxBackward(acts[k + 1].row(i).transpose(),
                                                    grad.row(i).transpose())
                                        .transpose();
                    }
                } else {
                    if (masks[k].size() > 0) {
                        grad = grad.cwiseProduct(masks[k]);
                    }
                    dz = grad.cwiseProduct((acts[k + 1].array() > 0.0).cast<double>().matrix());
                }
                const Matrix dw = dz.transpose() * acts[k];
                const Vector db = dz.colwise().sum().transpose();
                if (k > 0) {
                    grad = dz * net.weights[k];
                }
                net.weights[k] -= cfg.learningRate * dw;
                net.biases[k] -= cfg.learningRate * db;
            }
        }

        const double acc = classAccuracy(net, data);
        if (acc > bestAcc) {
            bestAcc = acc;
            sinceImprove = 0;
        } else if (++sinceImprove >= cfg.patience) {
            break;
        }
    }
    return net;
}

double classAccuracy(const Network& net, const LabeledDataset& data) {
    if (data.size() == 0) {
        throw EmptyDataset("classAccuracy: empty dataset");
    }
    const Matrix probs = forwardBatch(net, data.features);
    Eigen::Index hits = 0;
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        Eigen::Index best = 0;
        probs.row(i).maxCoeff(&best);
        if (static_cast<int>(best) == data.labels[static_cast<size_t>(i)]) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(probs.rows());
}

namespace {

json vectorToJson(const Vector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

json matrixToJson(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Vector vectorFromJson(const json& arr) {
    Vector v(static_cast<Eigen::Index>(arr.size()));
    for (size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    return v;
}

Matrix matrixFromJson(const json& rows) {
    const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index c = r > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        const auto& row = rows[static_cast<size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != c) {
            throw MalformedFile("loadNetwork: ragged weight matrix");
        }
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = row[static_cast<size_t>(j)].get<double>();
    }
    return m;
}

}  // namespace

void saveNetwork(const std::string& path, const Network& net) {
    json j;
    j["format"] = "physadv-network-v1";
    json spec;
    spec["inputDim"] = net.spec.inputDim;
    spec["seed"] = net.spec.seed;
    json layers = json::array();
    for (const auto& l : net.spec.layers) {
        json lj;
        lj["width"] = l.width;
        lj["activation"] = l.activation == Activation::Relu ? "relu" : "softmax";
        lj["dropoutAfter"] = l.dropoutAfter;
        layers.push_back(std::move(lj));
    }
    spec["layers"] = std::move(layers);
    j["spec"] = std::move(spec);
    json ws = json::array(), bs = json::array();
    for (size_t k = 0; k < net.weights.size(); ++k) {
        ws.push_back(matrixToJson(net.weights[k]));
        bs.push_back(vectorToJson(net.biases[k]));
    }
    j["weights"] = std::move(ws);
    j["biases"] = std::move(bs);
    if (net.scaler) {
        json sc;
        sc["mean"] = vectorToJson(net.scaler->mean);
        sc["scale"] = vectorToJson(net.scaler->scale);
        j["scaler"] = std::move(sc);
    }
    std::ofstream out(path);
    if (!out) {
        throw MalformedFile("saveNetwork: cannot open " + path);
    }
    out << j.dump(1) << '\n';
}

Network loadNetwork(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw MalformedFile("loadNetwork: cannot open " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw MalformedFile(std::string("loadNetwork: parse error: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "physadv-network-v1") {
            throw MalformedFile("loadNetwork: unknown format tag");
        }
        Network net;
        const auto& spec = j.at("spec");
        net.spec.inputDim = spec.at("inputDim").get<Eigen::Index>();
        net.spec.seed = spec.at("seed").get<std::uint64_t>();
        for (const auto& lj : spec.at("layers")) {
            LayerSpec l;
            l.width = lj.at("width").get<Eigen::Index>();
            const auto act = lj.at("activation").get<std::string>();
            if (act == "relu") l.activation = Activation::Relu;
            else if (act == "softmax") l.activation = Activation::Softmax;
            else throw MalformedFile("loadNetwork: unknown activation " + act);
            l.dropoutAfter = lj.at("dropoutAfter").get<double>();
            net.spec.layers.push_back(l);
        }
        net.spec.validate();
        for (const auto& wj : j.at("weights")) net.weights.push_back(matrixFromJson(wj));
        for (const auto& bj : j.at("biases")) net.biases.push_back(vectorFromJson(bj));
        if (net.weights.size() != net.spec.layers.size() || net.biases.size() != net.spec.layers.size()) {
            throw MalformedFile("loadNetwork: layer count mismatch");
        }
        Eigen::Index fanIn = net.spec.inputDim;
        for (size_t k = 0; k < net.weights.size(); ++k) {
            if (net.weights[k].rows() != net.spec.layers[k].width ||
                net.weights[k].cols() != fanIn ||
                net.biases[k].size() != net.spec.layers[k].width) {
                throw MalformedFile("loadNetwork: weight dimensions inconsistent with spec");
            }
            fanIn = net.spec.layers[k].width;
        }
        if (j.contains("scaler")) {
            FeatureScaler s;
            s.mean = vectorFromJson(j["scaler"].at("mean"));
            s.scale = vectorFromJson(j["scaler"].at("scale"));
            if (s.mean.size() != net.spec.inputDim || s.scale.size() != net.spec.inputDim) {
                throw MalformedFile("loadNetwork: scaler dimension mismatch");
            }
            net.scaler = std::move(s);
        }
        return net;
    } catch (const json::exception& e) {
        throw MalformedFile(std::string("loadNetwork: missing field: ") + e.what());
    }
}

void saveDataset(const std::string& path, const LabeledDataset& data,
                 const std::string& headerComment) {
    std::ofstream out(path);
    if (!out) {
        throw MalformedFile("saveDataset: cannot open " + path);
    }
    if (!headerComment.empty()) {
        out << "# " << headerComment << '\n';
    }
    char buf[64];
    for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
        for (Eigen::Index j = 0; j < data.features.cols(); ++j) {
            const auto res = std::to_chars(buf, buf + sizeof(buf), data.features(i, j));
            out.write(buf, res.ptr - buf);
            out.put(',');
        }
        out << data.labels[static_cast<size_t>(i)] << '\n';
    }
}

LabeledDataset loadDataset(const std::string& path) {
    const Matrix raw = linalg::loadCsv(path);
    if (raw.cols() < 2) {
        throw MalformedFile("loadDataset: need at least one feature and a label column");
    }
    LabeledDataset d;
    d.features = raw.leftCols(raw.cols() - 1);
    d.labels.reserve(static_cast<size_t>(raw.rows()));
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
        d.labels.push_back(static_cast<int>(std::lround(raw(i, raw.cols() - 1))));
    }
    return d;
}

}  // namespace physadv::nn
