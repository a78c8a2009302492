#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "physadv/linalg.hpp"

namespace physadv::nn {

enum class Activation { Relu, Softmax };

struct LayerSpec {
    Eigen::Index width = 0;
    Activation activation = Activation::Relu;
    double dropoutAfter = 0.0;  // applied during training only
};

struct NetworkSpec {
    Eigen::Index inputDim = 0;
    std::vector<LayerSpec> layers;
    std::uint64_t seed = 0;

    void validate() const;
    // Counts dense and dropout entries separately, mirroring how the model
    // tables list them.
    int layerCount() const;
};

// Per-feature affine map applied ahead of the first layer. Gradients with
// respect to the raw input chain through it, so attack code can stay in
// raw measurement units.
struct FeatureScaler {
    Vector mean;
    Vector scale;
};

struct Network {
    NetworkSpec spec;
    std::vector<Matrix> weights;  // layer k: width x fanIn
    std::vector<Vector> biases;
    std::optional<FeatureScaler> scaler;

    Eigen::Index inputDim() const { return spec.inputDim; }
    Eigen::Index outputDim() const { return spec.layers.back().width; }
};

struct LabeledDataset {
    Matrix features;          // one sample per row
    std::vector<int> labels;  // 0 = normal, 1 = attack

    Eigen::Index size() const { return features.rows(); }
};

struct TrainConfig {
    double learningRate = 1e-4;
    int batchSize = 512;
    int epochs = 100;
    std::uint64_t seed = 0;
    // Stop once training accuracy has not improved for this many epochs.
    int patience = 5;
};

Vector oneHot(int label, Eigen::Index classes = 2);
double mseLoss(const Vector& probs, const Vector& target);

FeatureScaler fitScaler(const Matrix& features);

// Weights drawn uniformly from +-sqrt(6/(fanIn+fanOut)), deterministic in
// spec.seed; biases start at zero.
Network buildNetwork(const NetworkSpec& spec);

Vector forward(const Network& net, const Vector& input);
Matrix forwardBatch(const Network& net, const Matrix& inputs);
int predictLabel(const Network& net, const Vector& input);

// Exact gradient of the MSE loss against the one-hot target with respect
// to the raw input vector. Dropout is inactive.
Vector inputGradient(const Network& net, const Vector& input, const Vector& target);

Network trainSgd(Network net, const LabeledDataset& data, const TrainConfig& cfg);

double classAccuracy(const Network& net, const LabeledDataset& data);

void saveNetwork(const std::string& path, const Network& net);
Network loadNetwork(const std::string& path);

void saveDataset(const std::string& path, const LabeledDataset& data,
                 const std::string& headerComment = "");
LabeledDataset loadDataset(const std::string& path);

}  // namespace physadv::nn
