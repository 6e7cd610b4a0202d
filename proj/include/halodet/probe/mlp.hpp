#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace halodet::probe {

// One hidden layer with rectifier activation and a sigmoid output unit.
// Weights are row-major; the model is an immutable value once trained.
struct ProbeModel {
    std::size_t input_width = 0;
    std::size_t hidden_width = 0;
    std::vector<double> w1; // [hidden_width x input_width]
    std::vector<double> b1; // [hidden_width]
    std::vector<double> w2; // [hidden_width]
    double b2 = 0.0;
    std::uint64_t training_seed = 0;

    double logit(std::span<const double> x) const;

    bool operator==(const ProbeModel&) const = default;
};

// P_factual in (0, 1); throws on input width mismatch.
double probe_score(const ProbeModel& model, std::span<const double> x);

enum class Optimizer { gradient_descent, adam };

std::string to_string(Optimizer opt);
Optimizer optimizer_from_string(const std::string& s);

struct TrainConfig {
    double learning_rate = 1e-3;
    int epochs = 50;
    int batch_size = 32;
    std::uint64_t seed = 0;
    Optimizer optimizer = Optimizer::adam;
    int patience = 5; // early stop on validation BAcc; <= 0 disables
    std::size_t hidden_width = 256;
    bool class_weights = false; // inverse-frequency weights for imbalanced data
};

struct TrainExample {
    std::vector<double> features;
    bool factual = false;
};

struct TrainResult {
    ProbeModel model;                    // checkpoint with the best validation BAcc
    std::optional<double> validation_bacc;
    int best_epoch = 0;                  // 1-based; 0 when no epoch ran
    std::vector<double> train_loss;      // mean BCE over the train set per epoch
};

// Mini-batch binary cross-entropy training with seeded init and shuffling;
// bitwise deterministic for a fixed seed and kernel selection. Requires both
// labels in the training data. With a validation set, returns the epoch
// checkpoint with the best validation BAcc and stops early after `patience`
// epochs without improvement.
TrainResult train_probe(const std::vector<TrainExample>& train,
                        const std::vector<TrainExample>& validation, const TrainConfig& config);

// Max relative error between analytic gradients and central finite
// differences (step 1e-5) over every parameter, evaluated on one example.
double gradient_check(const ProbeModel& model, const TrainExample& example);

// Self-describing single-file model persistence. Text format is a JSON
// document with base-10 weight arrays; binary is a JSON header line followed
// by raw little-endian 64-bit floats (w1, b1, w2, b2). Both load paths are
// supported and round-trip bit-exactly.
void save_probe(const ProbeModel& model, const std::string& path, bool binary = false);
ProbeModel load_probe(const std::string& path);

} // namespace halodet::probe
