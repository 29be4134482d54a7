#pragma once

#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "stfall/ingest.hpp"
#include "stfall/nn/builders.hpp"
#include "stfall/nn/optim.hpp"

namespace stfall {

struct TrainConfig {
    std::string family = "3dcae-an";  // 3dcae-an | dae-an | cae-an
    int t = 8;
    int stride = 1;
    int input_size = 64;  // square frame edge after preprocessing
    double lambda = 1.0;
    double disc_lr = 2e-4;
    int max_epochs = 500;
    int batch_size = 32;
    std::uint64_t seed = 1;
    bool saturating_adv = false;  // generator objective variant
    int checkpoint_every = 50;

    void validate() const;
    std::string canonical_text() const;
    std::string hash() const;
};

TrainConfig train_config_from_file(const std::string& path);

struct EpochRecord {
    int epoch = 0;  // 1-based
    double mean_recon = 0;
    double mean_gen_adv = 0;
    double mean_disc = 0;
    double d_real = 0;
    double d_fake = 0;
    double seconds = 0;  // wall clock; kept out of history.csv (not reproducible)
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
};

struct TrainResult {
    nn::ModelF generator;
    nn::ModelF discriminator;
    TrainHistory history;
};

// Mean over the batch of the per-sample squared L2 reconstruction error.
template <typename S>
double reconstruction_loss(const Tensor<S>& input, const Tensor<S>& output) {
    if (!input.same_shape(output)) throw InputError("reconstruction_loss: shape mismatch");
    if (input.rank() < 1 || input.dim(0) == 0) throw InputError("reconstruction_loss: empty batch");
    double sum = 0;
    for (std::int64_t i = 0; i < input.size(); ++i) {
        const double d = static_cast<double>(input[i]) - static_cast<double>(output[i]);
        sum += d * d;
    }
    return sum / static_cast<double>(input.dim(0));
}

// (disc_loss, gen_adv_loss) from discriminator probabilities, clipped to
// [eps, 1-eps] before the logs. gen_adv is the non-saturating -E[log D(fake)].
std::pair<double, double> adversarial_losses(const std::vector<double>& d_real,
                                             const std::vector<double>& d_fake);

// One discriminator update worth of gradients (real vs detached fake).
// Fills disc's param grads; returns (disc_loss, mean D(real), mean D(fake)).
std::tuple<double, double, double> discriminator_backward(nn::NetworkF& disc,
                                                          const TensorF& real,
                                                          const TensorF& fake);

// One generator update worth of gradients for L_R + lambda * L_adv.
// Fills gen's param grads (disc grads are clobbered, not stepped);
// returns (recon_loss, gen_adv_loss).
std::pair<double, double> generator_backward(nn::NetworkF& gen, nn::NetworkF& disc,
                                             const TensorF& batch, double lambda,
                                             bool saturating);

// Adversarial one-class training on ADL-only preprocessed sequences.
// Throws InputError if any sequence carries a fall label or data is empty.
// If out_dir is non-empty, writes checkpoints, model.json and history.csv.
TrainResult train(const std::vector<FrameSequence>& data, const TrainConfig& cfg,
                  const std::string& out_dir = "");

// A persisted generator/discriminator pair (model.json + weight archives).
struct TrainedPair {
    std::string family;
    int t = 8;
    int input_size = 64;
    double lambda = 1.0;
    std::uint64_t seed = 0;
    std::string config_hash;
    nn::ModelF generator;
    nn::ModelF discriminator;
};

void save_model(const TrainResult& result, const TrainConfig& cfg, const std::string& dir);
TrainedPair load_model(const std::string& dir);

}  // namespace stfall
