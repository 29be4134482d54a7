#include "stfall/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>

namespace fs = std::filesystem;

namespace stfall {

namespace {

constexpr double kProbEps = 1e-7;

double clip_prob(double p) { return std::clamp(p, kProbEps, 1.0 - kProbEps); }

std::vector<double> probs_of(const TensorF& p) {
    std::vector<double> out(static_cast<std::size_t>(p.size()));
    for (std::int64_t i = 0; i < p.size(); ++i) out[static_cast<std::size_t>(i)] = p[i];
    return out;
}

TensorF gather_rows(const TensorF& pool, const std::vector<int>& idx, std::size_t begin,
                    std::size_t end) {
    std::vector<std::int64_t> shape = pool.shape();
    const std::int64_t row = pool.size() / pool.dim(0);
    shape[0] = static_cast<std::int64_t>(end - begin);
    TensorF out(shape);
    for (std::size_t k = begin; k < end; ++k)
        std::copy_n(pool.data() + static_cast<std::int64_t>(idx[k]) * row, row,
                    out.data() + static_cast<std::int64_t>(k - begin) * row);
    return out;
}

void atomic_save(nn::NetworkF& net, const std::string& path) {
    const std::string tmp = path + ".tmp";
    net.save_state(tmp);
    fs::rename(tmp, path);
}

}  // namespace

void TrainConfig::validate() const {
    if (family != "3dcae-an" && family != "dae-an" && family != "cae-an")
        throw InputError("unknown family: " + family);
    if (t < 1 || stride < 1) throw InputError("T and stride must be >= 1");
    if (input_size < 8 || input_size % 8 != 0)
        throw InputError("input_size must be a positive multiple of 8");
    if (family == "dae-an" && input_size != 64)
        throw InputError("dae-an requires input_size = 64");
    if (lambda <= 0) throw InputError("lambda must be > 0");
    if (disc_lr <= 0) throw InputError("disc_lr must be > 0");
    if (max_epochs < 1) throw InputError("max_epochs must be >= 1");
    if (batch_size < 1) throw InputError("batch_size must be >= 1");
    if (checkpoint_every < 1) throw InputError("checkpoint_every must be >= 1");
}

std::string TrainConfig::canonical_text() const {
    std::string s;
    s += "T = " + std::to_string(t) + "\n";
    s += "adv_form = " + std::string(saturating_adv ? "saturating" : "non_saturating") + "\n";
    s += "batch_size = " + std::to_string(batch_size) + "\n";
    s += "checkpoint_every = " + std::to_string(checkpoint_every) + "\n";
    s += "disc_lr = " + format_real(disc_lr) + "\n";
    s += "family = " + family + "\n";
    s += "input_size = " + std::to_string(input_size) + "\n";
    s += "lambda = " + format_real(lambda) + "\n";
    s += "max_epochs = " + std::to_string(max_epochs) + "\n";
    s += "seed = " + std::to_string(seed) + "\n";
    s += "stride = " + std::to_string(stride) + "\n";
    return s;
}

std::string TrainConfig::hash() const {
    Fnv1a h;
    h.update(canonical_text());
    return h.hex();
}

TrainConfig train_config_from_file(const std::string& path) {
    TrainConfig cfg;
    for (const auto& [key, value] : parse_kv_file(path)) {
        try {
            if (key == "family") cfg.family = value;
            else if (key == "T") cfg.t = std::stoi(value);
            else if (key == "stride") cfg.stride = std::stoi(value);
            else if (key == "input_size") cfg.input_size = std::stoi(value);
            else if (key == "lambda") cfg.lambda = std::stod(value);
            else if (key == "disc_lr") cfg.disc_lr = std::stod(value);
            else if (key == "max_epochs") cfg.max_epochs = std::stoi(value);
            else if (key == "batch_size") cfg.batch_size = std::stoi(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "checkpoint_every") cfg.checkpoint_every = std::stoi(value);
            else if (key == "adv_form") {
                if (value == "saturating") cfg.saturating_adv = true;
                else if (value == "non_saturating") cfg.saturating_adv = false;
                else throw InputError("adv_form must be saturating or non_saturating");
            } else {
                throw InputError("unknown train config key: " + key);
            }
        } catch (const std::invalid_argument&) {
            throw InputError("bad value for train config key: " + key);
        }
    }
    cfg.validate();
    return cfg;
}

std::pair<double, double> adversarial_losses(const std::vector<double>& d_real,
                                             const std::vector<double>& d_fake) {
    if (d_real.empty() || d_fake.empty()) throw InputError("adversarial_losses: empty batch");
    double lr = 0, lf = 0, lg = 0;
    for (double p : d_real) lr -= std::log(clip_prob(p));
    for (double p : d_fake) {
        lf -= std::log(1.0 - clip_prob(p));
        lg -= std::log(clip_prob(p));
    }
    const double disc = lr / static_cast<double>(d_real.size()) + lf / static_cast<double>(d_fake.size());
    const double gen = lg / static_cast<double>(d_fake.size());
    return {disc, gen};
}

std::tuple<double, double, double> discriminator_backward(nn::NetworkF& disc, const TensorF& real,
                                                          const TensorF& fake) {
    disc.zero_grad();
    const double br = static_cast<double>(real.dim(0));
    const double bf = static_cast<double>(fake.dim(0));

    TensorF p_real = disc.forward(real, true);
    double loss_r = 0, mean_r = 0;
    TensorF dp_real(p_real.shape());
    for (std::int64_t i = 0; i < p_real.size(); ++i) {
        const double p = clip_prob(p_real[i]);
        loss_r -= std::log(p) / br;
        mean_r += p_real[i] / br;
        dp_real[i] = static_cast<float>(-1.0 / (p * br));
    }
    disc.backward(dp_real);

    TensorF p_fake = disc.forward(fake, true);
    double loss_f = 0, mean_f = 0;
    TensorF dp_fake(p_fake.shape());
    for (std::int64_t i = 0; i < p_fake.size(); ++i) {
        const double p = clip_prob(p_fake[i]);
        loss_f -= std::log(1.0 - p) / bf;
        mean_f += p_fake[i] / bf;
        dp_fake[i] = static_cast<float>(1.0 / ((1.0 - p) * bf));
    }
    disc.backward(dp_fake);

    return {loss_r + loss_f, mean_r, mean_f};
}

std::pair<double, double> generator_backward(nn::NetworkF& gen, nn::NetworkF& disc,
                                             const TensorF& batch, double lambda,
                                             bool saturating) {
    gen.zero_grad();
    const double b = static_cast<double>(batch.dim(0));

    TensorF recon = gen.forward(batch, true);
    const double recon_loss = reconstruction_loss(batch, recon);
    TensorF d_out(recon.shape());
    for (std::int64_t i = 0; i < recon.size(); ++i)
        d_out[i] = static_cast<float>(2.0 * (recon[i] - batch[i]) / b);

    TensorF p = disc.forward(recon, true);
    double adv_loss = 0;
    TensorF dp(p.shape());
    for (std::int64_t i = 0; i < p.size(); ++i) {
        const double pc = clip_prob(p[i]);
        if (saturating) {
            adv_loss += std::log(1.0 - pc) / b;
            dp[i] = static_cast<float>(-lambda / ((1.0 - pc) * b));
        } else {
            adv_loss -= std::log(pc) / b;
            dp[i] = static_cast<float>(-lambda / (pc * b));
        }
    }
    disc.zero_grad();  // input gradient only; disc is not stepped here
    TensorF d_adv = disc.backward(dp);
    for (std::int64_t i = 0; i < d_out.size(); ++i) d_out[i] += d_adv[i];

    gen.backward(d_out);
    return {recon_loss, adv_loss};
}

namespace {

std::pair<nn::ModelF, nn::ModelF> build_family(const std::string& family, int t, int input_size,
                                               std::uint64_t seed) {
    if (family == "3dcae-an")
        return {nn::ModelF(nn::make_3dcae_spec(t, input_size, input_size), seed),
                nn::ModelF(nn::make_3d_discriminator_spec(t, input_size, input_size), seed + 1)};
    if (family == "dae-an")
        return {nn::build_dae(seed), nn::build_dae_discriminator(seed + 1)};
    return {nn::ModelF(nn::make_cae_spec(input_size, input_size), seed),
            nn::ModelF(nn::make_cae_discriminator_spec(input_size, input_size), seed + 1)};
}

TensorF training_units(const std::vector<FrameSequence>& data, const TrainConfig& cfg) {
    std::vector<TensorF> parts;
    std::int64_t total = 0;
    for (const auto& seq : data) {
        if (seq.has_fall())
            throw InputError("one-class training: video " + seq.video_id +
                             " contains fall-labeled frames");
        if (cfg.family == "3dcae-an") {
            WindowSet ws = make_windows(seq, cfg.t, cfg.stride);
            total += ws.windows.dim(0);
            parts.push_back(std::move(ws.windows));
        } else {
            TensorF fr = frames_tensor(seq);
            total += fr.dim(0);
            parts.push_back(std::move(fr));
        }
    }
    if (parts.empty() || total == 0) throw InputError("training data is empty");
    std::vector<std::int64_t> shape = parts[0].shape();
    shape[0] = total;
    TensorF pool(shape);
    std::int64_t off = 0;
    for (const auto& p : parts) {
        std::copy_n(p.data(), p.size(), pool.data() + off);
        off += p.size();
    }
    return pool;
}

}  // namespace

TrainResult train(const std::vector<FrameSequence>& data, const TrainConfig& cfg,
                  const std::string& out_dir) {
    cfg.validate();
    if (data.empty()) throw InputError("training data is empty");
    TensorF pool = training_units(data, cfg);
    const int n_units = static_cast<int>(pool.dim(0));

    auto [gen, disc] = build_family(cfg.family, cfg.t, cfg.input_size, cfg.seed);
    nn::Sgd<float> disc_opt(disc.net.params(), static_cast<float>(cfg.disc_lr));
    nn::Adadelta<float> gen_opt(gen.net.params());

    if (!out_dir.empty()) fs::create_directories(out_dir);

    std::mt19937_64 shuffle_rng(cfg.seed ^ 0xa5a5a5a55a5a5a5aULL);
    std::vector<int> order(static_cast<std::size_t>(n_units));
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    int collapse_streak = 0;
    bool collapse_warned = false;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        EpochRecord rec;
        rec.epoch = epoch;
        int n_batches = 0;
        for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), at + static_cast<std::size_t>(cfg.batch_size));
            TensorF batch = gather_rows(pool, order, at, end);

            // (a) discriminator on real vs detached reconstruction
            TensorF fake = gen.net.forward(batch, true);
            auto [disc_loss, d_real, d_fake] = discriminator_backward(disc.net, batch, fake);
            disc_opt.step();

            // (b) generator on L_R + lambda * L_adv
            auto [recon_loss, adv_loss] =
                generator_backward(gen.net, disc.net, batch, cfg.lambda, cfg.saturating_adv);
            gen_opt.step();

            rec.mean_recon += recon_loss;
            rec.mean_gen_adv += adv_loss;
            rec.mean_disc += disc_loss;
            rec.d_real += d_real;
            rec.d_fake += d_fake;
            ++n_batches;
        }
        rec.mean_recon /= n_batches;
        rec.mean_gen_adv /= n_batches;
        rec.mean_disc /= n_batches;
        rec.d_real /= n_batches;
        rec.d_fake /= n_batches;
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.history.epochs.push_back(rec);

        if (rec.d_fake > 0.95) {
            if (++collapse_streak >= 10 && !collapse_warned) {
                std::fprintf(stderr,
                             "warning: D(reconstructed) mean > 0.95 for 10 consecutive epochs; "
                             "possible mode collapse (consider a smaller lambda)\n");
                collapse_warned = true;
            }
        } else {
            collapse_streak = 0;
        }

        if (!out_dir.empty() && epoch % cfg.checkpoint_every == 0 && epoch != cfg.max_epochs) {
            char sub[32];
            std::snprintf(sub, sizeof(sub), "ckpt_epoch_%04d", epoch);
            const fs::path dir = fs::path(out_dir) / sub;
            fs::create_directories(dir);
            atomic_save(gen.net, (dir / "gen.bin").string());
            atomic_save(disc.net, (dir / "disc.bin").string());
        }
    }

    result.generator = std::move(gen);
    result.discriminator = std::move(disc);
    if (!out_dir.empty()) save_model(result, cfg, out_dir);
    return result;
}

void save_model(const TrainResult& result, const TrainConfig& cfg, const std::string& dir) {
    fs::create_directories(dir);
    // const_cast-free: save_state is non-const because state() hands out
    // mutable tensor pointers shared with load_state
    auto& gen = const_cast<nn::ModelF&>(result.generator);
    auto& disc = const_cast<nn::ModelF&>(result.discriminator);
    atomic_save(gen.net, (fs::path(dir) / "gen.bin").string());
    atomic_save(disc.net, (fs::path(dir) / "disc.bin").string());

    nlohmann::json j;
    j["family"] = cfg.family;
    j["T"] = cfg.t;
    j["stride"] = cfg.stride;
    j["input_size"] = cfg.input_size;
    j["lambda"] = cfg.lambda;
    j["seed"] = cfg.seed;
    j["batch_size"] = cfg.batch_size;
    j["max_epochs"] = cfg.max_epochs;
    j["checkpoint_every"] = cfg.checkpoint_every;
    j["adv_form"] = cfg.saturating_adv ? "saturating" : "non_saturating";
    j["config_hash"] = cfg.hash();
    j["generator_spec"] = nn::spec_to_json(result.generator.spec);
    j["discriminator_spec"] = nn::spec_to_json(result.discriminator.spec);
    std::ofstream mf(fs::path(dir) / "model.json");
    if (!mf) throw IoError("cannot write model.json under " + dir);
    mf << j.dump(2) << '\n';

    std::ofstream hf(fs::path(dir) / "history.csv");
    if (!hf) throw IoError("cannot write history.csv under " + dir);
    hf << "epoch,mean_recon,mean_gen_adv,mean_disc,d_real,d_fake\n";
    for (const auto& r : result.history.epochs)
        hf << r.epoch << ',' << format_real(r.mean_recon) << ',' << format_real(r.mean_gen_adv)
           << ',' << format_real(r.mean_disc) << ',' << format_real(r.d_real) << ','
           << format_real(r.d_fake) << '\n';
}

TrainedPair load_model(const std::string& dir) {
    std::ifstream mf(fs::path(dir) / "model.json");
    if (!mf) throw IoError("missing model.json in " + dir);
    nlohmann::json j;
    mf >> j;

    TrainedPair pair;
    pair.family = j.at("family").get<std::string>();
    pair.t = j.at("T").get<int>();
    pair.input_size = j.value("input_size", 64);
    pair.lambda = j.at("lambda").get<double>();
    pair.seed = j.at("seed").get<std::uint64_t>();
    pair.config_hash = j.at("config_hash").get<std::string>();
    pair.generator = nn::ModelF(nn::spec_from_json(j.at("generator_spec")), pair.seed);
    pair.discriminator = nn::ModelF(nn::spec_from_json(j.at("discriminator_spec")), pair.seed + 1);
    pair.generator.net.load_state((fs::path(dir) / "gen.bin").string());
    pair.discriminator.net.load_state((fs::path(dir) / "disc.bin").string());
    return pair;
}

}  // namespace stfall
