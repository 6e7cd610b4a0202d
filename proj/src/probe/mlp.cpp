#include "halodet/probe/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "halodet/core/error.hpp"
#include "halodet/core/rng.hpp"
#include "halodet/kernels/kernels.hpp"

namespace halodet::probe {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// Binary cross-entropy from the logit: softplus(z) - y*z, in log-sum-exp form
// so large logits cannot overflow.
double bce_from_logit(double logit, bool factual) {
    const double softplus =
        logit > 0.0 ? logit + std::log1p(std::exp(-logit)) : std::log1p(std::exp(logit));
    return softplus - (factual ? logit : 0.0);
}

struct Gradients {
    std::vector<double> w1;
    std::vector<double> b1;
    std::vector<double> w2;
    double b2 = 0.0;

    explicit Gradients(const ProbeModel& m)
        : w1(m.w1.size(), 0.0), b1(m.b1.size(), 0.0), w2(m.w2.size(), 0.0) {}

    void reset() {
        std::fill(w1.begin(), w1.end(), 0.0);
        std::fill(b1.begin(), b1.end(), 0.0);
        std::fill(w2.begin(), w2.end(), 0.0);
        b2 = 0.0;
    }
};

struct Forward {
    std::vector<double> pre_hidden;  // z1
    std::vector<double> hidden;      // relu(z1)
    double logit = 0.0;
};

void forward_pass(const ProbeModel& m, std::span<const double> x, Forward& f) {
    f.pre_hidden.resize(m.hidden_width);
    kernels::matvec(m.w1.data(), m.hidden_width, m.input_width, x.data(), m.b1.data(),
                    f.pre_hidden.data());
    f.hidden = f.pre_hidden;
    kernels::relu(f.hidden);
    f.logit = kernels::dot(m.w2, f.hidden) + m.b2;
}

// Accumulates one example's gradient (scaled by weight) into g.
void backward_pass(const ProbeModel& m, std::span<const double> x, bool factual, double weight,
                   const Forward& f, Gradients& g, std::vector<double>& hidden_grad) {
    const double dz2 = (sigmoid(f.logit) - (factual ? 1.0 : 0.0)) * weight;
    kernels::axpy(dz2, f.hidden, g.w2);
    g.b2 += dz2;

    hidden_grad.assign(m.w2.begin(), m.w2.end());
    kernels::scale(hidden_grad, dz2);
    kernels::relu_grad_mask(f.pre_hidden, hidden_grad);

    for (std::size_t h = 0; h < m.hidden_width; ++h) {
        kernels::axpy(hidden_grad[h], x,
                      std::span<double>(g.w1.data() + h * m.input_width, m.input_width));
    }
    kernels::add(g.b1, hidden_grad);
}

struct AdamState {
    Gradients m;
    Gradients v;
    std::int64_t t = 0;

    explicit AdamState(const ProbeModel& model) : m(model), v(model) {}
};

void adam_update_array(std::span<double> param, std::span<const double> grad,
                       std::span<double> m, std::span<double> v, double lr, double bc1,
                       double bc2) {
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    for (std::size_t i = 0; i < param.size(); ++i) {
        m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
        v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
        param[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + kEps);
    }
}

void apply_update(ProbeModel& model, const Gradients& g, const TrainConfig& cfg,
                  AdamState& adam) {
    if (cfg.optimizer == Optimizer::gradient_descent) {
        kernels::axpy(-cfg.learning_rate, g.w1, model.w1);
        kernels::axpy(-cfg.learning_rate, g.b1, model.b1);
        kernels::axpy(-cfg.learning_rate, g.w2, model.w2);
        model.b2 -= cfg.learning_rate * g.b2;
        return;
    }
    ++adam.t;
    const double bc1 = 1.0 - std::pow(0.9, static_cast<double>(adam.t));
    const double bc2 = 1.0 - std::pow(0.999, static_cast<double>(adam.t));
    adam_update_array(model.w1, g.w1, adam.m.w1, adam.v.w1, cfg.learning_rate, bc1, bc2);
    adam_update_array(model.b1, g.b1, adam.m.b1, adam.v.b1, cfg.learning_rate, bc1, bc2);
    adam_update_array(model.w2, g.w2, adam.m.w2, adam.v.w2, cfg.learning_rate, bc1, bc2);
    std::span<double> p(&model.b2, 1);
    std::span<const double> gr(&g.b2, 1);
    std::span<double> ms(&adam.m.b2, 1), vs(&adam.v.b2, 1);
    adam_update_array(p, gr, ms, vs, cfg.learning_rate, bc1, bc2);
}

ProbeModel init_model(std::size_t input_width, const TrainConfig& cfg) {
    ProbeModel m;
    m.input_width = input_width;
    m.hidden_width = cfg.hidden_width;
    m.training_seed = cfg.seed;
    m.w1.resize(m.hidden_width * m.input_width);
    m.b1.assign(m.hidden_width, 0.0);
    m.w2.resize(m.hidden_width);

    core::Rng rng(cfg.seed);
    const double limit1 =
        std::sqrt(6.0 / static_cast<double>(m.input_width + m.hidden_width));
    for (auto& w : m.w1) w = rng.uniform_real(-limit1, limit1);
    const double limit2 = std::sqrt(6.0 / static_cast<double>(m.hidden_width + 1));
    for (auto& w : m.w2) w = rng.uniform_real(-limit2, limit2);
    return m;
}

double mean_train_loss(const ProbeModel& m, const std::vector<TrainExample>& examples) {
    Forward f;
    double acc = 0.0;
    for (const auto& ex : examples) {
        forward_pass(m, ex.features, f);
        acc += bce_from_logit(f.logit, ex.factual);
    }
    return acc / static_cast<double>(examples.size());
}

// Tolerant balanced accuracy at threshold 0.5 for early stopping; a class
// absent from the validation set simply does not contribute.
double validation_bacc(const ProbeModel& m, const std::vector<TrainExample>& examples) {
    Forward f;
    std::int64_t tp = 0, fn = 0, tn = 0, fp = 0;
    for (const auto& ex : examples) {
        forward_pass(m, ex.features, f);
        const bool pred_factual = sigmoid(f.logit) > 0.5;
        if (ex.factual) {
            pred_factual ? ++tp : ++fn;
        } else {
            pred_factual ? ++fp : ++tn;
        }
    }
    double total = 0.0;
    int classes = 0;
    if (tp + fn > 0) {
        total += static_cast<double>(tp) / static_cast<double>(tp + fn);
        ++classes;
    }
    if (tn + fp > 0) {
        total += static_cast<double>(tn) / static_cast<double>(tn + fp);
        ++classes;
    }
    return classes > 0 ? total / classes : 0.0;
}

} // namespace

double ProbeModel::logit(std::span<const double> x) const {
    if (x.size() != input_width) {
        throw invalid_input("probe input width mismatch: expected " +
                            std::to_string(input_width) + ", got " + std::to_string(x.size()));
    }
    Forward f;
    forward_pass(*this, x, f);
    return f.logit;
}

double probe_score(const ProbeModel& model, std::span<const double> x) {
    return sigmoid(model.logit(x));
}

std::string to_string(Optimizer opt) {
    return opt == Optimizer::adam ? "adam" : "gradient_descent";
}

Optimizer optimizer_from_string(const std::string& s) {
    if (s == "adam") return Optimizer::adam;
    if (s == "gradient_descent" || s == "sgd") return Optimizer::gradient_descent;
    throw invalid_input("unknown optimizer '" + s + "' (expected adam|gradient_descent)");
}

TrainResult train_probe(const std::vector<TrainExample>& train,
                        const std::vector<TrainExample>& validation,
                        const TrainConfig& config) {
    if (train.empty()) {
        throw invalid_input("train_probe: empty training set");
    }
    if (config.learning_rate <= 0.0) {
        throw invalid_input("train_probe: learning rate must be > 0");
    }
    if (config.epochs < 1 || config.batch_size < 1 || config.hidden_width < 1) {
        throw invalid_input("train_probe: epochs, batch size and hidden width must be >= 1");
    }
    const std::size_t input_width = train.front().features.size();
    std::int64_t n_factual = 0;
    for (const auto& ex : train) {
        if (ex.features.size() != input_width) {
            throw invalid_input("train_probe: inconsistent feature widths");
        }
        n_factual += ex.factual;
    }
    const auto n = static_cast<std::int64_t>(train.size());
    if (n_factual == 0 || n_factual == n) {
        throw invalid_input("train_probe: training data contains a single class");
    }

    double weight_factual = 1.0, weight_hallucinated = 1.0;
    if (config.class_weights) {
        weight_factual = static_cast<double>(n) / (2.0 * static_cast<double>(n_factual));
        weight_hallucinated = static_cast<double>(n) / (2.0 * static_cast<double>(n - n_factual));
    }

    ProbeModel model = init_model(input_width, config);
    Gradients grads(model);
    AdamState adam(model);
    core::Rng rng(config.seed ^ 0x7ce3f9d14c2b1a65ULL); // shuffle stream, separate from init

    TrainResult result;
    ProbeModel best = model;
    double best_bacc = -1.0;
    int best_epoch = 0;
    int epochs_since_improvement = 0;

    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Forward f;
    std::vector<double> hidden_grad;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            grads.reset();
            for (std::size_t i = start; i < end; ++i) {
                const auto& ex = train[order[i]];
                forward_pass(model, ex.features, f);
                backward_pass(model, ex.features, ex.factual,
                              ex.factual ? weight_factual : weight_hallucinated, f, grads,
                              hidden_grad);
            }
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            kernels::scale(grads.w1, inv_batch);
            kernels::scale(grads.b1, inv_batch);
            kernels::scale(grads.w2, inv_batch);
            grads.b2 *= inv_batch;
            apply_update(model, grads, config, adam);
        }
        result.train_loss.push_back(mean_train_loss(model, train));

        if (!validation.empty()) {
            const double vb = validation_bacc(model, validation);
            if (vb > best_bacc) {
                best_bacc = vb;
                best = model;
                best_epoch = epoch;
                epochs_since_improvement = 0;
            } else {
                ++epochs_since_improvement;
                if (config.patience > 0 && epochs_since_improvement >= config.patience) {
                    break;
                }
            }
        } else {
            best = model;
            best_epoch = epoch;
        }
    }

    result.model = std::move(best);
    result.best_epoch = best_epoch;
    if (!validation.empty()) {
        result.validation_bacc = best_bacc;
    }
    return result;
}

double gradient_check(const ProbeModel& model, const TrainExample& example) {
    if (example.features.size() != model.input_width) {
        throw invalid_input("gradient_check: input width mismatch");
    }
    Gradients analytic(model);
    Forward f;
    std::vector<double> hidden_grad;
    forward_pass(model, example.features, f);
    backward_pass(model, example.features, example.factual, 1.0, f, analytic, hidden_grad);

    ProbeModel probe = model;
    constexpr double kStep = 1e-5;
    auto loss_at = [&]() {
        Forward fw;
        forward_pass(probe, example.features, fw);
        return bce_from_logit(fw.logit, example.factual);
    };
    auto numeric_for = [&](double& param) {
        const double saved = param;
        param = saved + kStep;
        const double upper = loss_at();
        param = saved - kStep;
        const double lower = loss_at();
        param = saved;
        return (upper - lower) / (2.0 * kStep);
    };

    double max_rel = 0.0;
    auto consider = [&](double analytic_grad, double numeric_grad) {
        const double diff = std::abs(analytic_grad - numeric_grad);
        const double denom = std::max(std::abs(analytic_grad) + std::abs(numeric_grad), 1e-4);
        max_rel = std::max(max_rel, diff / denom);
    };
    for (std::size_t i = 0; i < probe.w1.size(); ++i) {
        consider(analytic.w1[i], numeric_for(probe.w1[i]));
    }
    for (std::size_t i = 0; i < probe.b1.size(); ++i) {
        consider(analytic.b1[i], numeric_for(probe.b1[i]));
    }
    for (std::size_t i = 0; i < probe.w2.size(); ++i) {
        consider(analytic.w2[i], numeric_for(probe.w2[i]));
    }
    consider(analytic.b2, numeric_for(probe.b2));
    return max_rel;
}

namespace {

constexpr int kSchemaVersion = 1;

void append_le_doubles(std::string& out, const std::vector<double>& values) {
    for (double v : values) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        for (int byte = 0; byte < 8; ++byte) {
            out.push_back(static_cast<char>((bits >> (8 * byte)) & 0xff));
        }
    }
}

std::vector<double> read_le_doubles(const std::string& bytes, std::size_t& offset,
                                    std::size_t count) {
    if (offset + count * 8 > bytes.size()) {
        throw parse_error("probe model file truncated");
    }
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t bits = 0;
        for (int byte = 0; byte < 8; ++byte) {
            bits |= static_cast<std::uint64_t>(
                        static_cast<unsigned char>(bytes[offset + i * 8 +
                                                         static_cast<std::size_t>(byte)]))
                    << (8 * byte);
        }
        std::memcpy(&values[i], &bits, sizeof(bits));
    }
    offset += count * 8;
    return values;
}

} // namespace

void save_probe(const ProbeModel& model, const std::string& path, bool binary) {
    nlohmann::json header{
        {"schema_version", kSchemaVersion},
        {"format", binary ? "binary64" : "text"},
        {"input_width", model.input_width},
        {"hidden_width", model.hidden_width},
        {"seed", model.training_seed},
    };
    std::string out;
    if (binary) {
        out = header.dump();
        out.push_back('\n');
        append_le_doubles(out, model.w1);
        append_le_doubles(out, model.b1);
        append_le_doubles(out, model.w2);
        append_le_doubles(out, {model.b2});
    } else {
        header["w1"] = model.w1;
        header["b1"] = model.b1;
        header["w2"] = model.w2;
        header["b2"] = model.b2;
        out = header.dump();
        out.push_back('\n');
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw invalid_input("cannot open '" + path + "' for writing");
    }
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) {
        throw invalid_input("failed writing '" + path + "'");
    }
}

ProbeModel load_probe(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw invalid_input("cannot open '" + path + "' for reading");
    }
    std::ostringstream buf;
    buf << file.rdbuf();
    const std::string bytes = buf.str();
    const auto newline = bytes.find('\n');
    const std::string header_line = newline == std::string::npos ? bytes : bytes.substr(0, newline);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_line);
    } catch (const nlohmann::json::parse_error& e) {
        throw parse_error(path + ": invalid probe model header: " + e.what());
    }
    if (header.value("schema_version", -1) != kSchemaVersion) {
        throw parse_error(path + ": unsupported probe model schema version");
    }

    ProbeModel model;
    model.input_width = header.at("input_width").get<std::size_t>();
    model.hidden_width = header.at("hidden_width").get<std::size_t>();
    model.training_seed = header.value("seed", std::uint64_t{0});

    const std::string format = header.at("format").get<std::string>();
    if (format == "text") {
        model.w1 = header.at("w1").get<std::vector<double>>();
        model.b1 = header.at("b1").get<std::vector<double>>();
        model.w2 = header.at("w2").get<std::vector<double>>();
        model.b2 = header.at("b2").get<double>();
    } else if (format == "binary64") {
        std::size_t offset = newline + 1;
        model.w1 = read_le_doubles(bytes, offset, model.hidden_width * model.input_width);
        model.b1 = read_le_doubles(bytes, offset, model.hidden_width);
        model.w2 = read_le_doubles(bytes, offset, model.hidden_width);
        model.b2 = read_le_doubles(bytes, offset, 1)[0];
    } else {
        throw parse_error(path + ": unknown probe model format '" + format + "'");
    }

    if (model.w1.size() != model.hidden_width * model.input_width ||
        model.b1.size() != model.hidden_width || model.w2.size() != model.hidden_width) {
        throw parse_error(path + ": probe model shape mismatch");
    }
    return model;
}

} // namespace halodet::probe
