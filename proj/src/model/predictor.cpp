#include "loam/model/predictor.hpp"

#include <cmath>

#include "loam/util/errors.hpp"
#include "loam/util/rng.hpp"

namespace loam {

AblationMode ablation_from_string(const std::string& s) {
    if (s == "LOAM") return AblationMode::Full;
    if (s == "LOAM-NA") return AblationMode::NoAdaptation;
    if (s == "LOAM-NL") return AblationMode::NoLoad;
    throw ArgumentError("unknown ablation mode: " + s);
}

const char* to_string(AblationMode m) {
    switch (m) {
        case AblationMode::Full: return "LOAM";
        case AblationMode::NoAdaptation: return "LOAM-NA";
        case AblationMode::NoLoad: return "LOAM-NL";
    }
    return "?";
}

namespace {

Eigen::MatrixXd init_matrix(Eigen::Index rows, Eigen::Index cols, double scale, Rng& rng) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = scale * rng.normal();
    }
    return m;
}

}  // namespace

PredictorParams::PredictorParams(const PredictorConfig& config, int feature_dim,
                                 std::uint64_t init_seed)
    : config_(config), feature_dim_(feature_dim) {
    if (config_.tcn_channels.empty()) throw ConfigError("PredictorConfig: no TCN layers");
    Rng rng(init_seed);
    int in_dim = feature_dim;
    for (int out_dim : config_.tcn_channels) {
        TcnLayer layer;
        const double scale = std::sqrt(1.0 / (3.0 * in_dim));
        layer.w_self = init_matrix(out_dim, in_dim, scale, rng);
        layer.w_left = init_matrix(out_dim, in_dim, scale, rng);
        layer.w_right = init_matrix(out_dim, in_dim, scale, rng);
        layer.bias = Eigen::VectorXd::Zero(out_dim);
        tcn.push_back(std::move(layer));
        in_dim = out_dim;
    }
    const int n = config_.embedding_dim;
    const int h = config_.domain_hidden;
    w_embed = init_matrix(n, in_dim, std::sqrt(1.0 / in_dim), rng);
    b_embed = Eigen::VectorXd::Zero(n);
    w_cost = init_matrix(1, n, std::sqrt(1.0 / n), rng);
    b_cost = 0.0;
    w_dom1 = init_matrix(h, n, std::sqrt(1.0 / n), rng);
    b_dom1 = Eigen::VectorXd::Zero(h);
    w_dom2 = init_matrix(2, h, std::sqrt(1.0 / h), rng);
    b_dom2 = Eigen::VectorXd::Zero(2);
}

std::size_t PredictorParams::parameter_count() const {
    std::size_t total = 0;
    for (const auto& l : tcn) {
        total += static_cast<std::size_t>(l.w_self.size() + l.w_left.size() + l.w_right.size() +
                                          l.bias.size());
    }
    total += static_cast<std::size_t>(w_embed.size() + b_embed.size() + w_cost.size());
    total += 1;  // b_cost
    total += static_cast<std::size_t>(w_dom1.size() + b_dom1.size() + w_dom2.size() + b_dom2.size());
    return total;
}

namespace {

void append(Eigen::VectorXd& out, Eigen::Index& at, const Eigen::MatrixXd& m) {
    out.segment(at, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    at += m.size();
}

void take(const Eigen::VectorXd& in, Eigen::Index& at, Eigen::MatrixXd& m) {
    Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = in.segment(at, m.size());
    at += m.size();
}

void take_vec(const Eigen::VectorXd& in, Eigen::Index& at, Eigen::VectorXd& v) {
    v = in.segment(at, v.size());
    at += v.size();
}

void take_row(const Eigen::VectorXd& in, Eigen::Index& at, Eigen::RowVectorXd& v) {
    v = in.segment(at, v.size()).transpose();
    at += v.size();
}

}  // namespace

Eigen::VectorXd PredictorParams::flatten() const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index at = 0;
    for (const auto& l : tcn) {
        append(out, at, l.w_self);
        append(out, at, l.w_left);
        append(out, at, l.w_right);
        out.segment(at, l.bias.size()) = l.bias;
        at += l.bias.size();
    }
    append(out, at, w_embed);
    out.segment(at, b_embed.size()) = b_embed;
    at += b_embed.size();
    out.segment(at, w_cost.size()) = w_cost.transpose();
    at += w_cost.size();
    out[at++] = b_cost;
    append(out, at, w_dom1);
    out.segment(at, b_dom1.size()) = b_dom1;
    at += b_dom1.size();
    append(out, at, w_dom2);
    out.segment(at, b_dom2.size()) = b_dom2;
    at += b_dom2.size();
    return out;
}

void PredictorParams::unflatten(const Eigen::VectorXd& flat) {
    if (flat.size() != static_cast<Eigen::Index>(parameter_count())) {
        throw ArgumentError("PredictorParams::unflatten: size mismatch");
    }
    Eigen::Index at = 0;
    for (auto& l : tcn) {
        take(flat, at, l.w_self);
        take(flat, at, l.w_left);
        take(flat, at, l.w_right);
        take_vec(flat, at, l.bias);
    }
    take(flat, at, w_embed);
    take_vec(flat, at, b_embed);
    take_row(flat, at, w_cost);
    b_cost = flat[at++];
    take(flat, at, w_dom1);
    take_vec(flat, at, b_dom1);
    take(flat, at, w_dom2);
    take_vec(flat, at, b_dom2);
}

ForwardTrace forward_traced(const PredictorParams& params, const PlanFeatureTensor& tensor) {
    if (tensor.node_features.cols() != params.feature_dim()) {
        throw DataError("forward: tensor feature_dim " +
                        std::to_string(tensor.node_features.cols()) +
                        " does not match model feature_dim " +
                        std::to_string(params.feature_dim()));
    }
    const Eigen::Index n_nodes = tensor.n_nodes();
    ForwardTrace trace;

    Eigen::MatrixXd current = tensor.node_features;
    for (const auto& layer : params.tcn) {
        const Eigen::Index out_dim = layer.w_self.rows();
        Eigen::MatrixXd next(n_nodes, out_dim);
        for (Eigen::Index i = 0; i < n_nodes; ++i) {
            Eigen::VectorXd z = layer.w_self * current.row(i).transpose() + layer.bias;
            const int l = tensor.topology(i, 0);
            const int r = tensor.topology(i, 1);
            if (l >= 0) z += layer.w_left * current.row(l).transpose();
            if (r >= 0) z += layer.w_right * current.row(r).transpose();
            next.row(i) = z.array().tanh().matrix().transpose();
        }
        trace.layer_out.push_back(next);
        current = std::move(next);
    }

    const Eigen::Index channels = current.cols();
    trace.pooled.resize(channels);
    if (params.config().pooling == Pooling::Max) {
        trace.argmax.resize(static_cast<std::size_t>(channels));
        for (Eigen::Index c = 0; c < channels; ++c) {
            Eigen::Index which = 0;
            trace.pooled[c] = current.col(c).maxCoeff(&which);
            trace.argmax[static_cast<std::size_t>(c)] = which;
        }
    } else {
        trace.pooled = current.colwise().mean().transpose();
    }

    trace.embedding = (params.w_embed * trace.pooled + params.b_embed).array().tanh();
    const double log_cost = (params.w_cost * trace.embedding).value() + params.b_cost;
    trace.dom_hidden = (params.w_dom1 * trace.embedding + params.b_dom1).array().tanh();
    trace.dom_logits = params.w_dom2 * trace.dom_hidden + params.b_dom2;

    const double m = trace.dom_logits.maxCoeff();
    Eigen::Vector2d ex = (trace.dom_logits.array() - m).exp();
    const Eigen::Vector2d probs = ex / ex.sum();

    trace.result.embedding = trace.embedding;
    trace.result.log_cost = log_cost;
    trace.result.cost = std::exp(log_cost);
    trace.result.domain_probs = probs;
    return trace;
}

ForwardResult forward(const PredictorParams& params, const PlanFeatureTensor& tensor) {
    return forward_traced(params, tensor).result;
}

Gradients Gradients::zeros_like(const PredictorParams& p) {
    Gradients g;
    for (const auto& l : p.tcn) {
        TcnLayer z;
        z.w_self = Eigen::MatrixXd::Zero(l.w_self.rows(), l.w_self.cols());
        z.w_left = Eigen::MatrixXd::Zero(l.w_left.rows(), l.w_left.cols());
        z.w_right = Eigen::MatrixXd::Zero(l.w_right.rows(), l.w_right.cols());
        z.bias = Eigen::VectorXd::Zero(l.bias.size());
        g.tcn.push_back(std::move(z));
    }
    g.w_embed = Eigen::MatrixXd::Zero(p.w_embed.rows(), p.w_embed.cols());
    g.b_embed = Eigen::VectorXd::Zero(p.b_embed.size());
    g.w_cost = Eigen::RowVectorXd::Zero(p.w_cost.size());
    g.b_cost = 0.0;
    g.w_dom1 = Eigen::MatrixXd::Zero(p.w_dom1.rows(), p.w_dom1.cols());
    g.b_dom1 = Eigen::VectorXd::Zero(p.b_dom1.size());
    g.w_dom2 = Eigen::MatrixXd::Zero(p.w_dom2.rows(), p.w_dom2.cols());
    g.b_dom2 = Eigen::VectorXd::Zero(p.b_dom2.size());
    return g;
}

void Gradients::add_scaled(const Gradients& other, double scale) {
    for (std::size_t i = 0; i < tcn.size(); ++i) {
        tcn[i].w_self += scale * other.tcn[i].w_self;
        tcn[i].w_left += scale * other.tcn[i].w_left;
        tcn[i].w_right += scale * other.tcn[i].w_right;
        tcn[i].bias += scale * other.tcn[i].bias;
    }
    w_embed += scale * other.w_embed;
    b_embed += scale * other.b_embed;
    w_cost += scale * other.w_cost;
    b_cost += scale * other.b_cost;
    w_dom1 += scale * other.w_dom1;
    b_dom1 += scale * other.b_dom1;
    w_dom2 += scale * other.w_dom2;
    b_dom2 += scale * other.b_dom2;
}

Eigen::VectorXd Gradients::flatten() const {
    Eigen::Index total = 0;
    for (const auto& l : tcn) total += l.w_self.size() + l.w_left.size() + l.w_right.size() + l.bias.size();
    total += w_embed.size() + b_embed.size() + w_cost.size() + 1;
    total += w_dom1.size() + b_dom1.size() + w_dom2.size() + b_dom2.size();
    Eigen::VectorXd out(total);
    Eigen::Index at = 0;
    for (const auto& l : tcn) {
        append(out, at, l.w_self);
        append(out, at, l.w_left);
        append(out, at, l.w_right);
        out.segment(at, l.bias.size()) = l.bias;
        at += l.bias.size();
    }
    append(out, at, w_embed);
    out.segment(at, b_embed.size()) = b_embed;
    at += b_embed.size();
    out.segment(at, w_cost.size()) = w_cost.transpose();
    at += w_cost.size();
    out[at++] = b_cost;
    append(out, at, w_dom1);
    out.segment(at, b_dom1.size()) = b_dom1;
    at += b_dom1.size();
    append(out, at, w_dom2);
    out.segment(at, b_dom2.size()) = b_dom2;
    at += b_dom2.size();
    return out;
}

void backward(const PredictorParams& params, const PlanFeatureTensor& tensor,
              const ForwardTrace& trace, double d_log_cost, const Eigen::Vector2d& d_logits,
              double grl_lambda, Gradients& out) {
    const Eigen::Index n_nodes = tensor.n_nodes();

    // Heads.
    Eigen::VectorXd d_embed_cost = Eigen::VectorXd::Zero(trace.embedding.size());
    if (d_log_cost != 0.0) {
        out.w_cost += d_log_cost * trace.embedding.transpose();
        out.b_cost += d_log_cost;
        d_embed_cost = params.w_cost.transpose() * d_log_cost;
    }

    Eigen::VectorXd d_embed_dom = Eigen::VectorXd::Zero(trace.embedding.size());
    if (d_logits.squaredNorm() != 0.0) {
        out.w_dom2 += d_logits * trace.dom_hidden.transpose();
        out.b_dom2 += d_logits;
        Eigen::VectorXd d_hidden = params.w_dom2.transpose() * d_logits;
        d_hidden.array() *= 1.0 - trace.dom_hidden.array().square();
        out.w_dom1 += d_hidden * trace.embedding.transpose();
        out.b_dom1 += d_hidden;
        d_embed_dom = params.w_dom1.transpose() * d_hidden;
    }

    // Gradient reversal between PlanEmb and DomClf: the domain branch enters
    // the embedding scaled by -lambda; the heads above are untouched.
    Eigen::VectorXd d_embed = d_embed_cost - grl_lambda * d_embed_dom;

    // Embedding layer.
    Eigen::VectorXd dz_embed = d_embed;
    dz_embed.array() *= 1.0 - trace.embedding.array().square();
    out.w_embed += dz_embed * trace.pooled.transpose();
    out.b_embed += dz_embed;
    Eigen::VectorXd d_pooled = params.w_embed.transpose() * dz_embed;

    // Pooling.
    const Eigen::MatrixXd& last = trace.layer_out.back();
    Eigen::MatrixXd d_layer = Eigen::MatrixXd::Zero(last.rows(), last.cols());
    if (params.config().pooling == Pooling::Max) {
        for (Eigen::Index c = 0; c < last.cols(); ++c) {
            d_layer(trace.argmax[static_cast<std::size_t>(c)], c) += d_pooled[c];
        }
    } else {
        const double inv_n = 1.0 / static_cast<double>(last.rows());
        for (Eigen::Index c = 0; c < last.cols(); ++c) {
            d_layer.col(c).setConstant(d_pooled[c] * inv_n);
        }
    }

    // TCN stack, top down.
    for (std::size_t li = params.tcn.size(); li-- > 0;) {
        const TcnLayer& layer = params.tcn[li];
        const Eigen::MatrixXd& h = trace.layer_out[li];
        const Eigen::MatrixXd& input =
            li == 0 ? tensor.node_features : trace.layer_out[li - 1];
        Eigen::MatrixXd dz = d_layer;
        dz.array() *= 1.0 - h.array().square();

        Eigen::MatrixXd d_input = Eigen::MatrixXd::Zero(input.rows(), input.cols());
        TcnLayer& g = out.tcn[li];
        for (Eigen::Index i = 0; i < n_nodes; ++i) {
            const Eigen::VectorXd dzi = dz.row(i).transpose();
            g.w_self += dzi * input.row(i);
            g.bias += dzi;
            d_input.row(i) += (layer.w_self.transpose() * dzi).transpose();
            const int l = tensor.topology(i, 0);
            const int r = tensor.topology(i, 1);
            if (l >= 0) {
                g.w_left += dzi * input.row(l);
                d_input.row(l) += (layer.w_left.transpose() * dzi).transpose();
            }
            if (r >= 0) {
                g.w_right += dzi * input.row(r);
                d_input.row(r) += (layer.w_right.transpose() * dzi).transpose();
            }
        }
        d_layer = std::move(d_input);
    }
}

void zero_environment_span(PlanFeatureTensor& tensor, const FeatureLayout& layout) {
    tensor.node_features
        .block(0, layout.environment.offset, tensor.node_features.rows(), layout.environment.size)
        .setZero();
}

}  // namespace loam
