#include "degm/network.hpp"

#include <cmath>
#include <limits>

namespace degm {

namespace {

Mat uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    Mat out(rows, cols);
    for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = dist(rng);
    return out;
}

AttentionLayer init_layer(int d, Rng& rng) {
    return {uniform_matrix(d, d, 1.0 / std::sqrt(d), rng), uniform_matrix(1, 2 * d, 1.0 / std::sqrt(2.0 * d), rng)};
}

double elu_grad(double x) { return x > 0 ? 1.0 : std::exp(x); }

Mat activate(Activation act, const Mat& x) {
    if (act == Activation::identity) return x;
    return x.unaryExpr([](double v) { return v > 0 ? v : std::expm1(v); });
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

template <typename P, typename E>
void append_encoder(std::vector<std::pair<std::string, P>>& out, const std::string& prefix, E& encoder) {
    for (std::size_t k = 0; k < encoder.size(); ++k) {
        out.emplace_back(prefix + "." + std::to_string(k) + ".W", &encoder[k].W);
        out.emplace_back(prefix + "." + std::to_string(k) + ".a", &encoder[k].a);
    }
}

template <typename P, typename Self>
std::vector<std::pair<std::string, P>> collect_arrays(Self& self) {
    std::vector<std::pair<std::string, P>> out;
    out.emplace_back("emb_event", &self.emb_event);
    out.emplace_back("pos_table", &self.pos_table);
    out.emplace_back("step_table", &self.step_table);
    append_encoder<P>(out, "enc_shared", self.enc_shared);
    append_encoder<P>(out, "enc_type", self.enc_type);
    append_encoder<P>(out, "enc_struct", self.enc_struct);
    out.emplace_back("edge_mlp.W1", &self.edge_mlp.W1);
    out.emplace_back("edge_mlp.b1", &self.edge_mlp.b1);
    out.emplace_back("edge_mlp.w2", &self.edge_mlp.w2);
    out.emplace_back("edge_mlp.b2", &self.edge_mlp.b2);
    return out;
}

}  // namespace

void ModelConfig::validate() const {
    if (d < 1) throw ConfigError("model: d must be >= 1");
    if (layers < 1) throw ConfigError("model: layers must be >= 1");
    if (m < 2) throw ConfigError("model: m must be >= 2");
    if (num_types < 2) throw ConfigError("model: num_types (including PAD) must be >= 2");
    if (T < 2) throw ConfigError("model: T must be >= 2");
}

DenoiserParams DenoiserParams::initialize(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    const int d = config.d;
    const double table_scale = 1.0 / std::sqrt(static_cast<double>(d));
    DenoiserParams p;
    p.config = config;
    p.emb_event = gaussian_matrix(config.num_types, d, rng) * table_scale;
    p.pos_table = gaussian_matrix(config.m, d, rng) * table_scale;
    p.step_table = gaussian_matrix(config.T, d, rng) * table_scale;
    for (auto* enc : {&p.enc_shared, &p.enc_type, &p.enc_struct})
        for (int k = 0; k < config.layers; ++k) enc->push_back(init_layer(d, rng));
    const double b_in = 1.0 / std::sqrt(2.0 * d);
    const double b_hidden = 1.0 / std::sqrt(static_cast<double>(d));
    p.edge_mlp.W1 = uniform_matrix(d, 2 * d, b_in, rng);
    p.edge_mlp.b1 = uniform_matrix(1, d, b_in, rng);
    p.edge_mlp.w2 = uniform_matrix(1, d, b_hidden, rng);
    p.edge_mlp.b2 = uniform_matrix(1, 1, b_hidden, rng);
    return p;
}

DenoiserParams DenoiserParams::zeros_like(const DenoiserParams& other) {
    DenoiserParams p = other;
    p.set_zero();
    return p;
}

std::vector<std::pair<std::string, Mat*>> DenoiserParams::arrays() { return collect_arrays<Mat*>(*this); }

std::vector<std::pair<std::string, const Mat*>> DenoiserParams::arrays() const {
    return collect_arrays<const Mat*>(*this);
}

void DenoiserParams::set_zero() {
    for (auto& [name, a] : arrays()) a->setZero();
}

void DenoiserParams::add_scaled(const DenoiserParams& other, double scale) {
    auto mine = arrays();
    auto theirs = other.arrays();
    for (std::size_t i = 0; i < mine.size(); ++i) *mine[i].second += scale * *theirs[i].second;
}

bool DenoiserParams::all_finite() const {
    for (const auto& [name, a] : arrays())
        if (!a->allFinite()) return false;
    return true;
}

std::size_t DenoiserParams::num_parameters() const {
    std::size_t n = 0;
    for (const auto& [name, a] : arrays()) n += static_cast<std::size_t>(a->size());
    return n;
}

double leaky_relu(double x) { return x > 0 ? x : kLeakySlope * x; }

double activate(Activation act, double x) {
    if (act == Activation::identity) return x;
    return x > 0 ? x : std::expm1(x);
}

Mat attention_forward(const AttentionLayer& layer, const Mat& h, Activation act, bool residual,
                      AttentionTape& tape) {
    const Eigen::Index d = layer.W.rows();
    if (h.cols() != d) throw ConfigError("attention_layer: input width does not match W");
    tape.input = h;
    tape.z = h * layer.W.transpose();
    Vec query = tape.z * layer.a.leftCols(d).transpose();
    Vec key = tape.z * layer.a.rightCols(d).transpose();
    const Eigen::Index m = h.rows();
    tape.scores.resize(m, m);
    tape.alpha.resize(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        double row_max = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < m; ++j) {
            double s = query(i) + key(j);
            tape.scores(i, j) = s;
            double e = leaky_relu(s);
            tape.alpha(i, j) = e;
            row_max = std::max(row_max, e);
        }
        double total = 0;
        for (Eigen::Index j = 0; j < m; ++j) {
            double w = std::exp(tape.alpha(i, j) - row_max);
            tape.alpha(i, j) = w;
            total += w;
        }
        tape.alpha.row(i) /= total;
    }
    tape.agg = tape.alpha * tape.z;
    Mat out = activate(act, tape.agg);
    if (residual) out += h;
    return out;
}

Mat attention_backward(const AttentionLayer& layer, const AttentionTape& tape, const Mat& d_out, Activation act,
                       bool residual, AttentionLayer& grad) {
    const Eigen::Index d = layer.W.rows();
    const Eigen::Index m = tape.input.rows();
    Mat d_agg = d_out;
    if (act == Activation::elu)
        for (Eigen::Index i = 0; i < d_agg.size(); ++i) d_agg.data()[i] *= elu_grad(tape.agg.data()[i]);

    Mat d_alpha = d_agg * tape.z.transpose();
    Mat d_z = tape.alpha.transpose() * d_agg;

    // softmax and LeakyReLU
    Mat d_s(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        double dot = tape.alpha.row(i).dot(d_alpha.row(i));
        for (Eigen::Index j = 0; j < m; ++j) {
            double de = tape.alpha(i, j) * (d_alpha(i, j) - dot);
            d_s(i, j) = de * (tape.scores(i, j) > 0 ? 1.0 : kLeakySlope);
        }
    }
    Vec d_query = d_s.rowwise().sum();
    Vec d_key = d_s.colwise().sum().transpose();

    grad.a.leftCols(d) += (tape.z.transpose() * d_query).transpose();
    grad.a.rightCols(d) += (tape.z.transpose() * d_key).transpose();
    d_z += d_query * layer.a.leftCols(d);
    d_z += d_key * layer.a.rightCols(d);

    grad.W += d_z.transpose() * tape.input;
    Mat d_in = d_z * layer.W;
    if (residual) d_in += d_out;
    return d_in;
}

Mat attention_weights(const AttentionLayer& layer, const Mat& h) {
    AttentionTape tape;
    attention_forward(layer, h, Activation::identity, false, tape);
    return tape.alpha;
}

Mat attention_layer(const AttentionLayer& layer, const Mat& h, Activation act, bool residual) {
    AttentionTape tape;
    return attention_forward(layer, h, act, residual, tape);
}

Mat run_encoder(const Encoder& encoder, const Mat& h, const ModelConfig& config) {
    Mat x = h;
    for (std::size_t k = 0; k < encoder.size(); ++k) {
        x = attention_layer(encoder[k], x, config.activation, config.residual);
        if (!x.allFinite()) throw NumericError("encoder layer " + std::to_string(k) + " produced non-finite values");
    }
    return x;
}

EncoderOutput encode(const Mat& h_la, const DenoiserParams& params) {
    EncoderOutput out;
    out.h_sh = run_encoder(params.enc_shared, h_la, params.config);
    out.h_ty = run_encoder(params.enc_type, out.h_sh, params.config);
    out.h_st = run_encoder(params.enc_struct, out.h_sh, params.config);
    return out;
}

namespace {

Mat encoder_forward(const Encoder& encoder, const Mat& h, const ModelConfig& config, std::vector<AttentionTape>& tapes,
                    const char* name) {
    tapes.resize(encoder.size());
    Mat x = h;
    for (std::size_t k = 0; k < encoder.size(); ++k) {
        x = attention_forward(encoder[k], x, config.activation, config.residual, tapes[k]);
        if (!x.allFinite())
            throw NumericError(std::string(name) + " layer " + std::to_string(k) + " produced non-finite values");
    }
    return x;
}

Mat encoder_backward(const Encoder& encoder, const std::vector<AttentionTape>& tapes, Mat d, const ModelConfig& config,
                     Encoder& grad) {
    for (std::size_t k = encoder.size(); k-- > 0;)
        d = attention_backward(encoder[k], tapes[k], d, config.activation, config.residual, grad[k]);
    return d;
}

}  // namespace

const EncoderOutput& encode_forward(const Mat& h_la, const DenoiserParams& params, EncodeTape& tape) {
    tape.out.h_sh = encoder_forward(params.enc_shared, h_la, params.config, tape.shared, "enc_shared");
    tape.out.h_ty = encoder_forward(params.enc_type, tape.out.h_sh, params.config, tape.type, "enc_type");
    tape.out.h_st = encoder_forward(params.enc_struct, tape.out.h_sh, params.config, tape.structure, "enc_struct");
    return tape.out;
}

Mat encode_backward(const DenoiserParams& params, const EncodeTape& tape, const Mat& d_ty, const Mat& d_st,
                    DenoiserParams& grad) {
    Mat d_sh = Mat::Zero(tape.out.h_sh.rows(), tape.out.h_sh.cols());
    if (d_ty.size() > 0) d_sh += encoder_backward(params.enc_type, tape.type, d_ty, params.config, grad.enc_type);
    if (d_st.size() > 0)
        d_sh += encoder_backward(params.enc_struct, tape.structure, d_st, params.config, grad.enc_struct);
    return encoder_backward(params.enc_shared, tape.shared, d_sh, params.config, grad.enc_shared);
}

Mat type_logits(const Mat& h_ty, const Mat& emb_event) {
    if (h_ty.cols() != emb_event.cols()) throw ConfigError("type_logits: width mismatch");
    return h_ty * emb_event.transpose();
}

double edge_score(const Eigen::Ref<const Eigen::RowVectorXd>& h_i, const Eigen::Ref<const Eigen::RowVectorXd>& h_j,
                  const EdgeMlp& mlp) {
    const Eigen::Index d = h_i.size();
    Eigen::RowVectorXd pre = h_i * mlp.W1.leftCols(d).transpose() + h_j * mlp.W1.rightCols(d).transpose() + mlp.b1;
    double z = mlp.b2(0, 0);
    for (Eigen::Index k = 0; k < pre.size(); ++k) z += mlp.w2(0, k) * activate(Activation::elu, pre(k));
    return sigmoid(z);
}

Mat edge_forward(const Mat& h_st, const EdgeMlp& mlp, EdgeTape& tape) {
    const Eigen::Index m = h_st.rows();
    const Eigen::Index d = h_st.cols();
    tape.h = h_st;
    Mat left = h_st * mlp.W1.leftCols(d).transpose();
    Mat right = h_st * mlp.W1.rightCols(d).transpose();
    const Eigen::Index pairs = m * (m - 1) / 2;
    tape.pre.resize(pairs, mlp.W1.rows());
    Eigen::Index p = 0;
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i + 1; j < m; ++j, ++p) tape.pre.row(p) = left.row(i) + right.row(j) + mlp.b1;
    Mat hidden = activate(Activation::elu, tape.pre);
    Vec z = hidden * mlp.w2.transpose();
    tape.scores = Mat::Zero(m, m);
    p = 0;
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i + 1; j < m; ++j, ++p) tape.scores(i, j) = sigmoid(z(p) + mlp.b2(0, 0));
    return tape.scores;
}

Mat edge_backward(const EdgeMlp& mlp, const EdgeTape& tape, const Mat& d_scores, EdgeMlp& grad) {
    const Eigen::Index m = tape.h.rows();
    const Eigen::Index d = tape.h.cols();
    const Eigen::Index pairs = tape.pre.rows();
    Vec d_z(pairs);
    Eigen::Index p = 0;
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i + 1; j < m; ++j, ++p) {
            double s = tape.scores(i, j);
            d_z(p) = d_scores(i, j) * s * (1.0 - s);
        }
    Mat hidden = activate(Activation::elu, tape.pre);
    grad.w2 += (hidden.transpose() * d_z).transpose();
    grad.b2(0, 0) += d_z.sum();
    Mat d_pre = d_z * mlp.w2;
    for (Eigen::Index k = 0; k < d_pre.size(); ++k) d_pre.data()[k] *= elu_grad(tape.pre.data()[k]);
    grad.b1 += d_pre.colwise().sum();

    Mat d_left = Mat::Zero(m, d_pre.cols());
    Mat d_right = Mat::Zero(m, d_pre.cols());
    p = 0;
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i + 1; j < m; ++j, ++p) {
            d_left.row(i) += d_pre.row(p);
            d_right.row(j) += d_pre.row(p);
        }
    grad.W1.leftCols(d) += d_left.transpose() * tape.h;
    grad.W1.rightCols(d) += d_right.transpose() * tape.h;
    return d_left * mlp.W1.leftCols(d) + d_right * mlp.W1.rightCols(d);
}

Mat edge_scores(const Mat& h_st, const EdgeMlp& mlp) {
    EdgeTape tape;
    return edge_forward(h_st, mlp, tape);
}

}  // namespace degm
