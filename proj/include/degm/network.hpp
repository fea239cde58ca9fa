#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "degm/common.hpp"

namespace degm {

enum class Activation { elu, identity };

struct ModelConfig {
    int d = 256;          // representation size
    int layers = 4;       // attention layers per encoder
    int m = 50;           // padded sequence length
    int num_types = 68;   // M, including PAD
    int T = 100;          // diffusion steps
    bool residual = false;
    Activation activation = Activation::elu;

    void validate() const;
    bool operator==(const ModelConfig&) const = default;
};

inline constexpr double kLeakySlope = 0.2;

struct AttentionLayer {
    Mat W;  // d x d
    Mat a;  // 1 x 2d; left half scores the query node, right half the key node
};

using Encoder = std::vector<AttentionLayer>;

// concat(h_i, h_j) -> d (ELU) -> 1 (sigmoid)
struct EdgeMlp {
    Mat W1;  // d x 2d
    Mat b1;  // 1 x d
    Mat w2;  // 1 x d
    Mat b2;  // 1 x 1
};

struct DenoiserParams {
    ModelConfig config;
    Mat emb_event;   // M x d, shared by input embedding and type logits
    Mat pos_table;   // m x d
    Mat step_table;  // T x d
    Encoder enc_shared, enc_type, enc_struct;
    EdgeMlp edge_mlp;

    // Uniform(+-1/sqrt(fan_in)) for dense weights; N(0, 1/d) for tables.
    static DenoiserParams initialize(const ModelConfig& config, std::uint64_t seed);
    static DenoiserParams zeros_like(const DenoiserParams& other);

    // Stable, named view of every learnable array ("enc_shared.0.W", ...).
    std::vector<std::pair<std::string, Mat*>> arrays();
    std::vector<std::pair<std::string, const Mat*>> arrays() const;

    void set_zero();
    void add_scaled(const DenoiserParams& other, double scale);
    bool all_finite() const;
    std::size_t num_parameters() const;
};

struct EncoderOutput {
    Mat h_sh, h_ty, h_st;
};

double leaky_relu(double x);
double activate(Activation act, double x);

// Row-stochastic attention matrix of one layer for input h.
Mat attention_weights(const AttentionLayer& layer, const Mat& h);

// h'_i = act(sum_j alpha_ij W h_j), dense over all m positions.
Mat attention_layer(const AttentionLayer& layer, const Mat& h, Activation act = Activation::elu,
                    bool residual = false);

Mat run_encoder(const Encoder& encoder, const Mat& h, const ModelConfig& config);

EncoderOutput encode(const Mat& h_la, const DenoiserParams& params);

// logits[i][k] = <h_ty row i, emb_event row k>
Mat type_logits(const Mat& h_ty, const Mat& emb_event);

double edge_score(const Eigen::Ref<const Eigen::RowVectorXd>& h_i, const Eigen::Ref<const Eigen::RowVectorXd>& h_j,
                  const EdgeMlp& mlp);

// m x m matrix holding edge_score(i, j) for i < j and zero elsewhere.
Mat edge_scores(const Mat& h_st, const EdgeMlp& mlp);

// --- reverse-mode pieces used by the training losses ---

struct AttentionTape {
    Mat input, z, scores, alpha, agg;
};

Mat attention_forward(const AttentionLayer& layer, const Mat& h, Activation act, bool residual,
                      AttentionTape& tape);
// Accumulates parameter gradients into `grad`, returns d loss / d input.
Mat attention_backward(const AttentionLayer& layer, const AttentionTape& tape, const Mat& d_out, Activation act,
                       bool residual, AttentionLayer& grad);

struct EncodeTape {
    std::vector<AttentionTape> shared, type, structure;
    EncoderOutput out;
};

const EncoderOutput& encode_forward(const Mat& h_la, const DenoiserParams& params, EncodeTape& tape);
// Either upstream gradient may be empty (treated as zero). Returns d / d h_la.
Mat encode_backward(const DenoiserParams& params, const EncodeTape& tape, const Mat& d_ty, const Mat& d_st,
                    DenoiserParams& grad);

struct EdgeTape {
    Mat h;       // input structure representation
    Mat pre;     // one row per pair i<j, row-major pair order
    Mat scores;  // m x m
};

Mat edge_forward(const Mat& h_st, const EdgeMlp& mlp, EdgeTape& tape);
// d_scores is m x m (only i<j entries are read). Returns d / d h_st.
Mat edge_backward(const EdgeMlp& mlp, const EdgeTape& tape, const Mat& d_scores, EdgeMlp& grad);

}  // namespace degm
