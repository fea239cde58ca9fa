#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "degm/diffusion.hpp"
#include "degm/event_graphs.hpp"
#include "degm/network.hpp"

namespace degm {

enum class Objective { simplified, diffusion_lm_e2e };

struct LossConfig {
    double lambda_st = 1.0;
    Objective objective = Objective::simplified;
    bool mask_pad = false;  // exclude PAD positions from the type cross-entropy
};

struct LossTerms {
    double total = 0, type = 0, structure = 0;
};

// Mean cross-entropy of softmax(h_ty emb_event^T) against targets over all
// positions, PAD included.
double loss_type(const Mat& h_ty, std::span<const TypeId> targets, const Mat& emb_event);

// 2/(m-1)^2 * sum_{i<j} (score_ij - a_ij)^2
double loss_struct(const Mat& h_st, const SortedGraph& graph, const EdgeMlp& mlp);

// The three parts of the end-to-end objective for one draw:
//   reconstruction: ||x_0 - f(x_t, t)||^2 / m       (t >= 2)
//   anchor:         ||EMB(E) - f(x_1, 1)||^2 / m
//   rounding:       mean cross-entropy of x0_round emb_event^T against E
// where f is the shared -> type encoder path on the assembled latent.
struct E2eTerms {
    double reconstruction = 0, anchor = 0, rounding = 0;
    double sum() const { return reconstruction + anchor + rounding; }
};

E2eTerms loss_e2e_variant(const DenoiserParams& params, const Mat& x_t, int t, const Mat& x_1, const Mat& x_0,
                          const Mat& x0_round, std::span<const TypeId> targets);

// Loss of one sorted graph at diffusion step t with all noise drawn from
// noise_seed. When grad is given, gradients times grad_scale are added to it.
// The end-to-end objective requires t >= 2.
LossTerms step_loss(const DenoiserParams& params, const NoiseSchedule& schedule, const SortedGraph& graph, int t,
                    std::uint64_t noise_seed, const LossConfig& config, DenoiserParams* grad = nullptr,
                    double grad_scale = 1.0);

// Smallest step the objective samples (1 for simplified, 2 for end-to-end).
int first_step(Objective objective);

// Sum of step_loss over every step with noise keyed by (noise_seed, t).
LossTerms full_step_sum(const DenoiserParams& params, const NoiseSchedule& schedule, const SortedGraph& graph,
                        std::uint64_t noise_seed, const LossConfig& config, DenoiserParams* grad = nullptr,
                        double grad_scale = 1.0);

std::uint64_t step_noise_seed(std::uint64_t noise_seed, int t);

class AdamOptimizer {
public:
    AdamOptimizer(const DenoiserParams& like, double lr, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8);
    void step(DenoiserParams& params, const DenoiserParams& grad);
    long steps_taken() const { return t_; }

private:
    DenoiserParams m_, v_;
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
};

struct TrainConfig {
    double lr = 1e-4;
    int epochs = 100;
    int batch_size = 16;
    double lambda_st = 1.0;
    Objective objective = Objective::simplified;
    std::uint64_t seed = 0;
    // Average every step exactly instead of sampling one t per graph; noise
    // is then keyed by (graph, t) so the objective is fixed across epochs.
    bool full_t_sum = false;
    bool mask_pad = false;
    int val_candidates = 4;
    double tau = 0.8;
    bool verbose = false;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;
    double total = 0, type = 0, structure = 0;
    std::optional<double> val_event_type_f1;
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    int best_epoch = 0;
    std::optional<double> best_val_f1;
    DenoiserParams best_params;
};

using EpochCallback = std::function<void(const EpochRecord&, const DenoiserParams&)>;

// Adam over minibatches of the corpus. After each epoch, generates
// val_candidates schemas and scores the best mean event-type F1 on
// val_graphs; the best-scoring epoch's parameters are kept (earliest on
// ties, last epoch when val_graphs is empty). `params` ends at the final
// epoch's values.
TrainReport train(const std::vector<SortedGraph>& corpus, DenoiserParams& params, const TrainConfig& config,
                  const NoiseSchedule& schedule, const std::vector<InstanceGraph>& val_graphs = {},
                  const EpochCallback& on_epoch = {});

}  // namespace degm
