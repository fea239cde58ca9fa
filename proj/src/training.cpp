#include "degm/training.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "degm/generation.hpp"

namespace degm {

namespace {

// Weighted cross-entropy of row-wise softmax(logits); weights per position.
double cross_entropy(const Mat& logits, std::span<const TypeId> targets, const std::vector<double>& weights,
                     Mat* d_logits) {
    double loss = 0;
    if (d_logits) d_logits->setZero(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double w = weights[static_cast<std::size_t>(i)];
        if (w == 0.0) continue;
        const double mx = logits.row(i).maxCoeff();
        Eigen::RowVectorXd p = (logits.row(i).array() - mx).exp();
        const double z = p.sum();
        const TypeId y = targets[static_cast<std::size_t>(i)];
        loss += w * (std::log(z) + mx - logits(i, y));
        if (d_logits) {
            d_logits->row(i) = w * p / z;
            (*d_logits)(i, y) -= w;
        }
    }
    return loss;
}

std::vector<double> position_weights(std::span<const TypeId> targets, bool mask_pad, TypeId pad) {
    std::vector<double> w(targets.size(), 0.0);
    std::size_t count = 0;
    for (TypeId t : targets)
        if (!mask_pad || t != pad) ++count;
    if (count == 0) return w;
    for (std::size_t i = 0; i < targets.size(); ++i)
        if (!mask_pad || targets[i] != pad) w[i] = 1.0 / static_cast<double>(count);
    return w;
}

double struct_loss_from_scores(const Mat& scores, const SortedGraph& g, Mat* d_scores) {
    const int m = g.length();
    const double coef = 2.0 / (static_cast<double>(m - 1) * static_cast<double>(m - 1));
    if (d_scores) d_scores->setZero(m, m);
    double loss = 0;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            const double diff = scores(i, j) - (g.edge(i, j) ? 1.0 : 0.0);
            loss += diff * diff;
            if (d_scores) (*d_scores)(i, j) = coef * 2.0 * diff;
        }
    return coef * loss;
}

void check_graph(const DenoiserParams& params, const SortedGraph& g) {
    if (g.length() != params.config.m)
        throw ConfigError("sorted graph length " + std::to_string(g.length()) + " disagrees with m=" +
                          std::to_string(params.config.m));
}

// Gradient bookkeeping shared by both objectives for one assembled latent.
void accumulate_latent_grad(const Mat& d_latent, int t, DenoiserParams& grad) {
    grad.pos_table += d_latent;
    grad.step_table.row(t - 1) += d_latent.colwise().sum();
}

void scatter_rows(const Mat& d_e, std::span<const TypeId> sequence, Mat& d_table) {
    for (std::size_t i = 0; i < sequence.size(); ++i)
        d_table.row(sequence[i]) += d_e.row(static_cast<Eigen::Index>(i));
}

}  // namespace

double loss_type(const Mat& h_ty, std::span<const TypeId> targets, const Mat& emb_event) {
    return cross_entropy(type_logits(h_ty, emb_event), targets, position_weights(targets, false, -1), nullptr);
}

double loss_struct(const Mat& h_st, const SortedGraph& graph, const EdgeMlp& mlp) {
    return struct_loss_from_scores(edge_scores(h_st, mlp), graph, nullptr);
}

E2eTerms loss_e2e_variant(const DenoiserParams& params, const Mat& x_t, int t, const Mat& x_1, const Mat& x_0,
                          const Mat& x0_round, std::span<const TypeId> targets) {
    if (t < 2) throw ConfigError("end-to-end reconstruction term needs t >= 2");
    const double m = static_cast<double>(params.config.m);
    auto f = [&](const Mat& x, int step) {
        return encode(assemble_latent(x, params.pos_table, params.step_table, step), params).h_ty;
    };
    E2eTerms terms;
    terms.reconstruction = (x_0 - f(x_t, t)).squaredNorm() / m;
    terms.anchor = (embed_sequence(targets, params.emb_event) - f(x_1, 1)).squaredNorm() / m;
    terms.rounding = loss_type(x0_round, targets, params.emb_event);
    return terms;
}

int first_step(Objective objective) { return objective == Objective::diffusion_lm_e2e ? 2 : 1; }

std::uint64_t step_noise_seed(std::uint64_t noise_seed, int t) {
    return derive_seed(noise_seed, 0x74ULL, static_cast<std::uint64_t>(t));
}

LossTerms step_loss(const DenoiserParams& params, const NoiseSchedule& schedule, const SortedGraph& graph, int t,
                    std::uint64_t noise_seed, const LossConfig& config, DenoiserParams* grad, double grad_scale) {
    check_graph(params, graph);
    if (t < first_step(config.objective) || t > schedule.T)
        throw ConfigError("step_loss: step " + std::to_string(t) + " out of range");
    const ModelConfig& cfg = params.config;
    const std::span<const TypeId> seq(graph.sequence);
    const TypeId pad = static_cast<TypeId>(cfg.num_types - 1);
    const auto weights = position_weights(seq, config.mask_pad, pad);

    Rng rng(noise_seed);
    const Mat e = embed_sequence(seq, params.emb_event);
    const Mat x0 = perturb_embedding(e, schedule.beta_0, gaussian_matrix(cfg.m, cfg.d, rng));
    const Mat xt = noise_to_step(x0, t, schedule, gaussian_matrix(cfg.m, cfg.d, rng));

    EncodeTape tape;
    const EncoderOutput& out = encode_forward(assemble_latent(xt, params.pos_table, params.step_table, t), params, tape);

    EdgeTape edge_tape;
    Mat d_scores;
    const Mat scores = edge_forward(out.h_st, params.edge_mlp, edge_tape);
    LossTerms terms;
    terms.structure = struct_loss_from_scores(scores, graph, grad ? &d_scores : nullptr);

    if (config.objective == Objective::simplified) {
        Mat d_logits;
        terms.type = cross_entropy(type_logits(out.h_ty, params.emb_event), seq, weights, grad ? &d_logits : nullptr);
        terms.total = terms.type + config.lambda_st * terms.structure;
        if (!std::isfinite(terms.total)) throw NumericError("non-finite loss at step " + std::to_string(t));
        if (!grad) return terms;

        d_logits *= grad_scale;
        d_scores *= grad_scale * config.lambda_st;
        grad->emb_event += d_logits.transpose() * out.h_ty;
        Mat d_ty = d_logits * params.emb_event;
        Mat d_st = edge_backward(params.edge_mlp, edge_tape, d_scores, grad->edge_mlp);
        Mat d_latent = encode_backward(params, tape, d_ty, d_st, *grad);
        accumulate_latent_grad(d_latent, t, *grad);
        scatter_rows(std::sqrt(schedule.alpha_bar_at(t)) * d_latent, seq, grad->emb_event);
        return terms;
    }

    // End-to-end objective; anchor and rounding terms use a second x_0 draw.
    const double m = static_cast<double>(cfg.m);
    const Mat x0b = perturb_embedding(e, schedule.beta_0, gaussian_matrix(cfg.m, cfg.d, rng));
    const Mat x1 = noise_to_step(x0b, 1, schedule, gaussian_matrix(cfg.m, cfg.d, rng));
    EncodeTape tape1;
    const EncoderOutput& out1 = encode_forward(assemble_latent(x1, params.pos_table, params.step_table, 1), params, tape1);

    const Mat r_t = out.h_ty - x0;
    const Mat r_1 = out1.h_ty - e;
    Mat d_logits;
    const double rounding =
        cross_entropy(type_logits(x0b, params.emb_event), seq, weights, grad ? &d_logits : nullptr);
    terms.type = r_t.squaredNorm() / m + r_1.squaredNorm() / m + rounding;
    terms.total = terms.type + config.lambda_st * terms.structure;
    if (!std::isfinite(terms.total)) throw NumericError("non-finite loss at step " + std::to_string(t));
    if (!grad) return terms;

    const double s = grad_scale;
    d_scores *= s * config.lambda_st;
    d_logits *= s;
    Mat d_ft = (2.0 * s / m) * r_t;
    Mat d_f1 = (2.0 * s / m) * r_1;

    Mat d_e = -d_ft - d_f1;  // x_0 target and EMB(E) anchor
    Mat d_x0b = d_logits * params.emb_event;
    grad->emb_event += d_logits.transpose() * x0b;

    Mat d_st = edge_backward(params.edge_mlp, edge_tape, d_scores, grad->edge_mlp);
    Mat d_lat_t = encode_backward(params, tape, d_ft, d_st, *grad);
    accumulate_latent_grad(d_lat_t, t, *grad);
    d_e += std::sqrt(schedule.alpha_bar_at(t)) * d_lat_t;

    Mat d_lat_1 = encode_backward(params, tape1, d_f1, Mat(), *grad);
    accumulate_latent_grad(d_lat_1, 1, *grad);
    d_x0b += std::sqrt(schedule.alpha_bar_at(1)) * d_lat_1;
    d_e += d_x0b;

    scatter_rows(d_e, seq, grad->emb_event);
    return terms;
}

LossTerms full_step_sum(const DenoiserParams& params, const NoiseSchedule& schedule, const SortedGraph& graph,
                        std::uint64_t noise_seed, const LossConfig& config, DenoiserParams* grad, double grad_scale) {
    LossTerms sum;
    for (int t = first_step(config.objective); t <= schedule.T; ++t) {
        LossTerms l = step_loss(params, schedule, graph, t, step_noise_seed(noise_seed, t), config, grad, grad_scale);
        sum.total += l.total;
        sum.type += l.type;
        sum.structure += l.structure;
    }
    return sum;
}

AdamOptimizer::AdamOptimizer(const DenoiserParams& like, double lr, double beta1, double beta2, double eps)
    : m_(DenoiserParams::zeros_like(like)), v_(DenoiserParams::zeros_like(like)), lr_(lr), beta1_(beta1),
      beta2_(beta2), eps_(eps) {}

void AdamOptimizer::step(DenoiserParams& params, const DenoiserParams& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    auto p = params.arrays();
    auto g = grad.arrays();
    auto m = m_.arrays();
    auto v = v_.arrays();
    for (std::size_t k = 0; k < p.size(); ++k) {
        Mat& mk = *m[k].second;
        Mat& vk = *v[k].second;
        const Mat& gk = *g[k].second;
        mk = beta1_ * mk + (1.0 - beta1_) * gk;
        vk = beta2_ * vk + (1.0 - beta2_) * gk.cwiseProduct(gk);
        p[k].second->array() -= lr_ * (mk.array() / c1) / ((vk.array() / c2).sqrt() + eps_);
    }
}

void TrainConfig::validate() const {
    if (!(lr >= 0.0)) throw ConfigError("train: lr must be non-negative");
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (!(lambda_st >= 0.0)) throw ConfigError("train: lambda_st must be >= 0");
    if (val_candidates < 1) throw ConfigError("train: val_candidates must be >= 1");
}

TrainReport train(const std::vector<SortedGraph>& corpus, DenoiserParams& params, const TrainConfig& config,
                  const NoiseSchedule& schedule, const std::vector<InstanceGraph>& val_graphs,
                  const EpochCallback& on_epoch) {
    config.validate();
    if (corpus.empty()) throw DataError("train: empty corpus");
    for (const auto& g : corpus) check_graph(params, g);
    if (schedule.T != params.config.T) throw ConfigError("train: schedule T disagrees with the model");

    const LossConfig loss_cfg{config.lambda_st, config.objective, config.mask_pad};
    const int t_min = first_step(config.objective);
    const int t_count = schedule.T - t_min + 1;

    AdamOptimizer adam(params, config.lr);
    DenoiserParams grad = DenoiserParams::zeros_like(params);
    Rng order_rng(derive_seed(config.seed, 0x6f72ULL));
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), 0);

    GenerationConfig val_gen;
    val_gen.num_candidates = config.val_candidates;
    val_gen.tau = config.tau;
    val_gen.seed = derive_seed(config.seed, 0x76616cULL);

    TrainReport report;
    report.best_params = params;
    std::vector<LossTerms> per_graph(corpus.size());

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), order_rng);
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            const double scale = 1.0 / static_cast<double>(end - start);
            grad.set_zero();
            for (std::size_t b = start; b < end; ++b) {
                const std::size_t gi = order[b];
                LossTerms l;
                if (config.full_t_sum) {
                    const std::uint64_t key = derive_seed(config.seed, 0x66ULL, gi);
                    l = full_step_sum(params, schedule, corpus[gi], key, loss_cfg, &grad, scale / t_count);
                    l.total /= t_count;
                    l.type /= t_count;
                    l.structure /= t_count;
                } else {
                    Rng step_rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch), gi));
                    const int t = std::uniform_int_distribution<int>(t_min, schedule.T)(step_rng);
                    l = step_loss(params, schedule, corpus[gi], t, step_rng(), loss_cfg, &grad, scale);
                }
                if (!std::isfinite(l.total))
                    throw NumericError("non-finite loss in epoch " + std::to_string(epoch) + " on graph " +
                                       std::to_string(gi));
                per_graph[gi] = l;
            }
            adam.step(params, grad);
            if (!params.all_finite())
                throw NumericError("non-finite parameters after update in epoch " + std::to_string(epoch));
        }

        EpochRecord rec;
        rec.epoch = epoch;
        for (const auto& l : per_graph) {
            rec.total += l.total;
            rec.type += l.type;
            rec.structure += l.structure;
        }
        const double n = static_cast<double>(corpus.size());
        rec.total /= n;
        rec.type /= n;
        rec.structure /= n;

        if (!val_graphs.empty()) {
            auto candidates = generate_candidates(params, schedule, val_gen);
            rec.val_event_type_f1 = select_schema(candidates, val_graphs).score;
            if (!report.best_val_f1 || *rec.val_event_type_f1 > *report.best_val_f1) {
                report.best_val_f1 = rec.val_event_type_f1;
                report.best_epoch = epoch;
                report.best_params = params;
            }
        } else {
            report.best_epoch = epoch;
        }
        if (config.verbose) {
            std::cerr << "epoch " << epoch << " loss " << rec.total << " type " << rec.type << " struct "
                      << rec.structure;
            if (rec.val_event_type_f1) std::cerr << " val_f1 " << *rec.val_event_type_f1;
            std::cerr << '\n';
        }
        report.epochs.push_back(rec);
        if (on_epoch) on_epoch(rec, params);
    }
    if (val_graphs.empty()) report.best_params = params;
    return report;
}

}  // namespace degm
