#include "degm/generation.hpp"

#include <algorithm>
#include <limits>
#include <thread>

namespace degm {

void GenerationConfig::validate() const {
    if (num_candidates < 1) throw ConfigError("generation: num_candidates must be >= 1");
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("generation: tau must lie in (0, 1)");
    if (threads < 1) throw ConfigError("generation: threads must be >= 1");
}

RefinedState refine_from_noise(const DenoiserParams& params, const NoiseSchedule& schedule, RefineSource source,
                               std::uint64_t seed, GenerationTrace* trace) {
    const ModelConfig& cfg = params.config;
    if (schedule.T != cfg.T) throw ConfigError("generation: schedule T disagrees with the model");
    GenerationTrace local;
    GenerationTrace& tr = trace ? *trace : local;

    Mat latent = gaussian_matrix(cfg.m, cfg.d, seed);
    Mat h_sh;
    Mat h_st;
    for (int t = schedule.T; t >= 1; --t) {
        h_sh = run_encoder(params.enc_shared, assemble_latent(latent, params.pos_table, params.step_table, t), cfg);
        ++tr.shared_calls;
        if (source == RefineSource::type_representation) {
            latent = run_encoder(params.enc_type, h_sh, cfg);
            ++tr.type_calls;
        } else {
            h_st = run_encoder(params.enc_struct, h_sh, cfg);
            ++tr.struct_calls;
            latent = h_st;
        }
    }
    RefinedState out;
    if (source == RefineSource::type_representation) {
        out.h_ty = std::move(latent);
        out.h_st = run_encoder(params.enc_struct, h_sh, cfg);
        ++tr.struct_calls;
    } else {
        out.h_ty = run_encoder(params.enc_type, h_sh, cfg);
        ++tr.type_calls;
        out.h_st = std::move(h_st);
    }
    return out;
}

std::vector<TypeId> round_to_types(const Mat& h_ty, const Mat& emb_event) {
    std::vector<TypeId> out(static_cast<std::size_t>(h_ty.rows()));
    for (Eigen::Index i = 0; i < h_ty.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        TypeId arg = 0;
        for (Eigen::Index k = 0; k < emb_event.rows(); ++k) {
            double dist = (h_ty.row(i) - emb_event.row(k)).squaredNorm();
            if (dist < best) {
                best = dist;
                arg = static_cast<TypeId>(k);
            }
        }
        out[static_cast<std::size_t>(i)] = arg;
    }
    return out;
}

Schema decode_schema(const std::vector<TypeId>& sequence, const Mat& scores, double tau, TypeId pad_index) {
    const int m = static_cast<int>(sequence.size());
    std::vector<int> remap(static_cast<std::size_t>(m), -1);
    Schema s;
    for (int i = 0; i < m; ++i) {
        if (sequence[static_cast<std::size_t>(i)] == pad_index) continue;
        remap[static_cast<std::size_t>(i)] = s.num_nodes();
        s.node_types.push_back(sequence[static_cast<std::size_t>(i)]);
    }
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            if (!(scores(i, j) > tau)) continue;
            int a = remap[static_cast<std::size_t>(i)];
            int b = remap[static_cast<std::size_t>(j)];
            if (a >= 0 && b >= 0) s.edges.emplace_back(a, b);
        }
    return s;
}

Schema generate_one(const DenoiserParams& params, const NoiseSchedule& schedule, const GenerationConfig& config,
                    std::uint64_t seed, GenerationTrace* trace) {
    RefinedState state = refine_from_noise(params, schedule, config.refine_source, seed, trace);
    auto sequence = round_to_types(state.h_ty, params.emb_event);
    Mat scores = edge_scores(state.h_st, params.edge_mlp);
    return decode_schema(sequence, scores, config.tau, static_cast<TypeId>(params.config.num_types - 1));
}

std::uint64_t candidate_seed(const GenerationConfig& config, int k) {
    return derive_seed(config.seed, 0x67656eULL, static_cast<std::uint64_t>(k));
}

std::vector<Schema> generate_candidates(const DenoiserParams& params, const NoiseSchedule& schedule,
                                        const GenerationConfig& config) {
    config.validate();
    std::vector<Schema> out(static_cast<std::size_t>(config.num_candidates));
    auto work = [&](int begin, int stride) {
        for (int k = begin; k < config.num_candidates; k += stride)
            out[static_cast<std::size_t>(k)] = generate_one(params, schedule, config, candidate_seed(config, k));
    };
    const int threads = std::min(config.threads, config.num_candidates);
    if (threads <= 1) {
        work(0, 1);
        return out;
    }
    std::vector<std::jthread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            try {
                work(w, threads);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    pool.clear();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

Selection select_schema(const std::vector<Schema>& candidates, const std::vector<InstanceGraph>& val_graphs) {
    if (candidates.empty()) throw DataError("select_schema: no candidates");
    if (val_graphs.empty()) throw DataError("select_schema: empty validation set");
    Selection sel;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        double score = mean_event_type_f1(candidates[k], val_graphs);
        sel.scores.push_back(score);
        if (sel.index < 0 || score > sel.score) {
            sel.index = static_cast<int>(k);
            sel.score = score;
        }
    }
    return sel;
}

}  // namespace degm
