#pragma once

#include <cstdint>
#include <vector>

#include "degm/diffusion.hpp"
#include "degm/evaluation.hpp"
#include "degm/network.hpp"
#include "degm/schema.hpp"

namespace degm {

enum class RefineSource { type_representation, structure_representation };

struct GenerationConfig {
    int num_candidates = 500;
    double tau = 0.8;
    std::uint64_t seed = 0;
    RefineSource refine_source = RefineSource::type_representation;
    int threads = 1;

    void validate() const;
};

// Encoder invocation counts for one generation.
struct GenerationTrace {
    int shared_calls = 0;
    int type_calls = 0;
    int struct_calls = 0;
};

// Final representations before decoding.
struct RefinedState {
    Mat h_ty;
    Mat h_st;
};

// Reverse refinement from standard normal noise over steps T..1.
RefinedState refine_from_noise(const DenoiserParams& params, const NoiseSchedule& schedule, RefineSource source,
                               std::uint64_t seed, GenerationTrace* trace = nullptr);

// Nearest emb_event row (Euclidean) for every position, PAD included.
std::vector<TypeId> round_to_types(const Mat& h_ty, const Mat& emb_event);

// Edge (i, j), i < j, where score > tau; then PAD nodes are dropped and
// survivors reindexed in order.
Schema decode_schema(const std::vector<TypeId>& sequence, const Mat& scores, double tau, TypeId pad_index);

Schema generate_one(const DenoiserParams& params, const NoiseSchedule& schedule, const GenerationConfig& config,
                    std::uint64_t seed, GenerationTrace* trace = nullptr);

// Seed of candidate k under `config`.
std::uint64_t candidate_seed(const GenerationConfig& config, int k);

std::vector<Schema> generate_candidates(const DenoiserParams& params, const NoiseSchedule& schedule,
                                        const GenerationConfig& config);

struct Selection {
    int index = -1;
    double score = 0.0;
    std::vector<double> scores;  // mean validation event-type F1 per candidate
};

// Highest mean event-type F1 over val_graphs; lowest index wins ties.
Selection select_schema(const std::vector<Schema>& candidates, const std::vector<InstanceGraph>& val_graphs);

}  // namespace degm
