#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "degm/common.hpp"

namespace degm {

// Square-root schedule: alpha_bar[k] = clamp(1 - sqrt((k+1)/T), 0, 1) for
// k = 0..T-1. Step t in {1..T} reads alpha_bar[t-1].
struct NoiseSchedule {
    int T = 0;
    std::vector<double> alpha_bar;
    double beta_0 = 0.0;  // variance of q(x_0 | e); tied to 1 - alpha_bar[0]

    double alpha_bar_at(int t) const;  // 1-based step
};

NoiseSchedule build_schedule(int T);

// Row i is emb_table row sequence[i].
Mat embed_sequence(std::span<const TypeId> sequence, const Mat& emb_table);

// e + sqrt(beta_0) * noise
Mat perturb_embedding(const Mat& e, double beta_0, const Mat& noise);
Mat sample_x0(const Mat& e, double beta_0, std::uint64_t seed);

// sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * noise
Mat noise_to_step(const Mat& x0, int t, const NoiseSchedule& schedule, const Mat& noise);
Mat sample_xt(const Mat& x0, int t, const NoiseSchedule& schedule, std::uint64_t seed);

// x_t + position table + step embedding of step t (row t-1 of step_table).
Mat assemble_latent(const Mat& xt, const Mat& pos_table, const Mat& step_table, int t);

}  // namespace degm
