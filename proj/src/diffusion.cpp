#include "degm/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace degm {

double NoiseSchedule::alpha_bar_at(int t) const {
    if (t < 1 || t > T) throw ConfigError("diffusion step " + std::to_string(t) + " outside [1, " + std::to_string(T) + "]");
    return alpha_bar[static_cast<std::size_t>(t - 1)];
}

NoiseSchedule build_schedule(int T) {
    if (T < 2) throw ConfigError("build_schedule: T must be >= 2");
    NoiseSchedule s;
    s.T = T;
    s.alpha_bar.resize(static_cast<std::size_t>(T));
    for (int k = 0; k < T; ++k) {
        double v = 1.0 - std::sqrt(static_cast<double>(k + 1) / T);
        s.alpha_bar[static_cast<std::size_t>(k)] = std::clamp(v, 0.0, 1.0);
    }
    s.beta_0 = 1.0 - s.alpha_bar.front();
    return s;
}

Mat embed_sequence(std::span<const TypeId> sequence, const Mat& emb_table) {
    Mat out(static_cast<Eigen::Index>(sequence.size()), emb_table.cols());
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        TypeId t = sequence[i];
        if (t < 0 || t >= emb_table.rows())
            throw ConfigError("embed_sequence: type index " + std::to_string(t) + " out of range");
        out.row(static_cast<Eigen::Index>(i)) = emb_table.row(t);
    }
    return out;
}

Mat perturb_embedding(const Mat& e, double beta_0, const Mat& noise) {
    if (beta_0 < 0) throw ConfigError("sample_x0: beta_0 must be non-negative");
    if (noise.rows() != e.rows() || noise.cols() != e.cols()) throw ConfigError("sample_x0: shape mismatch");
    return e + std::sqrt(beta_0) * noise;
}

Mat sample_x0(const Mat& e, double beta_0, std::uint64_t seed) {
    return perturb_embedding(e, beta_0, gaussian_matrix(e.rows(), e.cols(), seed));
}

Mat noise_to_step(const Mat& x0, int t, const NoiseSchedule& schedule, const Mat& noise) {
    const double ab = schedule.alpha_bar_at(t);
    if (noise.rows() != x0.rows() || noise.cols() != x0.cols()) throw ConfigError("sample_xt: shape mismatch");
    return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * noise;
}

Mat sample_xt(const Mat& x0, int t, const NoiseSchedule& schedule, std::uint64_t seed) {
    return noise_to_step(x0, t, schedule, gaussian_matrix(x0.rows(), x0.cols(), seed));
}

Mat assemble_latent(const Mat& xt, const Mat& pos_table, const Mat& step_table, int t) {
    if (pos_table.rows() != xt.rows() || pos_table.cols() != xt.cols() || step_table.cols() != xt.cols())
        throw ConfigError("assemble_latent: shape mismatch");
    if (t < 1 || t > step_table.rows()) throw ConfigError("assemble_latent: step out of range");
    Mat out = xt + pos_table;
    out.rowwise() += step_table.row(t - 1);
    return out;
}

}  // namespace degm
