#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fgc {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

enum class Geometry { Line, Grid };

// BS/user topology with the radius-rule connectivity and its set views.
struct NetworkInstance {
    int num_bs = 0;    // M
    int num_users = 0; // K
    std::vector<Point> bs_positions;
    std::vector<Point> user_positions;
    double cell_radius = 0.0;
    double bs_spacing = 0.0;
    Geometry geometry = Geometry::Line;
    std::vector<std::vector<uint8_t>> connectivity; // K x M, l_km
    std::vector<std::vector<int>> coverage_sets;    // per BS: users  (U_m)
    std::vector<std::vector<int>> serving_sets;     // per user: BSs  (A_k)
    uint64_t seed = 0;
};

struct ChannelParams {
    double bandwidth_hz = 5e6;
    double slot_seconds = 0.02;
    double pathloss_exponent = 3.5;
    double edge_snr_linear = 1.0; // 0 dB at the cell edge
    int mc_samples = 10000;
    uint64_t mc_seed = 0;

    void validate() const;
};

// Per-user file preferences plus the supports used by the solvers.
struct DemandModel {
    int num_files = 0; // N
    double file_bits = 1e8;
    std::vector<std::vector<double>> preferences; // K x N, p_nk
    std::vector<double> zipf_gammas;              // per user
    std::vector<std::vector<int>> permutations;   // per user: file -> rank (1-based)
    double backhaul_delay_s = 40.0;               // scalar D_nk
    std::vector<std::vector<double>> backhaul_matrix; // optional K x N override
    std::vector<std::vector<int>> support_sets;   // per user: files with p_nk > 0 (F_k)
    std::vector<std::vector<int>> support_index;  // per user: file -> position in F_k, -1 if absent

    double backhaul(int k, int n) const {
        return backhaul_matrix.empty() ? backhaul_delay_s : backhaul_matrix[k][n];
    }
    int num_users() const { return static_cast<int>(preferences.size()); }
};

struct PopularityAggregates {
    std::vector<double> global;             // p~_n
    std::vector<std::vector<double>> local; // M x N, p~_n^(m)
    std::vector<int> empty_cells;           // BSs with no covered user (uniform row)
};

NetworkInstance build_grid_topology(int num_bs, int num_users, double cell_radius,
                                    double bs_spacing, uint64_t seed,
                                    Geometry geometry = Geometry::Line);

// Seeded per-user permutation + Zipf weights over ranks; rows sum to 1.
DemandModel zipf_preferences(int num_files, const std::vector<double>& gammas, uint64_t seed);

PopularityAggregates aggregate_popularity(const DemandModel& demand, const NetworkInstance& net);

// .fgi text serialization (versioned, lossless round trip)
void save_instance(const std::string& path, const NetworkInstance& net, const DemandModel& demand);
std::pair<NetworkInstance, DemandModel> load_instance(const std::string& path);

}  // namespace fgc
