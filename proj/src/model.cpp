#include "fgc/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fgc/errors.hpp"
#include "fgc/rng.hpp"

namespace fgc {

namespace {

void derive_views(NetworkInstance& net) {
    net.coverage_sets.assign(net.num_bs, {});
    net.serving_sets.assign(net.num_users, {});
    for (int k = 0; k < net.num_users; ++k) {
        for (int m = 0; m < net.num_bs; ++m) {
            if (net.connectivity[k][m]) {
                net.coverage_sets[m].push_back(k);
                net.serving_sets[k].push_back(m);
            }
        }
    }
}

double dist(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace

void ChannelParams::validate() const {
    if (!(bandwidth_hz > 0)) throw ConfigError("channel: bandwidth must be > 0");
    if (!(slot_seconds > 0)) throw ConfigError("channel: slot length must be > 0");
    if (!(pathloss_exponent > 2)) throw ConfigError("channel: path-loss exponent must be > 2");
    if (!(edge_snr_linear > 0)) throw ConfigError("channel: edge SNR must be > 0");
    if (mc_samples < 1) throw ConfigError("channel: mc_samples must be >= 1");
}

NetworkInstance build_grid_topology(int num_bs, int num_users, double cell_radius,
                                    double bs_spacing, uint64_t seed, Geometry geometry) {
    if (num_bs < 1 || num_users < 1)
        throw ConfigError("topology: need at least one BS and one user");
    if (!(cell_radius > 0)) throw ConfigError("topology: cell radius must be > 0");
    if (!(cell_radius > bs_spacing / 2))
        throw ConfigError("topology: cell radius must exceed half the BS spacing");

    NetworkInstance net;
    net.num_bs = num_bs;
    net.num_users = num_users;
    net.cell_radius = cell_radius;
    net.bs_spacing = bs_spacing;
    net.geometry = geometry;
    net.seed = seed;

    net.bs_positions.resize(num_bs);
    if (geometry == Geometry::Line) {
        for (int m = 0; m < num_bs; ++m) net.bs_positions[m] = {m * bs_spacing, 0.0};
    } else {
        int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(num_bs))));
        for (int m = 0; m < num_bs; ++m)
            net.bs_positions[m] = {(m % cols) * bs_spacing, (m / cols) * bs_spacing};
    }

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& p : net.bs_positions) {
        xmin = std::min(xmin, p.x - cell_radius);
        xmax = std::max(xmax, p.x + cell_radius);
        ymin = std::min(ymin, p.y - cell_radius);
        ymax = std::max(ymax, p.y + cell_radius);
    }

    // users uniform i.i.d. in the union of cells, by rejection from the bounding box
    Rng rng = Rng::substream(seed, 0x75736572);
    net.user_positions.resize(num_users);
    constexpr int kMaxTries = 100000;
    for (int k = 0; k < num_users; ++k) {
        bool placed = false;
        for (int tries = 0; tries < kMaxTries; ++tries) {
            Point p{rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)};
            bool covered = false;
            for (const auto& b : net.bs_positions) {
                if (dist(p, b) <= cell_radius) {
                    covered = true;
                    break;
                }
            }
            if (covered) {
                net.user_positions[k] = p;
                placed = true;
                break;
            }
        }
        if (!placed) throw ConfigError("topology: rejection sampling failed to cover a user");
    }

    net.connectivity.assign(num_users, std::vector<uint8_t>(num_bs, 0));
    for (int k = 0; k < num_users; ++k)
        for (int m = 0; m < num_bs; ++m)
            net.connectivity[k][m] =
                dist(net.user_positions[k], net.bs_positions[m]) <= cell_radius ? 1 : 0;
    derive_views(net);
    return net;
}

DemandModel zipf_preferences(int num_files, const std::vector<double>& gammas, uint64_t seed) {
    if (num_files < 1) throw ConfigError("demand: need at least one file");
    for (double g : gammas)
        if (!(g >= 0)) throw ConfigError("demand: Zipf parameters must be >= 0");

    const int K = static_cast<int>(gammas.size());
    DemandModel d;
    d.num_files = num_files;
    d.zipf_gammas = gammas;
    d.preferences.assign(K, std::vector<double>(num_files, 0.0));
    d.permutations.assign(K, {});
    d.support_sets.assign(K, {});
    d.support_index.assign(K, std::vector<int>(num_files, -1));

    for (int k = 0; k < K; ++k) {
        Rng rng = Rng::substream(seed, 0x7a697066ULL * 2654435761ULL + static_cast<uint64_t>(k));
        std::vector<int> rank_to_file(num_files);
        for (int n = 0; n < num_files; ++n) rank_to_file[n] = n;
        rng.shuffle(rank_to_file);
        d.permutations[k].assign(num_files, 0);
        for (int r = 0; r < num_files; ++r) d.permutations[k][rank_to_file[r]] = r + 1;

        double norm = 0.0;
        for (int n = 1; n <= num_files; ++n) norm += std::pow(n, -gammas[k]);
        for (int n = 0; n < num_files; ++n)
            d.preferences[k][n] = std::pow(d.permutations[k][n], -gammas[k]) / norm;

        for (int n = 0; n < num_files; ++n) {
            if (d.preferences[k][n] > 0) {
                d.support_index[k][n] = static_cast<int>(d.support_sets[k].size());
                d.support_sets[k].push_back(n);
            }
        }
    }
    return d;
}

PopularityAggregates aggregate_popularity(const DemandModel& demand, const NetworkInstance& net) {
    const int K = demand.num_users();
    const int N = demand.num_files;
    PopularityAggregates agg;
    agg.global.assign(N, 0.0);
    for (int k = 0; k < K; ++k)
        for (int n = 0; n < N; ++n) agg.global[n] += demand.preferences[k][n];
    for (double& v : agg.global) v /= K;

    agg.local.assign(net.num_bs, std::vector<double>(N, 0.0));
    for (int m = 0; m < net.num_bs; ++m) {
        const auto& users = net.coverage_sets[m];
        if (users.empty()) {
            agg.empty_cells.push_back(m);
            for (int n = 0; n < N; ++n) agg.local[m][n] = 1.0 / N;
            continue;
        }
        for (int k : users)
            for (int n = 0; n < N; ++n) agg.local[m][n] += demand.preferences[k][n];
        for (int n = 0; n < N; ++n) agg.local[m][n] /= users.size();
    }
    return agg;
}

namespace {

constexpr int kFgiVersion = 1;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct LineReader {
    std::istream& in;
    std::string path;
    int lineno = 0;

    std::string next() {
        std::string line;
        if (!std::getline(in, line))
            throw ParseError(path + ": truncated file at line " + std::to_string(lineno + 1));
        ++lineno;
        return line;
    }
    std::istringstream tokens(const std::string& key) {
        std::string line = next();
        std::istringstream ss(line);
        std::string head;
        ss >> head;
        if (head != key)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected '" + key +
                             "', got '" + head + "'");
        return ss;
    }
};

}  // namespace

void save_instance(const std::string& path, const NetworkInstance& net, const DemandModel& demand) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << "fgi " << kFgiVersion << "\n";
    out << "seed " << net.seed << "\n";
    out << "M " << net.num_bs << "\n";
    out << "K " << net.num_users << "\n";
    out << "cell_radius " << fmt(net.cell_radius) << "\n";
    out << "bs_spacing " << fmt(net.bs_spacing) << "\n";
    out << "geometry " << (net.geometry == Geometry::Line ? "line" : "grid") << "\n";
    out << "bs_positions";
    for (const auto& p : net.bs_positions) out << " " << fmt(p.x) << " " << fmt(p.y);
    out << "\n";
    out << "user_positions";
    for (const auto& p : net.user_positions) out << " " << fmt(p.x) << " " << fmt(p.y);
    out << "\n";
    out << "connectivity";
    for (const auto& row : net.connectivity)
        for (uint8_t v : row) out << " " << int(v);
    out << "\n";
    out << "N " << demand.num_files << "\n";
    out << "file_bits " << fmt(demand.file_bits) << "\n";
    out << "gammas";
    for (double g : demand.zipf_gammas) out << " " << fmt(g);
    out << "\n";
    out << "permutations";
    for (const auto& row : demand.permutations)
        for (int v : row) out << " " << v;
    out << "\n";
    out << "preferences";
    for (const auto& row : demand.preferences)
        for (double v : row) out << " " << fmt(v);
    out << "\n";
    out << "backhaul_scalar " << fmt(demand.backhaul_delay_s) << "\n";
    out << "backhaul_matrix " << (demand.backhaul_matrix.empty() ? 0 : 1);
    for (const auto& row : demand.backhaul_matrix)
        for (double v : row) out << " " << fmt(v);
    out << "\n";
    if (!out) throw ConfigError("write failed: " + path);
}

std::pair<NetworkInstance, DemandModel> load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open: " + path);
    LineReader r{in, path};

    {
        auto ss = r.tokens("fgi");
        int version = -1;
        ss >> version;
        if (version != kFgiVersion)
            throw ParseError(path + ": instance file version " + std::to_string(version) +
                             " not supported by reader version " + std::to_string(kFgiVersion));
    }

    NetworkInstance net;
    DemandModel demand;
    r.tokens("seed") >> net.seed;
    r.tokens("M") >> net.num_bs;
    r.tokens("K") >> net.num_users;
    r.tokens("cell_radius") >> net.cell_radius;
    r.tokens("bs_spacing") >> net.bs_spacing;
    {
        std::string g;
        r.tokens("geometry") >> g;
        if (g == "line")
            net.geometry = Geometry::Line;
        else if (g == "grid")
            net.geometry = Geometry::Grid;
        else
            throw ParseError(path + ": unknown geometry '" + g + "'");
    }
    if (net.num_bs < 1 || net.num_users < 1) throw ParseError(path + ": bad dimensions");

    auto read_points = [&](const char* key, int count) {
        auto ss = r.tokens(key);
        std::vector<Point> pts(count);
        for (auto& p : pts)
            if (!(ss >> p.x >> p.y)) throw ParseError(path + ": short " + key);
        return pts;
    };
    net.bs_positions = read_points("bs_positions", net.num_bs);
    net.user_positions = read_points("user_positions", net.num_users);
    {
        auto ss = r.tokens("connectivity");
        net.connectivity.assign(net.num_users, std::vector<uint8_t>(net.num_bs, 0));
        for (auto& row : net.connectivity)
            for (auto& v : row) {
                int b;
                if (!(ss >> b)) throw ParseError(path + ": short connectivity");
                v = b ? 1 : 0;
            }
    }
    derive_views(net);

    r.tokens("N") >> demand.num_files;
    if (demand.num_files < 1) throw ParseError(path + ": bad file count");
    r.tokens("file_bits") >> demand.file_bits;
    {
        auto ss = r.tokens("gammas");
        demand.zipf_gammas.assign(net.num_users, 0.0);
        for (auto& g : demand.zipf_gammas)
            if (!(ss >> g)) throw ParseError(path + ": short gammas");
    }
    {
        auto ss = r.tokens("permutations");
        demand.permutations.assign(net.num_users, std::vector<int>(demand.num_files, 0));
        for (auto& row : demand.permutations)
            for (auto& v : row)
                if (!(ss >> v)) throw ParseError(path + ": short permutations");
    }
    {
        auto ss = r.tokens("preferences");
        demand.preferences.assign(net.num_users, std::vector<double>(demand.num_files, 0.0));
        for (auto& row : demand.preferences)
            for (auto& v : row)
                if (!(ss >> v)) throw ParseError(path + ": short preferences");
    }
    r.tokens("backhaul_scalar") >> demand.backhaul_delay_s;
    {
        auto ss = r.tokens("backhaul_matrix");
        int has = 0;
        ss >> has;
        if (has) {
            demand.backhaul_matrix.assign(net.num_users,
                                          std::vector<double>(demand.num_files, 0.0));
            for (auto& row : demand.backhaul_matrix)
                for (auto& v : row)
                    if (!(ss >> v)) throw ParseError(path + ": short backhaul matrix");
        }
    }

    demand.support_sets.assign(net.num_users, {});
    demand.support_index.assign(net.num_users, std::vector<int>(demand.num_files, -1));
    for (int k = 0; k < net.num_users; ++k)
        for (int n = 0; n < demand.num_files; ++n)
            if (demand.preferences[k][n] > 0) {
                demand.support_index[k][n] = static_cast<int>(demand.support_sets[k].size());
                demand.support_sets[k].push_back(n);
            }
    return {std::move(net), std::move(demand)};
}

}  // namespace fgc
