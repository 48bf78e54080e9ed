#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "maee/rng.hpp"

namespace maee {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline double dbm_to_watt(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Scenario constants of the downlink. All values in linear SI units;
/// dBm/dB conversion happens at config parse time.
struct Scenario {
    double wavelength = 0.06;         // m
    double array_length = 6 * 0.06;   // A, m
    int num_antennas = 6;             // N
    int num_users = 2;                // K
    int num_paths = 10;               // L_p per user
    double pathloss_exponent = 2.8;   // alpha
    double ref_pathloss = 1e-4;       // rho, linear gain at 1 m (-40 dB)
    double user_distance_min = 20.0;  // m
    double user_distance_max = 100.0; // m
    double noise_power = 1e-11;       // sigma^2, W (-80 dBm)
    double p_max = 1.0;               // W (30 dBm)
    double p_static = 1.0;            // P_s, W (30 dBm)
    double coherence_time = 0.25;     // T, s
    double d_min = 0.03;              // minimum inter-antenna spacing, m
    double d_th = 0.03;               // collision threshold, >= d_min
};

inline void validate(const Scenario& s) {
    if (s.num_users < 1 || s.num_paths < 1 || s.num_antennas < 1)
        throw std::invalid_argument("Scenario: N, K, L_p must all be >= 1");
    if (s.num_antennas * s.d_min > s.array_length + 1e-12)
        throw std::invalid_argument("Scenario: N * D_min exceeds the array length");
    if (s.d_th < s.d_min)
        throw std::invalid_argument("Scenario: D_th must be >= D_min");
    for (double x : {s.wavelength, s.array_length, s.ref_pathloss, s.noise_power,
                     s.p_max, s.p_static, s.coherence_time, s.d_min,
                     s.user_distance_min, s.user_distance_max})
        if (!(x > 0.0)) throw std::invalid_argument("Scenario: lengths/powers/times must be > 0");
}

/// Uniform grid of candidate antenna positions {0, d_s, ..., (M-1) d_s}.
struct CandidateGrid {
    double spacing = 0.0;
    int count = 0;

    [[nodiscard]] double position(int m) const { return m * spacing; }
    [[nodiscard]] std::vector<double> positions() const {
        std::vector<double> p(count);
        for (int m = 0; m < count; ++m) p[m] = position(m);
        return p;
    }
    [[nodiscard]] int nearest_index(double x) const {
        int m = static_cast<int>(std::lround(x / spacing));
        return std::clamp(m, 0, count - 1);
    }
};

inline CandidateGrid candidate_grid(const Scenario& s, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("candidate_grid: step must be > 0");
    const int m = static_cast<int>(std::floor(s.array_length / step));
    if (m < 1) throw std::invalid_argument("candidate_grid: array shorter than one step");
    return CandidateGrid{step, m};
}

/// One user's multipath description: per-path complex gains and departure
/// angles, plus the BS-user distance.
struct UserPaths {
    std::vector<Complex> gains;   // g_{k,l}
    std::vector<double> angles;   // theta_{k,l}, [-pi/2, pi/2]
    double distance = 0.0;        // d_k, m
};

struct ChannelRealization {
    std::vector<UserPaths> users;
    std::uint64_t seed = 0;
};

/// Draws one field-response channel realization. Deterministic given seed.
inline ChannelRealization sample_channel(const Scenario& s, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> dist_d(s.user_distance_min, s.user_distance_max);
    std::uniform_real_distribution<double> dist_theta(-M_PI / 2, M_PI / 2);
    std::normal_distribution<double> gauss(0.0, 1.0);

    ChannelRealization real;
    real.seed = seed;
    real.users.resize(s.num_users);
    for (auto& u : real.users) {
        u.distance = dist_d(rng);
        const double var = s.ref_pathloss * std::pow(u.distance, -s.pathloss_exponent)
                         / static_cast<double>(s.num_paths);
        const double sd = std::sqrt(var / 2.0); // per real/imag component
        u.gains.resize(s.num_paths);
        u.angles.resize(s.num_paths);
        for (int l = 0; l < s.num_paths; ++l) {
            u.angles[l] = dist_theta(rng);
            u.gains[l] = Complex(sd * gauss(rng), sd * gauss(rng));
        }
    }
    return real;
}

/// Channel coefficient of user k at a single antenna coordinate x:
/// h_k(x) = sum_l g_{k,l} exp(j 2 pi x sin(theta_{k,l}) / lambda).
inline Complex channel_entry(const Scenario& s, const ChannelRealization& real, int user, double x) {
    const auto& u = real.users.at(static_cast<std::size_t>(user));
    Complex h(0.0, 0.0);
    const double k0 = 2.0 * M_PI / s.wavelength;
    for (std::size_t l = 0; l < u.gains.size(); ++l)
        h += u.gains[l] * std::polar(1.0, k0 * x * std::sin(u.angles[l]));
    return h;
}

/// Channel vector h_k(x) over a set of antenna positions.
inline CVector channel_vector(const Scenario& s, const ChannelRealization& real,
                              const std::vector<double>& positions, int user) {
    for (double x : positions)
        if (x < -1e-12 || x > s.array_length + 1e-12)
            throw std::invalid_argument("channel_vector: position outside [0, A]");
    CVector h(static_cast<Eigen::Index>(positions.size()));
    for (std::size_t n = 0; n < positions.size(); ++n)
        h(static_cast<Eigen::Index>(n)) = channel_entry(s, real, user, positions[n]);
    return h;
}

/// N x K channel matrix, column k = h_k(positions).
inline CMatrix channel_matrix(const Scenario& s, const ChannelRealization& real,
                              const std::vector<double>& positions) {
    CMatrix h(static_cast<Eigen::Index>(positions.size()), s.num_users);
    for (int k = 0; k < s.num_users; ++k)
        h.col(k) = channel_vector(s, real, positions, k);
    return h;
}

/// Initial CPV: antennas centered on the grid with half-wavelength spacing,
/// snapped to grid points (spacing rounded up so D_min is respected).
inline std::vector<double> initial_cpv(const Scenario& s, const CandidateGrid& grid) {
    const int n = s.num_antennas;
    const int gap = std::max(1, static_cast<int>(std::ceil(s.d_min / grid.spacing - 1e-9)));
    const int span = (n - 1) * gap;
    if (span >= grid.count)
        throw std::invalid_argument("initial_cpv: antennas do not fit on the grid");
    const int first = (grid.count - 1 - span) / 2;
    std::vector<double> cpv(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) cpv[static_cast<std::size_t>(i)] = grid.position(first + i * gap);
    return cpv;
}

} // namespace maee
