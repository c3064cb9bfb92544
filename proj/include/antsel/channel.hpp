#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "antsel/rng.hpp"

namespace antsel {

/// Dimensions and seed of the simulated frequency-selective MIMO channel.
struct ChannelConfig {
    int n_tx = 0;           ///< transmit antennas
    int n_rx = 0;           ///< receive antennas
    int n_subcarriers = 0;  ///< OFDM subcarriers
    int n_taps = 0;         ///< delay taps (1 = frequency-flat)
    std::uint64_t seed = 0;

    /// Throws ConfigError unless all dimensions are positive and
    /// n_taps <= n_subcarriers.
    void validate() const;

    static ChannelConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// Time-domain channel: one complex (n_rx x n_tx) gain matrix per delay tap.
/// Entries are IID circularly-symmetric complex Gaussian with per-entry
/// variance 1/L, so the total power per transmit-receive pair is 1 regardless
/// of the tap count.
struct TapSet {
    std::vector<Eigen::MatrixXcd> taps;

    int n_taps() const { return static_cast<int>(taps.size()); }
    Eigen::Index n_rx() const { return taps.empty() ? 0 : taps.front().rows(); }
    Eigen::Index n_tx() const { return taps.empty() ? 0 : taps.front().cols(); }
};

/// One channel draw: the per-subcarrier frequency response derived from a
/// TapSet. Subcarrier i holds sum_j taps[j] * exp(-i2pi*i*j/N_s); columns
/// index transmit antennas.
struct ChannelRealization {
    std::vector<Eigen::MatrixXcd> freq_response;
    TapSet source_taps;

    int n_subcarriers() const { return static_cast<int>(freq_response.size()); }
};

/// A fixed Monte-Carlo sample of channel realizations. All consumers of the
/// same batch see the same channel draws, so capacity averages over it are
/// pure functions of (batch, subset, snr). Immutable after construction.
struct RealizationBatch {
    std::vector<ChannelRealization> realizations;
    ChannelConfig config;
    std::uint64_t seed = 0;

    int size() const { return static_cast<int>(realizations.size()); }
};

/// Draws the L tap matrices from rng. Entries are generated tap by tap in
/// column-major order, two gaussians per entry scaled by sqrt(1/(2L)).
TapSet generate_taps(const ChannelConfig& config, Rng& rng);

/// Evaluates the tap DFT at each of n_subcarriers points. Requires
/// n_subcarriers >= tap count.
ChannelRealization frequency_response(const TapSet& taps, int n_subcarriers);

/// Generates batch_size independent realizations. Realization r draws from
/// the child stream Rng::mix(seed, r), so the batch is reproducible from
/// (config, seed) alone and realizations may be regenerated independently.
RealizationBatch generate_batch(const ChannelConfig& config, int batch_size,
                                std::uint64_t seed);

/// Binary persistence for replay. Stores the tap matrices verbatim
/// (native-endian IEEE doubles) and recomputes frequency responses on load;
/// round-trips bit-exactly on the platform that wrote the file.
void save_batch(const RealizationBatch& batch, const std::filesystem::path& path);
RealizationBatch load_batch(const std::filesystem::path& path);

}  // namespace antsel
