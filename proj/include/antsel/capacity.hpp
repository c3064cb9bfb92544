#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "antsel/channel.hpp"

namespace antsel {

/// A cardinality-constrained choice of transmit antennas: a bit mask over the
/// n_tx columns together with the sorted list of selected indices. The two
/// views are kept consistent by construction; at least one antenna is always
/// selected.
class AntennaSubset {
public:
    /// From a gene mask. Throws ConfigError if no bit is set.
    explicit AntennaSubset(std::vector<bool> mask);

    /// From selected indices (any order, no duplicates) over n_tx antennas.
    static AntennaSubset from_positions(int n_tx, std::vector<int> positions);

    int n_tx() const { return static_cast<int>(mask_.size()); }
    int count() const { return static_cast<int>(positions_.size()); }
    const std::vector<bool>& mask() const { return mask_; }
    const std::vector<int>& positions() const { return positions_; }

    /// Selected indices joined with ';' (e.g. "0;3;7"), the CSV cell form.
    std::string to_string() const;

    bool operator==(const AntennaSubset& other) const = default;

private:
    std::vector<bool> mask_;
    std::vector<int> positions_;
};

/// Signal-to-noise ratio carried in both scales.
struct Snr {
    double db = 0.0;
    double linear = 1.0;

    static Snr from_db(double db);
    static Snr from_linear(double linear);
};

/// Batch-averaged capacity of one antenna subset at one SNR.
struct CapacityEstimate {
    double bits_per_s_per_hz = 0.0;
    int n_realizations = 0;
    AntennaSubset subset;
    Snr snr;

    nlohmann::json to_json() const;
};

/// Columns of response_matrix at the subset's positions, ascending.
Eigen::MatrixXcd select_columns(const Eigen::MatrixXcd& response_matrix,
                                const AntennaSubset& subset);

/// log2 det(I + (snr/n_t) H H^H) for one subcarrier's selected channel H.
/// Computed from a Cholesky factorization of the Gram matrix on the smaller
/// of the two dimensions (det(I + aHH^H) = det(I + aH^H H)), summing logs of
/// the diagonal factors so large SNR cannot overflow a determinant product.
double subcarrier_capacity(const Eigen::MatrixXcd& h_sub, const Snr& snr, int n_t);

/// Mean subcarrier capacity of the subset over one realization.
double realization_capacity(const ChannelRealization& realization,
                            const AntennaSubset& subset, const Snr& snr);

/// Mean realization capacity over the batch.
CapacityEstimate ergodic_capacity(const RealizationBatch& batch,
                                  const AntennaSubset& subset, const Snr& snr);

}  // namespace antsel
