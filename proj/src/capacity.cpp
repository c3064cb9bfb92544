#include "antsel/capacity.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "antsel/errors.hpp"

namespace antsel {

AntennaSubset::AntennaSubset(std::vector<bool> mask) : mask_(std::move(mask)) {
    for (int i = 0; i < static_cast<int>(mask_.size()); ++i) {
        if (mask_[i]) {
            positions_.push_back(i);
        }
    }
    if (positions_.empty()) {
        throw ConfigError("antenna subset: at least one antenna must be selected");
    }
}

AntennaSubset AntennaSubset::from_positions(int n_tx, std::vector<int> positions) {
    if (n_tx < 1) {
        throw ConfigError("antenna subset: n_tx must be positive");
    }
    std::vector<bool> mask(n_tx, false);
    for (int p : positions) {
        if (p < 0 || p >= n_tx) {
            throw DimensionError("antenna subset: position out of range");
        }
        if (mask[p]) {
            throw ConfigError("antenna subset: duplicate position");
        }
        mask[p] = true;
    }
    return AntennaSubset(std::move(mask));
}

std::string AntennaSubset::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < positions_.size(); ++i) {
        if (i > 0) {
            out += ';';
        }
        out += std::to_string(positions_[i]);
    }
    return out;
}

Snr Snr::from_db(double db) {
    Snr snr;
    snr.db = db;
    snr.linear = std::pow(10.0, db / 10.0);
    return snr;
}

Snr Snr::from_linear(double linear) {
    if (!(linear > 0.0)) {
        throw ConfigError("snr: linear value must be positive");
    }
    Snr snr;
    snr.linear = linear;
    snr.db = 10.0 * std::log10(linear);
    return snr;
}

nlohmann::json CapacityEstimate::to_json() const {
    return {{"bits_per_s_per_hz", bits_per_s_per_hz},
            {"n_realizations", n_realizations},
            {"subset", subset.positions()},
            {"snr_db", snr.db}};
}

Eigen::MatrixXcd select_columns(const Eigen::MatrixXcd& response_matrix,
                                const AntennaSubset& subset) {
    if (subset.n_tx() != response_matrix.cols()) {
        throw DimensionError("select_columns: subset length does not match column count");
    }
    Eigen::MatrixXcd selected(response_matrix.rows(), subset.count());
    int out = 0;
    for (int p : subset.positions()) {
        selected.col(out++) = response_matrix.col(p);
    }
    return selected;
}

double subcarrier_capacity(const Eigen::MatrixXcd& h_sub, const Snr& snr, int n_t) {
    if (n_t < 1 || h_sub.cols() != n_t) {
        throw DimensionError("subcarrier_capacity: n_t must equal the column count");
    }
    if (!(snr.linear > 0.0)) {
        throw ConfigError("subcarrier_capacity: snr must be positive");
    }
    if (!h_sub.allFinite()) {
        throw NumericError("subcarrier_capacity: non-finite channel entries");
    }
    const double scale = snr.linear / static_cast<double>(n_t);
    Eigen::MatrixXcd gram;
    if (h_sub.rows() <= h_sub.cols()) {
        gram.noalias() = h_sub * h_sub.adjoint();
    } else {
        gram.noalias() = h_sub.adjoint() * h_sub;
    }
    const Eigen::MatrixXcd m =
        Eigen::MatrixXcd::Identity(gram.rows(), gram.cols()) + scale * gram;
    const Eigen::LLT<Eigen::MatrixXcd> llt(m);
    if (llt.info() != Eigen::Success) {
        throw NumericError("subcarrier_capacity: Cholesky factorization failed");
    }
    double log2_det = 0.0;
    const auto& factor = llt.matrixLLT();
    for (Eigen::Index k = 0; k < factor.rows(); ++k) {
        log2_det += std::log2(factor(k, k).real());
    }
    double capacity = 2.0 * log2_det;
    if (capacity < 0.0 && capacity > -1e-9) {
        capacity = 0.0;  // rounding of an exact zero
    }
    return capacity;
}

double realization_capacity(const ChannelRealization& realization,
                            const AntennaSubset& subset, const Snr& snr) {
    if (realization.freq_response.empty()) {
        throw DimensionError("realization_capacity: realization has no subcarriers");
    }
    double total = 0.0;
    for (const Eigen::MatrixXcd& response : realization.freq_response) {
        total += subcarrier_capacity(select_columns(response, subset), snr, subset.count());
    }
    return total / static_cast<double>(realization.freq_response.size());
}

CapacityEstimate ergodic_capacity(const RealizationBatch& batch,
                                  const AntennaSubset& subset, const Snr& snr) {
    if (batch.realizations.empty()) {
        throw ConfigError("ergodic_capacity: batch is empty");
    }
    double total = 0.0;
    for (const ChannelRealization& realization : batch.realizations) {
        total += realization_capacity(realization, subset, snr);
    }
    CapacityEstimate estimate{total / static_cast<double>(batch.size()), batch.size(),
                              subset, snr};
    return estimate;
}

}  // namespace antsel
