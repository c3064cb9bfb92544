#include "antsel/channel.hpp"

#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <numbers>
#include <string>

#include "antsel/errors.hpp"

namespace antsel {

namespace {

constexpr char kBatchMagic[8] = {'A', 'N', 'T', 'S', 'E', 'L', 'B', '1'};

int require_int(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number_integer()) {
        throw ConfigError(std::string("channel config: missing integer key '") + key + "'");
    }
    return j.at(key).get<int>();
}

template <typename T>
void write_raw(std::ostream& os, const T& value) {
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is) {
    T value{};
    is.read(reinterpret_cast<char*>(&value), sizeof(T));
    return value;
}

}  // namespace

void ChannelConfig::validate() const {
    if (n_tx < 1 || n_rx < 1 || n_subcarriers < 1) {
        throw ConfigError("channel config: antenna and subcarrier counts must be positive");
    }
    if (n_taps < 1 || n_taps > n_subcarriers) {
        throw ConfigError("channel config: n_taps must be in [1, n_subcarriers]");
    }
}

ChannelConfig ChannelConfig::from_json(const nlohmann::json& j) {
    ChannelConfig cfg;
    cfg.n_tx = require_int(j, "n_tx");
    cfg.n_rx = require_int(j, "n_rx");
    cfg.n_subcarriers = require_int(j, "n_subcarriers");
    cfg.n_taps = require_int(j, "n_taps");
    if (!j.contains("seed") || !j.at("seed").is_number_integer()) {
        throw ConfigError("channel config: missing integer key 'seed'");
    }
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.validate();
    return cfg;
}

nlohmann::json ChannelConfig::to_json() const {
    return {{"n_tx", n_tx},
            {"n_rx", n_rx},
            {"n_subcarriers", n_subcarriers},
            {"n_taps", n_taps},
            {"seed", seed}};
}

TapSet generate_taps(const ChannelConfig& config, Rng& rng) {
    config.validate();
    const double sigma = std::sqrt(1.0 / (2.0 * config.n_taps));
    TapSet set;
    set.taps.reserve(config.n_taps);
    for (int j = 0; j < config.n_taps; ++j) {
        Eigen::MatrixXcd tap(config.n_rx, config.n_tx);
        for (int col = 0; col < config.n_tx; ++col) {
            for (int row = 0; row < config.n_rx; ++row) {
                const double re = sigma * rng.gaussian();
                const double im = sigma * rng.gaussian();
                tap(row, col) = std::complex<double>(re, im);
            }
        }
        set.taps.push_back(std::move(tap));
    }
    return set;
}

ChannelRealization frequency_response(const TapSet& taps, int n_subcarriers) {
    const int n_taps = taps.n_taps();
    if (n_taps == 0) {
        throw ConfigError("frequency_response: tap set is empty");
    }
    if (n_subcarriers < n_taps) {
        throw ConfigError("frequency_response: n_subcarriers must be >= tap count");
    }
    ChannelRealization realization;
    realization.source_taps = taps;
    realization.freq_response.reserve(n_subcarriers);
    for (int i = 0; i < n_subcarriers; ++i) {
        Eigen::MatrixXcd response =
            Eigen::MatrixXcd::Zero(taps.n_rx(), taps.n_tx());
        for (int j = 0; j < n_taps; ++j) {
            const double phase =
                -2.0 * std::numbers::pi * static_cast<double>(i) * static_cast<double>(j) /
                static_cast<double>(n_subcarriers);
            response += taps.taps[j] * std::polar(1.0, phase);
        }
        realization.freq_response.push_back(std::move(response));
    }
    return realization;
}

RealizationBatch generate_batch(const ChannelConfig& config, int batch_size,
                                std::uint64_t seed) {
    config.validate();
    if (batch_size < 1) {
        throw ConfigError("generate_batch: batch_size must be >= 1");
    }
    RealizationBatch batch;
    batch.config = config;
    batch.seed = seed;
    batch.realizations.reserve(batch_size);
    for (int r = 0; r < batch_size; ++r) {
        Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(r)));
        batch.realizations.push_back(
            frequency_response(generate_taps(config, rng), config.n_subcarriers));
    }
    return batch;
}

void save_batch(const RealizationBatch& batch, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw ConfigError("save_batch: cannot open '" + path.string() + "' for writing");
    }
    os.write(kBatchMagic, sizeof(kBatchMagic));
    write_raw<std::int64_t>(os, batch.config.n_tx);
    write_raw<std::int64_t>(os, batch.config.n_rx);
    write_raw<std::int64_t>(os, batch.config.n_subcarriers);
    write_raw<std::int64_t>(os, batch.config.n_taps);
    write_raw<std::uint64_t>(os, batch.config.seed);
    write_raw<std::uint64_t>(os, batch.seed);
    write_raw<std::int64_t>(os, batch.size());
    for (const ChannelRealization& realization : batch.realizations) {
        for (const Eigen::MatrixXcd& tap : realization.source_taps.taps) {
            os.write(reinterpret_cast<const char*>(tap.data()),
                     static_cast<std::streamsize>(sizeof(std::complex<double>) * tap.size()));
        }
    }
    if (!os) {
        throw ConfigError("save_batch: write failed for '" + path.string() + "'");
    }
}

RealizationBatch load_batch(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw ConfigError("load_batch: cannot open '" + path.string() + "'");
    }
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kBatchMagic, sizeof(magic)) != 0) {
        throw ConfigError("load_batch: '" + path.string() + "' is not a batch file");
    }
    RealizationBatch batch;
    batch.config.n_tx = static_cast<int>(read_raw<std::int64_t>(is));
    batch.config.n_rx = static_cast<int>(read_raw<std::int64_t>(is));
    batch.config.n_subcarriers = static_cast<int>(read_raw<std::int64_t>(is));
    batch.config.n_taps = static_cast<int>(read_raw<std::int64_t>(is));
    batch.config.seed = read_raw<std::uint64_t>(is);
    batch.seed = read_raw<std::uint64_t>(is);
    const auto batch_size = read_raw<std::int64_t>(is);
    batch.config.validate();
    if (batch_size < 1) {
        throw ConfigError("load_batch: corrupt batch size");
    }
    batch.realizations.reserve(batch_size);
    for (std::int64_t r = 0; r < batch_size; ++r) {
        TapSet taps;
        taps.taps.reserve(batch.config.n_taps);
        for (int j = 0; j < batch.config.n_taps; ++j) {
            Eigen::MatrixXcd tap(batch.config.n_rx, batch.config.n_tx);
            is.read(reinterpret_cast<char*>(tap.data()),
                    static_cast<std::streamsize>(sizeof(std::complex<double>) * tap.size()));
            taps.taps.push_back(std::move(tap));
        }
        if (!is) {
            throw ConfigError("load_batch: truncated file '" + path.string() + "'");
        }
        batch.realizations.push_back(
            frequency_response(taps, batch.config.n_subcarriers));
    }
    return batch;
}

}  // namespace antsel
