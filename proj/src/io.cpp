#include "antsel/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace antsel {

std::string format_fixed(double value, int decimals) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.*f", decimals, value);
    return buffer;
}

std::string format_compact(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%g", value);
    return buffer;
}

double round_to(double value, int decimals) {
    // reparse the fixed-point rendering so CSV and JSON agree exactly
    return std::strtod(format_fixed(value, decimals).c_str(), nullptr);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw std::runtime_error("cannot open for writing: " + path.string());
    }
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw std::runtime_error("cannot open for reading: " + path.string());
    }
    std::ostringstream buffer;
    buffer << is.rdbuf();
    if (is.bad()) {
        throw std::runtime_error("read failed: " + path.string());
    }
    return buffer.str();
}

}  // namespace antsel
