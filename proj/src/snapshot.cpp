#include "semiper/snapshot.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "semiper/atomic_file.hpp"

namespace semiper {

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void put_le(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    out.write(bytes, 8);
}

double get_le(std::istream& in) {
    char bytes[8];
    if (!in.read(bytes, 8)) throw std::runtime_error("snapshot: truncated payload");
    std::uint64_t bits;
    std::memcpy(&bits, bytes, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

}  // namespace

void write_snapshot(std::ostream& out, const Field& u, const std::map<std::string, std::string>& metadata) {
    const auto& g = *u.grid();
    out << "semiper-field 1\n";
    out << "dimension " << g.dimension() << '\n';
    out << "half_width " << format_double(g.half_width()) << '\n';
    out << "points_per_axis " << g.points_per_axis() << '\n';
    out << "laplacian " << to_string(g.laplacian()) << '\n';
    for (const auto& [key, value] : metadata) {
        if (key.find_first_of(" \n") != std::string::npos || value.find('\n') != std::string::npos) {
            throw std::invalid_argument("snapshot metadata must be single-line with space-free keys");
        }
        out << "meta." << key << ' ' << value << '\n';
    }
    out << "norm_l2 " << format_double(norm_l2(u)) << '\n';
    out << "norm_h1 " << format_double(norm_h1(u)) << '\n';
    out << "end\n";
    for (double v : u.values()) put_le(out, v);
}

Snapshot read_snapshot(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "semiper-field 1") {
        throw std::runtime_error("snapshot: missing 'semiper-field 1' header");
    }
    int dimension = 0, points = 0;
    double half_width = 0.0, l2 = -1.0, h1 = -1.0;
    std::string laplacian = "spectral";
    std::map<std::string, std::string> metadata;
    bool ended = false;
    while (std::getline(in, line)) {
        if (line == "end") {
            ended = true;
            break;
        }
        const auto space = line.find(' ');
        if (space == std::string::npos) throw std::runtime_error("snapshot: malformed header line '" + line + "'");
        const std::string key = line.substr(0, space);
        const std::string value = line.substr(space + 1);
        if (key == "dimension") dimension = std::stoi(value);
        else if (key == "half_width") half_width = std::stod(value);
        else if (key == "points_per_axis") points = std::stoi(value);
        else if (key == "laplacian") laplacian = value;
        else if (key == "norm_l2") l2 = std::stod(value);
        else if (key == "norm_h1") h1 = std::stod(value);
        else if (key.rfind("meta.", 0) == 0) metadata[key.substr(5)] = value;
        else throw std::runtime_error("snapshot: unknown header key '" + key + "'");
    }
    if (!ended) throw std::runtime_error("snapshot: header not terminated by 'end'");

    auto grid = make_grid(dimension, half_width, points, laplacian_kind_from_string(laplacian));
    std::vector<double> values(grid->size());
    for (double& v : values) v = get_le(in);
    Field field(grid, std::move(values));

    const auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
    if (!close(norm_l2(field), l2) || !close(norm_h1(field), h1)) {
        throw std::runtime_error("snapshot: norm checksum mismatch");
    }
    return {std::move(field), std::move(metadata)};
}

void write_snapshot_file(const std::filesystem::path& path, const Field& u,
                         const std::map<std::string, std::string>& metadata) {
    std::ostringstream buf(std::ios::binary);
    write_snapshot(buf, u, metadata);
    write_file_atomically(path, buf.str());
}

Snapshot read_snapshot_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("snapshot: cannot open " + path.string());
    return read_snapshot(in);
}

}  // namespace semiper
