#include "spikesort/io.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace spikesort {

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(std::string_view field, const std::string& path, std::size_t line) {
    double v = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end != begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end)
        throw ParseError(path + ":" + std::to_string(line) + ": cannot parse '" +
                         std::string(field) + "' as a number");
    return v;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::vector<std::string_view> split_fields(const std::string& line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.emplace_back(line.data() + start, line.size() - start);
            break;
        }
        fields.emplace_back(line.data() + start, comma - start);
        start = comma + 1;
    }
    return fields;
}

bool looks_numeric(const std::string& line) {
    for (const auto field : split_fields(line)) {
        double v;
        const char* b = field.data();
        const char* e = b + field.size();
        while (b != e && (*b == ' ' || *b == '\t')) ++b;
        while (e != b && (e[-1] == ' ' || e[-1] == '\t' || e[-1] == '\r')) --e;
        if (std::from_chars(b, e, v).ec != std::errc{}) return false;
    }
    return true;
}

}  // namespace

void write_spikes_csv(const std::string& path, const Matrix& x) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            if (i) out << ',';
            out << format_double(x(i, j));
        }
        out << '\n';
    }
}

Matrix read_spikes_csv(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    std::size_t first = 0;
    while (first < lines.size() && lines[first].empty()) ++first;
    if (first < lines.size() && !looks_numeric(lines[first])) ++first;  // header

    std::vector<std::vector<double>> rows;
    for (std::size_t k = first; k < lines.size(); ++k) {
        if (lines[k].empty()) continue;
        const auto fields = split_fields(lines[k]);
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto f : fields) row.push_back(parse_double(f, path, k + 1));
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError(path + ":" + std::to_string(k + 1) + ": expected " +
                             std::to_string(rows.front().size()) + " columns, got " +
                             std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path + ": no spike rows found");

    Matrix x(static_cast<Eigen::Index>(rows.front().size()), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j)
        for (std::size_t i = 0; i < rows[j].size(); ++i)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[j][i];
    return x;
}

void write_labels_csv(const std::string& path, const std::vector<int>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path);
    for (const int v : labels) out << v << '\n';
}

std::vector<int> read_labels_csv(const std::string& path) {
    std::vector<int> out;
    const std::vector<std::string> lines = read_lines(path);
    for (std::size_t k = 0; k < lines.size(); ++k) {
        if (lines[k].empty()) continue;
        out.push_back(static_cast<int>(parse_double(lines[k], path, k + 1)));
    }
    return out;
}

void write_times_csv(const std::string& path, const std::vector<std::int64_t>& times) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path);
    for (const std::int64_t v : times) out << v << '\n';
}

std::vector<std::int64_t> read_times_csv(const std::string& path) {
    std::vector<std::int64_t> out;
    const std::vector<std::string> lines = read_lines(path);
    for (std::size_t k = 0; k < lines.size(); ++k) {
        if (lines[k].empty()) continue;
        out.push_back(static_cast<std::int64_t>(parse_double(lines[k], path, k + 1)));
    }
    return out;
}

void write_trace_raw(const std::string& path, const Trace& t) {
    static_assert(std::endian::native == std::endian::little,
                  "raw trace format assumes a little-endian host");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(t.samples.data()),
              static_cast<std::streamsize>(t.samples.size() * sizeof(double)));
    nlohmann::json sidecar;
    sidecar["fs_hz"] = t.fs_hz;
    write_text_file(path + ".json", sidecar.dump() + "\n");
}

Trace read_trace_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    in.seekg(0, std::ios::end);
    const std::streamsize bytes = in.tellg();
    in.seekg(0);
    if (bytes % sizeof(double) != 0)
        throw ParseError(path + ": size is not a multiple of 8 bytes");
    Trace t;
    t.samples.resize(static_cast<std::size_t>(bytes) / sizeof(double));
    in.read(reinterpret_cast<char*>(t.samples.data()), bytes);

    nlohmann::json sidecar;
    try {
        sidecar = nlohmann::json::parse(read_text_file(path + ".json"));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ".json: " + e.what());
    }
    if (!sidecar.contains("fs_hz") || !sidecar["fs_hz"].is_number())
        throw ParseError(path + ".json: missing numeric fs_hz");
    t.fs_hz = sidecar["fs_hz"].get<double>();
    return t;
}

void write_trace_csv(const std::string& path, const Trace& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path);
    for (const double v : t.samples) out << format_double(v) << '\n';
}

Trace read_trace_csv(const std::string& path, double fs_hz) {
    if (fs_hz <= 0.0) throw ParseError("trace CSV needs a positive sampling rate");
    Trace t;
    t.fs_hz = fs_hz;
    const std::vector<std::string> lines = read_lines(path);
    for (std::size_t k = 0; k < lines.size(); ++k) {
        if (lines[k].empty()) continue;
        t.samples.push_back(parse_double(lines[k], path, k + 1));
    }
    return t;
}

std::string file_checksum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::uint64_t hash = 0xCBF29CE484222325ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001B3ull;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    return hex;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path);
    out << content;
}

}  // namespace spikesort
