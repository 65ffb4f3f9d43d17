#include "xlmimo/csv_io.hpp"

#include "xlmimo/scenario_file.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace xlmimo {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

std::string format_matrix_csv(const CMatrix& y) {
    std::string out = "m,n,re,im\n";
    out.reserve(static_cast<std::size_t>(y.size()) * 48 + out.size());
    for (Eigen::Index m = 0; m < y.rows(); ++m) {
        for (Eigen::Index n = 0; n < y.cols(); ++n) {
            out += std::to_string(m);
            out += ',';
            out += std::to_string(n);
            out += ',';
            out += format_number(y(m, n).real());
            out += ',';
            out += format_number(y(m, n).imag());
            out += '\n';
        }
    }
    return out;
}

CMatrix parse_matrix_csv(std::string_view text, std::string_view source) {
    struct Cell {
        long m;
        long n;
        cdouble v;
    };
    std::vector<Cell> cells;
    long max_m = -1;
    long max_n = -1;
    bool header_seen = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    auto fail = [&](const std::string& what) { throw ConfigError(std::string(source), line_no, "matrix", what); };

    while (pos < text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != "m,n,re,im") fail("expected header 'm,n,re,im'");
            header_seen = true;
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 4) fail("expected 4 fields, got " + std::to_string(fields.size()));
        Cell c{};
        for (int i = 0; i < 2; ++i) {
            long v = -1;
            const auto f = fields[static_cast<std::size_t>(i)];
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc{} || ptr != f.data() + f.size() || v < 0) fail("bad index '" + std::string(f) + "'");
            (i == 0 ? c.m : c.n) = v;
        }
        const auto re = parse_number(fields[2]);
        const auto im = parse_number(fields[3]);
        if (!re || !im) fail("bad complex value");
        c.v = {*re, *im};
        max_m = std::max(max_m, c.m);
        max_n = std::max(max_n, c.n);
        cells.push_back(c);
    }
    if (!header_seen) fail("missing header 'm,n,re,im'");
    if (cells.empty()) fail("no matrix entries");

    const auto rows = static_cast<Eigen::Index>(max_m + 1);
    const auto cols = static_cast<Eigen::Index>(max_n + 1);
    if (static_cast<std::size_t>(rows * cols) != cells.size())
        throw ConfigError(std::string(source), 0, "matrix",
                          "expected " + std::to_string(rows * cols) + " entries for a " + std::to_string(rows) + "x" +
                              std::to_string(cols) + " matrix, found " + std::to_string(cells.size()));
    CMatrix y(rows, cols);
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> seen =
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(rows, cols, false);
    for (const auto& c : cells) {
        if (seen(c.m, c.n))
            throw ConfigError(std::string(source), 0, "matrix",
                              "entry (" + std::to_string(c.m) + "," + std::to_string(c.n) + ") repeated");
        seen(c.m, c.n) = true;
        y(c.m, c.n) = c.v;
    }
    return y;
}

std::string format_map_csv(const MapGrid& map, const std::vector<std::string>& header) {
    std::ostringstream os;
    for (const auto& h : header) os << "# " << h << "\n";
    os << "# row_axis=" << to_string(map.row_axis) << " row_scale=" << format_number(map.row_scale)
       << " rows=" << map.rows() << "\n"
       << "# col_axis=" << to_string(map.col_axis) << " col_scale=" << format_number(map.col_scale)
       << " cols=" << map.cols() << "\n"
       << "row,col,magnitude\n";
    for (Eigen::Index r = 0; r < map.rows(); ++r)
        for (Eigen::Index c = 0; c < map.cols(); ++c)
            os << r << ',' << c << ',' << format_number(map.data(r, c)) << '\n';
    return os.str();
}

std::string format_signatures_csv(const std::vector<SignatureEstimate>& signatures) {
    std::ostringstream os;
    os << "group_id,omega_theta,omega_r,amp_re,amp_im\n";
    for (const auto& s : signatures)
        os << s.group_id << ',' << format_number(s.omega_theta) << ',' << format_number(s.omega_r) << ','
           << format_number(s.amplitude.real()) << ',' << format_number(s.amplitude.imag()) << '\n';
    return os.str();
}

}  // namespace xlmimo
