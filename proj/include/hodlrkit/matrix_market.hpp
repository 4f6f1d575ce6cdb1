#pragma once
//
// Matrix Market reader/writer: coordinate (sparse, real/integer/pattern,
// general/symmetric) and array (dense, general/symmetric). Values are
// written with 17 significant digits so a write/read round trip is exact.
//

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "hodlrkit/graph.hpp"
#include "hodlrkit/matrix.hpp"

namespace hodlrkit {

using MatrixMarketData = std::variant<SparsePattern, DenseMatrix>;

namespace detail {

inline std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

inline error parse_error(std::size_t line, const std::string& msg)
{
    return error(errc::parse_error, "line " + std::to_string(line) + ": " + msg);
}

inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

inline MatrixMarketData read_matrix_market(std::istream& in)
{
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line))
        throw detail::parse_error(1, "empty input");
    ++lineno;

    std::istringstream hs(line);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || detail::lower(object) != "matrix")
        throw detail::parse_error(lineno, "missing %%MatrixMarket matrix header");
    format = detail::lower(format);
    field = detail::lower(field);
    symmetry = detail::lower(symmetry);
    if (format != "coordinate" && format != "array")
        throw detail::parse_error(lineno, "unsupported format '" + format + "'");
    if (field != "real" && field != "integer" && field != "double" && field != "pattern")
        throw detail::parse_error(lineno, "unsupported field '" + field + "'");
    if (symmetry != "general" && symmetry != "symmetric")
        throw detail::parse_error(lineno, "unsupported symmetry '" + symmetry + "'");
    const bool symmetric = symmetry == "symmetric";
    const bool pattern = field == "pattern";

    // next non-comment, non-blank line
    auto next_data_line = [&](std::string& out) {
        while (std::getline(in, out)) {
            ++lineno;
            const auto p = out.find_first_not_of(" \t\r");
            if (p == std::string::npos || out[p] == '%')
                continue;
            return true;
        }
        return false;
    };

    if (!next_data_line(line))
        throw detail::parse_error(lineno, "missing size line");
    std::istringstream ss(line);

    if (format == "array") {
        if (pattern)
            throw detail::parse_error(lineno, "array format cannot be a pattern");
        index_t m = 0, n = 0;
        if (!(ss >> m >> n))
            throw detail::parse_error(lineno, "malformed size line");
        if (symmetric && m != n)
            throw error(errc::dimension_mismatch, "symmetric array header is not square");
        DenseMatrix A(m, n);
        for (index_t j = 0; j < n; ++j) {
            for (index_t i = symmetric ? j : 0; i < m; ++i) {
                if (!next_data_line(line))
                    throw detail::parse_error(lineno, "fewer values than the header declares");
                std::istringstream vs(line);
                double v = 0.0;
                if (!(vs >> v))
                    throw detail::parse_error(lineno, "malformed value");
                A(i, j) = v;
                if (symmetric)
                    A(j, i) = v;
            }
        }
        if (next_data_line(line))
            throw detail::parse_error(lineno, "more values than the header declares");
        return A;
    }

    index_t m = 0, n = 0, nnz = 0;
    if (!(ss >> m >> n >> nnz))
        throw detail::parse_error(lineno, "malformed size line");
    if (m != n)
        throw error(errc::dimension_mismatch, "coordinate header is not square (" + std::to_string(m) + " x " +
                                                  std::to_string(n) + "); graphs need square patterns");
    std::vector<std::tuple<index_t, index_t, double>> t;
    t.reserve(symmetric ? 2 * nnz : nnz);
    for (index_t k = 0; k < nnz; ++k) {
        if (!next_data_line(line))
            throw detail::parse_error(lineno, "expected " + std::to_string(nnz) + " entries, found " + std::to_string(k));
        std::istringstream es(line);
        long long i = 0, j = 0;
        double v = 1.0;
        if (!(es >> i >> j) || (!pattern && !(es >> v)))
            throw detail::parse_error(lineno, "malformed entry");
        if (i < 1 || j < 1 || static_cast<index_t>(i) > m || static_cast<index_t>(j) > n)
            throw error(errc::dimension_mismatch,
                        "line " + std::to_string(lineno) + ": entry index outside the header dimensions");
        const index_t r = static_cast<index_t>(i - 1), c = static_cast<index_t>(j - 1);
        t.emplace_back(r, c, v);
        if (symmetric && r != c)
            t.emplace_back(c, r, v);
    }
    if (next_data_line(line))
        throw detail::parse_error(lineno, "more entries than the header declares");
    return SparsePattern::from_triplets(m, std::move(t), !pattern);
}

inline MatrixMarketData read_matrix_market(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw error(errc::io_error, "cannot open '" + path + "'");
    return read_matrix_market(in);
}

inline DenseMatrix read_dense(const std::string& path)
{
    auto data = read_matrix_market(path);
    if (auto* d = std::get_if<DenseMatrix>(&data))
        return std::move(*d);
    return std::get<SparsePattern>(data).to_dense();
}

inline SparsePattern read_sparse(const std::string& path)
{
    auto data = read_matrix_market(path);
    if (auto* s = std::get_if<SparsePattern>(&data))
        return std::move(*s);
    throw error(errc::parse_error, "'" + path + "' is an array file; expected coordinate format");
}

inline void write_array(std::ostream& out, const DenseMatrix& A)
{
    out << "%%MatrixMarket matrix array real general\n" << A.rows() << ' ' << A.cols() << '\n';
    for (index_t j = 0; j < A.cols(); ++j)
        for (index_t i = 0; i < A.rows(); ++i)
            out << detail::format_double(A(i, j)) << '\n';
}

// Symmetric-valued patterns are written as the lower triangle.
inline void write_coordinate(std::ostream& out, const SparsePattern& P)
{
    const index_t n = P.size();
    bool symmetric = true;
    if (P.has_values()) {
        for (index_t i = 0; i < n && symmetric; ++i)
            for (index_t j : P.neighbors(i))
                if (P.value(i, j) != P.value(j, i)) {
                    symmetric = false;
                    break;
                }
    }
    std::vector<std::tuple<index_t, index_t, double>> e;
    for (index_t i = 0; i < n; ++i) {
        if (P.has_values())
            e.emplace_back(i, i, P.diagonal(i));
        auto nb = P.neighbors(i);
        for (index_t k = 0; k < nb.size(); ++k)
            if (!symmetric || nb[k] < i)
                e.emplace_back(i, nb[k], P.has_values() ? P.neighbor_values(i)[k] : 1.0);
    }
    // column-major order, as most MM writers emit
    std::sort(e.begin(), e.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<1>(a), std::get<0>(a)) < std::tie(std::get<1>(b), std::get<0>(b));
    });
    out << "%%MatrixMarket matrix coordinate " << (P.has_values() ? "real " : "pattern ")
        << (symmetric ? "symmetric" : "general") << '\n';
    out << n << ' ' << n << ' ' << e.size() << '\n';
    for (auto [i, j, v] : e) {
        out << i + 1 << ' ' << j + 1;
        if (P.has_values())
            out << ' ' << detail::format_double(v);
        out << '\n';
    }
}

template <typename T>
void write_matrix_market_file(const std::string& path, const T& M)
{
    std::ofstream out(path);
    if (!out)
        throw error(errc::io_error, "cannot write '" + path + "'");
    if constexpr (std::is_same_v<T, DenseMatrix>)
        write_array(out, M);
    else
        write_coordinate(out, M);
}

// One 0-based operator vertex id per front row; '#' starts a comment.
inline std::vector<index_t> read_ordering(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw error(errc::io_error, "cannot open '" + path + "'");
    std::vector<index_t> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto p = line.find_first_not_of(" \t\r");
        if (p == std::string::npos || line[p] == '#')
            continue;
        std::istringstream ls(line);
        long long v = -1;
        if (!(ls >> v) || v < 0)
            throw detail::parse_error(lineno, "ordering entries must be non-negative integers");
        ids.push_back(static_cast<index_t>(v));
    }
    return ids;
}

inline void write_ordering(const std::string& path, const std::vector<index_t>& ids)
{
    std::ofstream out(path);
    if (!out)
        throw error(errc::io_error, "cannot write '" + path + "'");
    out << "# operator vertex of each front row (0-based)\n";
    for (index_t v : ids)
        out << v << '\n';
}

} // namespace hodlrkit
