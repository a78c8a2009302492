#include "physadv/linalg.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace physadv::linalg {

Vector leastSquares(const Matrix& h, const Matrix& w, const Vector& z) {
    if (w.rows() != h.rows() || w.cols() != h.rows()) {
        throw DimensionMismatch("leastSquares: W must be rows(H) x rows(H)");
    }
    if (z.size() != h.rows()) {
        throw DimensionMismatch("leastSquares: |z| must equal rows(H)");
    }
    requireFinite(h, "leastSquares H");
    requireFinite(z, "leastSquares z");
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        if (!(w(i, i) > 0.0)) {
            throw Error("leastSquares: W diagonal must be positive");
        }
    }

    const Vector sqrtW = w.diagonal().cwiseSqrt();
    const Matrix a = sqrtW.asDiagonal() * h;
    const Vector b = sqrtW.asDiagonal() * z;
    Eigen::ColPivHouseholderQR<Matrix> qr(a);
    if (qr.rank() < h.cols()) {
        throw SingularSystem("leastSquares: H^T W H is rank deficient");
    }
    return qr.solve(b);
}

namespace {

bool parseCell(const std::string& cell, double& out) {
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t' || *(last - 1) == '\r')) --last;
    if (first == last) return false;
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

std::vector<std::string> splitCells(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

}  // namespace

Matrix loadCsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw MalformedFile("loadCsv: cannot open " + path);
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        const auto cells = splitCells(line);
        std::vector<double> row;
        row.reserve(cells.size());
        bool ok = true;
        for (const auto& c : cells) {
            double v = 0.0;
            if (!parseCell(c, v)) {
                ok = false;
                break;
            }
            row.push_back(v);
        }
        if (!ok) {
            if (first) {
                first = false;
                continue;  // header line
            }
            throw MalformedFile("loadCsv: non-numeric cell in " + path);
        }
        first = false;
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw MalformedFile("loadCsv: ragged rows in " + path);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw MalformedFile("loadCsv: no data rows in " + path);
    }
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
        }
    }
    requireFinite(m, "loadCsv");
    return m;
}

void saveCsv(const std::string& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) {
        throw MalformedFile("saveCsv: cannot open " + path);
    }
    char buf[64];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const auto res = std::to_chars(buf, buf + sizeof(buf), m(i, j));
            out.write(buf, res.ptr - buf);
            out.put(j + 1 == m.cols() ? '\n' : ',');
        }
    }
    if (m.rows() == 0) {
        out << "\n";
    }
}

}  // namespace physadv::linalg
