#include "physadv/constraints.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace physadv {

void ConstraintSet::validate(Eigen::Index fullDim) const {
    if (phiTilde.size() != phi.rows()) {
        throw DimensionMismatch("ConstraintSet: |phiTilde| must equal rows(phi)");
    }
    if (static_cast<Eigen::Index>(compromised.size()) != phi.cols()) {
        throw DimensionMismatch("ConstraintSet: |C| must equal cols(phi)");
    }
    for (size_t i = 0; i < compromised.size(); ++i) {
        if (compromised[i] < 0 || (fullDim >= 0 && compromised[i] >= fullDim)) {
            throw IndexOutOfBounds("ConstraintSet: compromised index out of range");
        }
        if (i > 0 && compromised[i] <= compromised[i - 1]) {
            throw Error("ConstraintSet: compromised indices must be strictly increasing");
        }
    }
    linalg::requireFinite(phi, "ConstraintSet phi");
    linalg::requireFinite(phiTilde, "ConstraintSet phiTilde");
}

void MeasurementVector::validate() const {
    std::vector<char> seen(static_cast<size_t>(values.size()), 0);
    auto mark = [&](const IndexList& idx) {
        for (auto i : idx) {
            if (i < 0 || i >= values.size()) {
                throw IndexOutOfBounds("MeasurementVector: index out of range");
            }
            if (seen[static_cast<size_t>(i)]++) {
                throw Error("MeasurementVector: C and U must be disjoint and cover all indices");
            }
        }
    };
    mark(compromised);
    mark(uncompromised);
    for (char c : seen) {
        if (!c) {
            throw Error("MeasurementVector: C and U must cover all indices");
        }
    }
}

IndexList complementIndices(const IndexList& idx, Eigen::Index dim) {
    std::vector<char> in(static_cast<size_t>(dim), 0);
    for (auto i : idx) {
        if (i < 0 || i >= dim) {
            throw IndexOutOfBounds("complementIndices: index out of range");
        }
        in[static_cast<size_t>(i)] = 1;
    }
    IndexList out;
    out.reserve(static_cast<size_t>(dim) - idx.size());
    for (Eigen::Index i = 0; i < dim; ++i) {
        if (!in[static_cast<size_t>(i)]) out.push_back(i);
    }
    return out;
}

Vector subvector(const Vector& values, const IndexList& idx) {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] < 0 || idx[i] >= values.size()) {
            throw IndexOutOfBounds("subvector: index out of range");
        }
        out(static_cast<Eigen::Index>(i)) = values(idx[i]);
    }
    return out;
}

void scatterInto(Vector& full, const IndexList& idx, const Vector& vals) {
    if (static_cast<Eigen::Index>(idx.size()) != vals.size()) {
        throw DimensionMismatch("scatterInto: index/value length mismatch");
    }
    for (size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] < 0 || idx[i] >= full.size()) {
            throw IndexOutOfBounds("scatterInto: index out of range");
        }
        full(idx[i]) = vals(static_cast<Eigen::Index>(i));
    }
}

IndexList violatedEqualities(const ConstraintSet& cs, const Vector& mC, double tol) {
    if (mC.size() != cs.phi.cols()) {
        throw DimensionMismatch("violatedEqualities: |mC| must equal cols(phi)");
    }
    const Vector resid = cs.phi * mC - cs.phiTilde;
    IndexList out;
    for (Eigen::Index i = 0; i < resid.size(); ++i) {
        if (std::abs(resid(i)) > tol) out.push_back(i);
    }
    return out;
}

IndexList violatedInequalities(const ConstraintSet& cs, const Vector& mC, double slackTol) {
    if (mC.size() != cs.phi.cols()) {
        throw DimensionMismatch("violatedInequalities: |mC| must equal cols(phi)");
    }
    const Vector lhs = cs.phi * mC;
    IndexList out;
    for (Eigen::Index i = 0; i < lhs.size(); ++i) {
        if (lhs(i) > cs.phiTilde(i) + slackTol) out.push_back(i);
    }
    return out;
}

bool validatePerturbation(const ConstraintSet& cs, const Vector& deltaC, double tol) {
    if (deltaC.size() != cs.phi.cols()) {
        throw DimensionMismatch("validatePerturbation: |deltaC| must equal cols(phi)");
    }
    if (cs.phi.rows() == 0) return true;
    return (cs.phi * deltaC).cwiseAbs().maxCoeff() <= tol;
}

ConstraintSet rowSubset(const ConstraintSet& cs, const IndexList& v) {
    IndexList unique;
    std::set<Eigen::Index> seen;
    for (auto i : v) {
        if (i < 0 || i >= cs.phi.rows()) {
            throw IndexOutOfBounds("rowSubset: row index out of range");
        }
        if (seen.insert(i).second) unique.push_back(i);
    }
    ConstraintSet out;
    out.kind = ConstraintKind::Equality;
    out.compromised = cs.compromised;
    out.phi.resize(static_cast<Eigen::Index>(unique.size()), cs.phi.cols());
    out.phiTilde.resize(static_cast<Eigen::Index>(unique.size()));
    for (size_t k = 0; k < unique.size(); ++k) {
        out.phi.row(static_cast<Eigen::Index>(k)) = cs.phi.row(unique[k]);
        out.phiTilde(static_cast<Eigen::Index>(k)) = cs.phiTilde(unique[k]);
    }
    return out;
}

namespace {

void writeRow(std::ofstream& out, const char* tag, const Vector& v) {
    out << tag;
    char buf[64];
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const auto res = std::to_chars(buf, buf + sizeof(buf), v(i));
        out << ',';
        out.write(buf, res.ptr - buf);
    }
    out << '\n';
}

}  // namespace

void saveConstraintSet(const std::string& path, const ConstraintSet& cs) {
    std::ofstream out(path);
    if (!out) {
        throw MalformedFile("saveConstraintSet: cannot open " + path);
    }
    out << "kind," << (cs.kind == ConstraintKind::Equality ? "equality" : "inequality") << '\n';
    writeRow(out, "phiTilde", cs.phiTilde);
    out << "compromised";
    for (auto i : cs.compromised) out << ',' << i;
    out << '\n';
    char buf[64];
    for (Eigen::Index i = 0; i < cs.phi.rows(); ++i) {
        for (Eigen::Index j = 0; j < cs.phi.cols(); ++j) {
            const auto res = std::to_chars(buf, buf + sizeof(buf), cs.phi(i, j));
            out.write(buf, res.ptr - buf);
            out.put(j + 1 == cs.phi.cols() ? '\n' : ',');
        }
    }
}

ConstraintSet loadConstraintSet(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw MalformedFile("loadConstraintSet: cannot open " + path);
    }
    ConstraintSet cs;
    std::string line;
    std::vector<std::vector<double>> rows;
    bool haveKind = false, haveTilde = false, haveC = false;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        std::istringstream ss(line);
        std::string head;
        std::getline(ss, head, ',');
        if (head == "kind") {
            std::string k;
            std::getline(ss, k);
            if (!k.empty() && k.back() == '\r') k.pop_back();
            if (k == "equality") cs.kind = ConstraintKind::Equality;
            else if (k == "inequality") cs.kind = ConstraintKind::Inequality;
            else throw MalformedFile("loadConstraintSet: unknown kind " + k);
            haveKind = true;
        } else if (head == "phiTilde" || head == "compromised") {
            std::vector<double> vals;
            std::string cell;
            while (std::getline(ss, cell, ',')) {
                if (!cell.empty() && cell.back() == '\r') cell.pop_back();
                vals.push_back(std::stod(cell));
            }
            if (head == "phiTilde") {
                cs.phiTilde.resize(static_cast<Eigen::Index>(vals.size()));
                for (size_t i = 0; i < vals.size(); ++i) cs.phiTilde(static_cast<Eigen::Index>(i)) = vals[i];
                haveTilde = true;
            } else {
                cs.compromised.clear();
                for (double v : vals) cs.compromised.push_back(static_cast<Eigen::Index>(v));
                haveC = true;
            }
        } else {
            std::vector<double> row;
            std::istringstream rs(line);
            std::string cell;
            while (std::getline(rs, cell, ',')) {
                if (!cell.empty() && cell.back() == '\r') cell.pop_back();
                try {
                    row.push_back(std::stod(cell));
                } catch (const std::exception&) {
                    throw MalformedFile("loadConstraintSet: bad matrix cell in " + path);
                }
            }
            if (!rows.empty() && row.size() != rows.front().size()) {
                throw MalformedFile("loadConstraintSet: ragged phi rows in " + path);
            }
            rows.push_back(std::move(row));
        }
    }
    if (!haveKind || !haveTilde || !haveC) {
        throw MalformedFile("loadConstraintSet: missing header lines in " + path);
    }
    const Eigen::Index k = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index r = k > 0 ? static_cast<Eigen::Index>(rows.front().size()) : 0;
    cs.phi.resize(k, r);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < r; ++j) {
            cs.phi(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
        }
    }
    cs.validate();
    return cs;
}

}  // namespace physadv
