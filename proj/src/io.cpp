#include "pencilnorm/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace pn::io {

Json matrix_to_json(const CMat& M) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            row.push_back(Json::array({M(i, j).real(), M(i, j).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

CMat matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw std::runtime_error("matrix: expected non-empty array");
    const Eigen::Index rows = Eigen::Index(j.size());
    const Eigen::Index cols = Eigen::Index(j.at(0).size());
    CMat M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const Json& row = j.at(std::size_t(i));
        if (Eigen::Index(row.size()) != cols) throw std::runtime_error("matrix: ragged rows");
        for (Eigen::Index c = 0; c < cols; ++c) {
            const Json& e = row.at(std::size_t(c));
            if (e.is_number())
                M(i, c) = Complex(e.get<double>(), 0.0);
            else if (e.is_array() && e.size() == 2)
                M(i, c) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
            else
                throw std::runtime_error("matrix: entries must be numbers or [re, im]");
        }
    }
    return M;
}

Json vector_to_json(const RVec& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

RVec vector_from_json(const Json& j) {
    if (!j.is_array()) throw std::runtime_error("vector: expected array");
    RVec v(Eigen::Index(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j.at(std::size_t(i)).get<double>();
    return v;
}

region::CurveSpec curve_from_json(const Json& j) {
    if (j.contains("phi")) {
        region::CurveSpec c;
        CMat phi = matrix_from_json(j.at("phi"));
        if (phi.rows() != 2 || phi.cols() != 2) throw std::runtime_error("curve: phi must be 2x2");
        c.phi = phi;
        c.psi.setZero();
        if (j.contains("psi")) {
            CMat psi = matrix_from_json(j.at("psi"));
            if (psi.rows() != 2 || psi.cols() != 2)
                throw std::runtime_error("curve: psi must be 2x2");
            c.psi = psi;
        }
        return c;
    }
    const std::string kind = j.at("kind").get<std::string>();
    const double a = j.value("a", 0.0), b = j.value("b", 0.0);
    using region::CurveKind;
    static const std::vector<std::pair<std::string, CurveKind>> kinds = {
        {"unit_circle", CurveKind::UnitCircle},
        {"unit_circle_arc", CurveKind::UnitCircleArc},
        {"circle_complement_arc", CurveKind::CircleComplementArc},
        {"imag_axis", CurveKind::ImagAxis},
        {"imag_interval", CurveKind::ImagInterval},
        {"imag_complement", CurveKind::ImagComplement},
        {"real_axis", CurveKind::RealAxis},
        {"real_interval", CurveKind::RealInterval},
        {"real_complement", CurveKind::RealComplement},
        {"real_halfline_geq", CurveKind::RealHalflineGeq},
        {"real_halfline_leq", CurveKind::RealHalflineLeq},
    };
    for (const auto& [name, k] : kinds)
        if (name == kind) return region::make_curve(k, a, b);
    throw std::runtime_error("curve: unknown kind '" + kind + "'");
}

Json curve_to_json(const region::CurveSpec& c) {
    Json j;
    j["phi"] = matrix_to_json(c.phi);
    j["psi"] = matrix_to_json(c.psi);
    return j;
}

namespace {

Eigen::Index require_index(const Json& j, const char* key) {
    if (!j.contains(key)) throw std::runtime_error(std::string("pencil: missing '") + key + "'");
    return j.at(key).get<Eigen::Index>();
}

} // namespace

pencil::PencilSpec pencil_from_json(const Json& j) {
    pencil::PencilSpec pen;
    if (j.contains("F")) {
        pen.F = matrix_from_json(j.at("F"));
        pen.G = matrix_from_json(j.at("G"));
        if (j.contains("E")) pen.E = matrix_from_json(j.at("E"));
        pen.validate();
        return pen;
    }
    const std::string family = j.at("family").get<std::string>();
    if (family == "toeplitz")
        pen = pencil::toeplitz(require_index(j, "n"));
    else if (family == "hankel_powers")
        pen = pencil::hankel_powers(require_index(j, "n"));
    else if (family == "cosine")
        pen = pencil::cosine(require_index(j, "n"));
    else if (family == "sine")
        pen = pencil::sine(require_index(j, "n"));
    else if (family == "vector_poly")
        pen = pencil::vector_poly(require_index(j, "k"), require_index(j, "l"));
    else if (family == "jacobi")
        pen = pencil::jacobi(vector_from_json(j.at("alphas")), vector_from_json(j.at("betas")));
    else if (family == "jacobi_legendre")
        pen = pencil::jacobi_legendre(require_index(j, "n"));
    else if (family == "controllability")
        pen = pencil::controllability(matrix_from_json(j.at("A")), matrix_from_json(j.at("B")));
    else if (family == "descriptor")
        pen = pencil::descriptor(matrix_from_json(j.at("Ed")), matrix_from_json(j.at("A")),
                                 matrix_from_json(j.at("B")));
    else if (family == "hankel_block")
        pen = pencil::hankel_block(require_index(j, "n1"), require_index(j, "n2"));
    else if (family == "toeplitz_with_free_block")
        pen = pencil::toeplitz_with_free_block(require_index(j, "n1"), require_index(j, "n2"));
    else
        throw std::runtime_error("pencil: unknown family '" + family + "'");
    if (j.contains("E")) {
        const Json& e = j.at("E");
        if (e.is_string() && e.get<std::string>() == "normalized")
            pen.E = CMat::Identity(pen.n(), pen.n()) / std::sqrt(double(pen.n()));
        else
            pen.E = matrix_from_json(e);
    }
    if (pen.block) {
        if (j.contains("E1")) pen.block->E1 = matrix_from_json(j.at("E1"));
        if (j.contains("E2")) pen.block->E2 = matrix_from_json(j.at("E2"));
    }
    pen.validate();
    return pen;
}

Json decomposition_to_json(const decomp::AtomicDecomposition& d) {
    Json j;
    j["rank"] = d.atoms.size();
    Json atoms = Json::array(), points = Json::array();
    for (const CVec& a : d.atoms) atoms.push_back(matrix_to_json(a));
    for (const region::HomPoint& p : d.points)
        points.push_back(Json::array({Json::array({p.mu.real(), p.mu.imag()}),
                                      Json::array({p.nu.real(), p.nu.imag()})}));
    j["atoms"] = std::move(atoms);
    j["points"] = std::move(points);
    j["weights"] = vector_to_json(d.weights);
    j["residual"] = d.residual;
    j["merged_clusters"] = d.merged_clusters;
    return j;
}

Json certificate_to_json(const gauge::DualCertificate& c) {
    Json j;
    j["Z"] = matrix_to_json(c.Z);
    j["P"] = matrix_to_json(c.P);
    j["Q"] = matrix_to_json(c.Q);
    return j;
}

gauge::DualCertificate certificate_from_json(const Json& j) {
    gauge::DualCertificate c;
    c.Z = matrix_from_json(j.at("Z"));
    c.P = matrix_from_json(j.at("P"));
    c.Q = matrix_from_json(j.at("Q"));
    return c;
}

Json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        throw std::runtime_error("parse error in '" + path + "': " + e.what());
    }
    return j;
}

void save_json(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed on '" + path + "'");
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::pair<double, double>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << header << '\n';
    char buf[64];
    for (const auto& [a, b] : rows) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g", a, b);
        out << buf << '\n';
    }
    if (!out) throw std::runtime_error("write failed on '" + path + "'");
}

} // namespace pn::io
