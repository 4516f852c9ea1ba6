#include "evqr/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace evqr {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, const std::string& path,
                    int lineno) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    while (ptr != last && (*ptr == ' ' || *ptr == '\t' || *ptr == '\r')) ++ptr;
    if (ec != std::errc() || ptr != last)
        throw ParseError(path + ":" + std::to_string(lineno) +
                         ": cannot parse number '" + s + "'");
    return v;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError(path + ": cannot open file");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

// Header "w,<prefix>1,...,<prefix>{d}" for one coordinate group, or the
// two-group nu layout. Returns the column counts per group.
std::vector<int> check_header(const std::vector<std::string>& cols,
                              const std::vector<std::string>& prefixes,
                              const std::string& path) {
    if (cols.empty() || cols[0] != "w")
        throw ParseError(path + ":1: header must start with 'w'");
    std::vector<int> counts(prefixes.size(), 0);
    size_t c = 1;
    for (size_t g = 0; g < prefixes.size(); ++g) {
        int k = 0;
        while (c < cols.size() &&
               cols[c] == prefixes[g] + std::to_string(k + 1)) {
            ++k;
            ++c;
        }
        counts[g] = k;
    }
    if (c != cols.size())
        throw ParseError(path + ":1: unexpected header column '" + cols[c] +
                         "'");
    return counts;
}

DiscreteMeasure parse_measure(const std::vector<std::string>& lines, int dim,
                              const std::string& path) {
    const int rows = static_cast<int>(lines.size()) - 1;
    if (rows < 1)
        throw ParseError(path + ": no data rows");
    Vector w(rows);
    Matrix pts(rows, dim);
    for (int r = 0; r < rows; ++r) {
        const int lineno = r + 2;
        const auto cols = split_csv_line(lines[r + 1]);
        if (static_cast<int>(cols.size()) != dim + 1)
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": expected " + std::to_string(dim + 1) +
                             " fields, got " + std::to_string(cols.size()));
        w[r] = parse_double(cols[0], path, lineno);
        for (int c = 0; c < dim; ++c)
            pts(r, c) = parse_double(cols[c + 1], path, lineno);
    }
    return DiscreteMeasure(std::move(w), std::move(pts));
}

void write_table(const std::string& path, const std::string& header,
                 const Matrix& rows) {
    std::ofstream out(path);
    if (!out)
        throw ParseError(path + ": cannot open file for writing");
    if (!header.empty()) out << header << "\n";
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        for (Eigen::Index j = 0; j < rows.cols(); ++j) {
            if (j > 0) out << ",";
            out << format_double(rows(i, j));
        }
        out << "\n";
    }
    if (!out)
        throw ParseError(path + ": write failed");
}

Matrix json_matrix(const nlohmann::json& j, const std::string& key,
                   const std::string& path) {
    if (!j.contains(key) || !j[key].is_array())
        throw ParseError(path + ": missing or non-array field '" + key + "'");
    const auto& rows = j[key];
    const int nr = static_cast<int>(rows.size());
    if (nr == 0)
        throw ParseError(path + ": empty matrix '" + key + "'");
    const int nc = static_cast<int>(rows[0].size());
    Matrix m(nr, nc);
    for (int r = 0; r < nr; ++r) {
        if (!rows[r].is_array() || static_cast<int>(rows[r].size()) != nc)
            throw ParseError(path + ": ragged matrix '" + key + "'");
        for (int c = 0; c < nc; ++c) m(r, c) = rows[r][c].get<double>();
    }
    return m;
}

nlohmann::json matrix_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

DiscreteMeasure load_mu_csv(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty())
        throw ParseError(path + ": empty file");
    const auto counts = check_header(split_csv_line(lines[0]), {"u"}, path);
    if (counts[0] == 0)
        throw ParseError(path + ":1: header has no u columns");
    return parse_measure(lines, counts[0], path);
}

std::pair<DiscreteMeasure, int> load_nu_csv(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty())
        throw ParseError(path + ": empty file");
    const auto counts =
        check_header(split_csv_line(lines[0]), {"x", "y"}, path);
    if (counts[0] == 0 || counts[1] == 0)
        throw ParseError(path + ":1: header needs x and y columns");
    return {parse_measure(lines, counts[0] + counts[1], path), counts[0]};
}

void write_mu_csv(const std::string& path, const DiscreteMeasure& mu) {
    std::string header = "w";
    for (int c = 0; c < mu.dim(); ++c) header += ",u" + std::to_string(c + 1);
    Matrix table(mu.size(), mu.dim() + 1);
    table.col(0) = mu.weights();
    table.rightCols(mu.dim()) = mu.points();
    write_table(path, header, table);
}

void write_nu_csv(const std::string& path, const DiscreteMeasure& nu,
                  int dim_x) {
    std::string header = "w";
    for (int c = 0; c < dim_x; ++c) header += ",x" + std::to_string(c + 1);
    for (int c = 0; c < nu.dim() - dim_x; ++c)
        header += ",y" + std::to_string(c + 1);
    Matrix table(nu.size(), nu.dim() + 1);
    table.col(0) = nu.weights();
    table.rightCols(nu.dim()) = nu.points();
    write_table(path, header, table);
}

void write_coupling_csv(const std::string& path, const Matrix& pi) {
    write_table(path, "", pi);
}

Matrix load_coupling_csv(const std::string& path) {
    const auto lines = read_lines(path);
    std::vector<std::vector<double>> rows;
    for (size_t r = 0; r < lines.size(); ++r) {
        if (lines[r].empty()) continue;
        const auto cols = split_csv_line(lines[r]);
        std::vector<double> row;
        row.reserve(cols.size());
        for (const auto& c : cols)
            row.push_back(parse_double(c, path, static_cast<int>(r) + 1));
        if (!rows.empty() && row.size() != rows[0].size())
            throw ParseError(path + ":" + std::to_string(r + 1) +
                             ": ragged row");
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw ParseError(path + ": empty coupling file");
    Matrix m(rows.size(), rows[0].size());
    for (size_t r = 0; r < rows.size(); ++r)
        for (size_t c = 0; c < rows[r].size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                rows[r][c];
    return m;
}

void write_potentials_csv(const std::string& fg_path,
                          const std::string& h_path, const Potentials& pots) {
    std::string header = "f";
    for (int c = 0; c < pots.g.cols(); ++c)
        header += ",g" + std::to_string(c + 1);
    Matrix fg(pots.f.size(), 1 + pots.g.cols());
    fg.col(0) = pots.f;
    fg.rightCols(pots.g.cols()) = pots.g;
    write_table(fg_path, header, fg);
    write_table(h_path, "h", pots.h);
}

GaussianModel load_gaussian_model(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError(path + ": cannot open file");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    if (!j.contains("m_y") || !j["m_y"].is_array())
        throw ParseError(path + ": missing or non-array field 'm_y'");
    Vector m_y(j["m_y"].size());
    for (size_t i = 0; i < j["m_y"].size(); ++i)
        m_y[static_cast<Eigen::Index>(i)] = j["m_y"][i].get<double>();
    const Matrix sxx = json_matrix(j, "sigma_xx", path);
    const Matrix sxy = json_matrix(j, "sigma_xy", path);
    const Matrix syy = json_matrix(j, "sigma_yy", path);
    try {
        return GaussianModel(std::move(m_y), SymMatrix(sxx), sxy,
                             SymMatrix(syy));
    } catch (const DimensionMismatch& e) {
        throw ParseError(path + ": " + e.what());
    } catch (const DomainError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_gaussian_model(const std::string& path,
                          const GaussianModel& model) {
    nlohmann::json j;
    j["m_y"] = std::vector<double>(model.m_y().data(),
                                   model.m_y().data() + model.m_y().size());
    j["sigma_xx"] = matrix_json(model.sigma_xx().mat());
    j["sigma_xy"] = matrix_json(model.sigma_xy());
    j["sigma_yy"] = matrix_json(model.sigma_yy().mat());
    std::ofstream out(path);
    if (!out)
        throw ParseError(path + ": cannot open file for writing");
    out << j.dump(2) << "\n";
}

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepRow>& rows) {
    Matrix table(rows.size(), 5);
    for (size_t r = 0; r < rows.size(); ++r) {
        const auto i = static_cast<Eigen::Index>(r);
        table(i, 0) = rows[r].epsilon;
        table(i, 1) = rows[r].w2_exact;
        table(i, 2) = rows[r].first_order;
        table(i, 3) = rows[r].ratio;
        table(i, 4) = rows[r].residual_over_eps2;
    }
    write_table(path, "epsilon,w2_exact,first_order,ratio,residual_over_eps2",
                table);
}

} // namespace evqr
