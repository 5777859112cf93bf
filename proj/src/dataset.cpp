#include "cornet/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cornet {

void TreatmentDataset::validate() const {
    if (t.size() != n() || y.size() != n()) throw shape_error("dataset: x/t/y row counts differ");
    if (!x.all_finite()) throw numeric_error("dataset: non-finite covariate");
    for (std::size_t i = 0; i < n(); ++i) {
        if (t[i] != 0 && t[i] != 1) throw numeric_error("dataset: treatment outside {0,1} at row " + std::to_string(i + 1));
        if (!std::isfinite(y[i])) throw numeric_error("dataset: non-finite outcome at row " + std::to_string(i + 1));
    }
}

std::size_t TreatmentDataset::arm_count(int arm) const {
    std::size_t c = 0;
    for (int v : t)
        if (v == arm) ++c;
    return c;
}

std::vector<std::size_t> TreatmentDataset::arm_rows(int arm) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] == arm) rows.push_back(i);
    return rows;
}

void CombinedData::validate() const {
    obs.validate();
    rand.validate();
    if (obs.dim() != rand.dim()) throw shape_error("combined data: covariate dimensions differ");
    for (int arm : {0, 1})
        if (rand.arm_count(arm) < 2)
            throw protocol_error("randomized data needs >= 2 samples in arm " + std::to_string(arm));
}

static std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

static double parse_cell(const std::string& cell, std::size_t row, const std::string& col) {
    double v = 0.0;
    const char* b = cell.data();
    const char* e = b + cell.size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e)
        throw parse_error("non-numeric cell '" + cell + "' at row " + std::to_string(row) + ", column " + col);
    return v;
}

TreatmentDataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw parse_error("'" + path + "': empty file");
    const auto header = split_line(line);
    if (header.size() < 3) throw parse_error("'" + path + "': header needs x1..xd,t,y");
    const std::size_t d = header.size() - 2;
    for (std::size_t j = 0; j < d; ++j) {
        const std::string want = "x" + std::to_string(j + 1);
        if (header[j] != want) throw parse_error("'" + path + "': expected column '" + want + "', found '" + header[j] + "'");
    }
    if (header[d] != "t" || header[d + 1] != "y") throw parse_error("'" + path + "': last columns must be t,y");

    std::vector<Vec> xrows;
    std::vector<int> ts;
    Vec ys;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size())
            throw parse_error("'" + path + "': row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                              " cells, expected " + std::to_string(header.size()));
        Vec xr(d);
        for (std::size_t j = 0; j < d; ++j) xr[j] = parse_cell(cells[j], row, header[j]);
        const double tv = parse_cell(cells[d], row, "t");
        if (tv != 0.0 && tv != 1.0)
            throw parse_error("t value '" + cells[d] + "' outside {0,1} at row " + std::to_string(row) + ", column t");
        const double yv = parse_cell(cells[d + 1], row, "y");
        xrows.push_back(std::move(xr));
        ts.push_back(static_cast<int>(tv));
        ys.push_back(yv);
    }

    TreatmentDataset ds;
    ds.x = Matrix(xrows.size(), d);
    for (std::size_t i = 0; i < xrows.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) ds.x(i, j) = xrows[i][j];
    ds.t = std::move(ts);
    ds.y = std::move(ys);
    ds.validate();
    return ds;
}

static void format_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

void write_csv(const TreatmentDataset& ds, const std::string& path) {
    ds.validate();
    std::ofstream out(path);
    if (!out) throw parse_error("cannot open '" + path + "' for writing");
    std::string buf;
    for (std::size_t j = 0; j < ds.dim(); ++j) {
        if (j) buf += ',';
        buf += "x" + std::to_string(j + 1);
    }
    buf += ",t,y\n";
    for (std::size_t i = 0; i < ds.n(); ++i) {
        for (std::size_t j = 0; j < ds.dim(); ++j) {
            if (j) buf += ',';
            format_double(buf, ds.x(i, j));
        }
        buf += ',';
        buf += std::to_string(ds.t[i]);
        buf += ',';
        format_double(buf, ds.y[i]);
        buf += '\n';
    }
    out << buf;
}

void write_meta(const std::string& path, const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ofstream out(path);
    if (!out) throw parse_error("cannot open '" + path + "' for writing");
    for (const auto& [k, v] : entries) out << k << '=' << v << '\n';
}

std::vector<std::pair<std::string, std::string>> read_meta(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open '" + path + "'");
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw parse_error("'" + path + "': bad key=value line: " + line);
        out.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    return out;
}

void write_tau_csv(const Matrix& x, const Vec& tau, const std::string& path) {
    if (x.rows != tau.size()) throw shape_error("write_tau_csv: row counts differ");
    std::ofstream out(path);
    if (!out) throw parse_error("cannot open '" + path + "' for writing");
    std::string buf;
    for (std::size_t j = 0; j < x.cols; ++j) {
        if (j) buf += ',';
        buf += "x" + std::to_string(j + 1);
    }
    buf += ",tau\n";
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t j = 0; j < x.cols; ++j) {
            if (j) buf += ',';
            format_double(buf, x(i, j));
        }
        buf += ',';
        format_double(buf, tau[i]);
        buf += '\n';
    }
    out << buf;
}

void load_tau_csv(const std::string& path, Matrix& x, Vec& tau) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw parse_error("'" + path + "': empty file");
    const auto header = split_line(line);
    if (header.size() < 2 || header.back() != "tau") throw parse_error("'" + path + "': header needs x1..xd,tau");
    const std::size_t d = header.size() - 1;
    std::vector<Vec> xrows;
    Vec taus;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size()) throw parse_error("'" + path + "': ragged row " + std::to_string(row));
        Vec xr(d);
        for (std::size_t j = 0; j < d; ++j) xr[j] = parse_cell(cells[j], row, header[j]);
        taus.push_back(parse_cell(cells[d], row, "tau"));
        xrows.push_back(std::move(xr));
    }
    x = Matrix(xrows.size(), d);
    for (std::size_t i = 0; i < xrows.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) x(i, j) = xrows[i][j];
    tau = std::move(taus);
}

}  // namespace cornet
