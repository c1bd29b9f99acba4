#include "regionopt/field_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace regionopt {

std::string format_real(double value)
{
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_field_csv(std::ostream& out, const ScalarField& field)
{
    const GridSpec& g = field.grid();
    out << "x1,x2,value\n";
    for (int i = 1; i <= g.n() + 1; ++i) {
        for (int j = 1; j <= g.n() + 1; ++j) {
            out << format_real(g.x(i)) << ',' << format_real(g.x(j)) << ',' << format_real(field(i, j)) << '\n';
        }
    }
}

void write_field_csv(const std::filesystem::path& path, const ScalarField& field)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_field_csv(out, field);
}

namespace {

double parse_number(const std::string& text, std::size_t line_no)
{
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw std::invalid_argument("grid CSV line " + std::to_string(line_no) + ": not a number: '" + text + "'");
    }
    return v;
}

int node_of(double x, const GridSpec& grid, std::size_t line_no)
{
    const double scaled = x * grid.n();
    const double rounded = std::round(scaled);
    if (std::abs(scaled - rounded) > 1e-6 || rounded < 0 || rounded > grid.n()) {
        throw std::invalid_argument("grid CSV line " + std::to_string(line_no) + ": coordinate " +
                                    std::to_string(x) + " is not a node of the N = " + std::to_string(grid.n()) +
                                    " grid");
    }
    return static_cast<int>(rounded) + 1;
}

}  // namespace

ScalarField read_field_csv(std::istream& in, const GridSpec& grid)
{
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw std::invalid_argument("grid CSV: empty input");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "x1,x2,value") throw std::invalid_argument("grid CSV: expected header 'x1,x2,value'");

    std::vector<double> values(grid.node_count(), 0.0);
    std::vector<char> seen(grid.node_count(), 0);
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string c1, c2, c3, extra;
        if (!std::getline(ss, c1, ',') || !std::getline(ss, c2, ',') || !std::getline(ss, c3, ',') ||
            std::getline(ss, extra, ',')) {
            throw std::invalid_argument("grid CSV line " + std::to_string(line_no) + ": expected 3 columns");
        }
        const int i = node_of(parse_number(c1, line_no), grid, line_no);
        const int j = node_of(parse_number(c2, line_no), grid, line_no);
        const std::size_t idx = grid.node_index(i, j);
        if (seen[idx]) throw std::invalid_argument("grid CSV line " + std::to_string(line_no) + ": duplicate node");
        seen[idx] = 1;
        values[idx] = parse_number(c3, line_no);
    }
    for (char s : seen) {
        if (!s) throw std::invalid_argument("grid CSV: missing nodes for the N = " + std::to_string(grid.n()) + " grid");
    }
    return ScalarField(grid, std::move(values));
}

ScalarField read_field_csv(const std::filesystem::path& path, const GridSpec& grid)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open grid CSV " + path.string());
    return read_field_csv(in, grid);
}

void write_space_time_checkpoint(const std::filesystem::path& dir, const SpaceTimeField& field)
{
    std::filesystem::create_directories(dir);
    for (int k = 1; k <= field.grid().m() + 1; ++k) {
        char name[32];
        std::snprintf(name, sizeof(name), "field_k%04d.csv", k);
        write_field_csv(dir / name, field.slice(k));
    }
}

}  // namespace regionopt
