#include "ulr/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ulr::report {

std::string format_double(double v)
{
    if (!std::isfinite(v))
        return "null";
    if (v == 0.0)
        return "0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void emit(std::ostringstream& os, const Json& j, int depth)
{
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(2 * depth), ' ');
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first)
                os << ",\n";
            first = false;
            os << pad << Json(it.key()).dump() << ": ";
            emit(os, it.value(), depth + 1);
        }
        os << '\n' << close << '}';
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            os << "[]";
            return;
        }
        os << "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i)
                os << ",\n";
            os << pad;
            emit(os, j[i], depth + 1);
        }
        os << '\n' << close << ']';
        return;
    }
    case Json::value_t::number_float:
        os << format_double(j.get<double>());
        return;
    default:
        os << j.dump();
        return;
    }
}

} // namespace

std::string dump_json(const Json& j)
{
    std::ostringstream os;
    emit(os, j, 0);
    os << '\n';
    return os.str();
}

void Table::add(std::vector<double> row)
{
    if (row.size() != columns.size())
        throw std::logic_error("Table::add: row width differs from the header");
    rows.push_back(std::move(row));
}

Json Table::to_json() const
{
    Json out = Json::object();
    out["columns"] = columns;
    Json rs = Json::array();
    for (const auto& r : rows)
        rs.push_back(r);
    out["rows"] = rs;
    return out;
}

std::string to_csv(const Table& t)
{
    std::ostringstream os;
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i)
            os << (i ? "," : "") << format_double(r[i]);
        os << '\n';
    }
    return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::error_code ec;
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + path.string());
    f << content;
    if (!f)
        throw std::runtime_error("write failed for " + path.string());
}

} // namespace ulr::report
