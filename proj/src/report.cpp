#include "softdtw/report.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace softdtw {

namespace {

void check_key(const std::string& key) {
    if (key.empty() || key.find_first_of("=\n\r[]") != std::string::npos || key.front() == ' ' ||
        key.back() == ' ')
        throw std::invalid_argument("invalid report key '" + key + "'");
}

void check_value(const std::string& value) {
    if (value.find_first_of("\n\r") != std::string::npos)
        throw std::invalid_argument("report values must be single-line");
}

void check_cell(const std::string& cell) {
    if (cell.find_first_of(",\n\r") != std::string::npos)
        throw std::invalid_argument("table cells may not contain commas or newlines");
}

void upsert(ExperimentReport::Entries& entries, const std::string& key, std::string value) {
    check_key(key);
    check_value(value);
    for (auto& [k, v] : entries)
        if (k == key) {
            v = std::move(value);
            return;
        }
    entries.emplace_back(key, std::move(value));
}

const std::string& lookup(const ExperimentReport::Entries& entries, const std::string& key) {
    for (const auto& [k, v] : entries)
        if (k == key) return v;
    throw std::out_of_range("no report entry '" + key + "'");
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cells;
}

void write_entries(std::ostream& out, const char* section, const ExperimentReport::Entries& entries) {
    out << '[' << section << "]\n";
    for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
}

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

double parse_number(const std::string& text) {
    if (text == "nan") return std::nan("");
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw std::invalid_argument("not a number: '" + text + "'");
    return value;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void ExperimentReport::Table::add_row(std::vector<std::string> row) {
    if (row.size() != columns.size()) throw std::invalid_argument("row width does not match table '" + name + "'");
    for (const auto& c : row) check_cell(c);
    rows.push_back(std::move(row));
}

void ExperimentReport::Table::add_row(const std::vector<double>& row) {
    std::vector<std::string> cells;
    for (double v : row) cells.push_back(format_number(v));
    add_row(std::move(cells));
}

void ExperimentReport::set_config(const std::string& key, const std::string& value) { upsert(config, key, value); }
void ExperimentReport::set_config(const std::string& key, double value) { upsert(config, key, format_number(value)); }
void ExperimentReport::set_config(const std::string& key, long long value) {
    upsert(config, key, std::to_string(value));
}
void ExperimentReport::set_config(const std::string& key, unsigned long long value) {
    upsert(config, key, std::to_string(value));
}
void ExperimentReport::set_metric(const std::string& key, double value) {
    upsert(metrics, key, format_number(value));
}
void ExperimentReport::set_timing(const std::string& key, double seconds) {
    upsert(timings, key, format_number(seconds));
}

ExperimentReport::Table& ExperimentReport::add_table(const std::string& name, std::vector<std::string> columns) {
    check_key(name);
    if (columns.empty()) throw std::invalid_argument("table needs at least one column");
    for (const auto& c : columns) check_cell(c);
    for (const auto& t : tables)
        if (t.name == name) throw std::invalid_argument("duplicate table '" + name + "'");
    tables.push_back({name, std::move(columns), {}});
    return tables.back();
}

const std::string& ExperimentReport::config_value(const std::string& key) const { return lookup(config, key); }
double ExperimentReport::metric(const std::string& key) const { return parse_number(lookup(metrics, key)); }

const ExperimentReport::Table& ExperimentReport::table(const std::string& name) const {
    for (const auto& t : tables)
        if (t.name == name) return t;
    throw std::out_of_range("no report table '" + name + "'");
}

ExperimentReport ExperimentReport::without_volatile() const {
    auto copy = *this;
    copy.timestamp.clear();
    copy.timings.clear();
    return copy;
}

void emit_report(const ExperimentReport& report, std::ostream& out) {
    check_value(report.command);
    check_value(report.timestamp);
    out << "[meta]\n";
    out << "command = " << report.command << '\n';
    out << "timestamp = " << report.timestamp << '\n';
    write_entries(out, "config", report.config);
    write_entries(out, "metrics", report.metrics);
    for (const auto& t : report.tables) {
        out << "[table " << t.name << "]\n";
        for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
        out << '\n';
        for (const auto& row : t.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
            out << '\n';
        }
    }
    write_entries(out, "timings", report.timings);
    if (!out) throw std::runtime_error("failed to write report");
}

void emit_report(const ExperimentReport& report, const std::filesystem::path& path) {
    std::ostringstream buffer;
    emit_report(report, buffer);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report " + path.string());
    out << buffer.str();
    out.flush();
    if (!out) throw std::runtime_error("failed to write report " + path.string());
}

ExperimentReport parse_report(std::istream& in) {
    ExperimentReport report;
    enum class Section { none, meta, config, metrics, timings, table } section = Section::none;
    ExperimentReport::Table* table = nullptr;
    bool header_pending = false;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) {
        throw std::runtime_error("report line " + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            const auto name = line.substr(1, line.size() - 2);
            table = nullptr;
            if (name == "meta") section = Section::meta;
            else if (name == "config") section = Section::config;
            else if (name == "metrics") section = Section::metrics;
            else if (name == "timings") section = Section::timings;
            else if (name.rfind("table ", 0) == 0) {
                section = Section::table;
                report.tables.push_back({name.substr(6), {}, {}});
                table = &report.tables.back();
                header_pending = true;
            } else {
                fail("unknown section [" + name + "]");
            }
            continue;
        }
        if (section == Section::table) {
            auto cells = split_csv(line);
            if (header_pending) {
                table->columns = std::move(cells);
                header_pending = false;
            } else {
                if (cells.size() != table->columns.size()) fail("row width mismatch");
                table->rows.push_back(std::move(cells));
            }
            continue;
        }
        const auto eq = line.find(" = ");
        std::string key, value;
        if (eq != std::string::npos) {
            key = line.substr(0, eq);
            value = line.substr(eq + 3);
        } else if (line.size() >= 2 && line.compare(line.size() - 2, 2, " =") == 0) {
            key = line.substr(0, line.size() - 2);
        } else {
            fail("expected 'key = value'");
        }
        switch (section) {
            case Section::meta:
                if (key == "command") report.command = value;
                else if (key == "timestamp") report.timestamp = value;
                else fail("unknown meta key '" + key + "'");
                break;
            case Section::config: report.config.emplace_back(key, value); break;
            case Section::metrics: report.metrics.emplace_back(key, value); break;
            case Section::timings: report.timings.emplace_back(key, value); break;
            default: fail("entry outside any section");
        }
    }
    return report;
}

ExperimentReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open report " + path.string());
    return parse_report(in);
}

}  // namespace softdtw
