#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace softdtw {

// Plain-text experiment record:
//
//   [meta]        command, timestamp
//   [config]      key = value, in insertion order
//   [metrics]     key = value
//   [table NAME]  CSV block, header row first
//   [timings]     key = seconds
//
// Numbers are written in shortest round-trip form.
struct ExperimentReport {
    struct Table {
        std::string name;
        std::vector<std::string> columns;
        std::vector<std::vector<std::string>> rows;

        void add_row(std::vector<std::string> row);
        void add_row(const std::vector<double>& row);
        friend bool operator==(const Table&, const Table&) = default;
    };

    using Entries = std::vector<std::pair<std::string, std::string>>;

    std::string command;
    std::string timestamp;
    Entries config;
    Entries metrics;
    std::vector<Table> tables;
    Entries timings;

    void set_config(const std::string& key, const std::string& value);
    void set_config(const std::string& key, const char* value) { set_config(key, std::string(value)); }
    void set_config(const std::string& key, double value);
    void set_config(const std::string& key, long long value);
    void set_config(const std::string& key, int value) { set_config(key, static_cast<long long>(value)); }
    void set_config(const std::string& key, unsigned long long value);
    void set_config(const std::string& key, unsigned long value) {
        set_config(key, static_cast<unsigned long long>(value));
    }
    void set_config(const std::string& key, bool value) { set_config(key, std::string(value ? "true" : "false")); }
    void set_metric(const std::string& key, double value);
    void set_timing(const std::string& key, double seconds);
    Table& add_table(const std::string& name, std::vector<std::string> columns);

    // Lookup by key; throws std::out_of_range when absent.
    const std::string& config_value(const std::string& key) const;
    double metric(const std::string& key) const;
    const Table& table(const std::string& name) const;

    // Copy without the timestamp and timings, for run-to-run comparison.
    ExperimentReport without_volatile() const;

    friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

std::string format_number(double value);
double parse_number(const std::string& text);

// Current UTC time, ISO 8601.
std::string utc_timestamp();

void emit_report(const ExperimentReport& report, std::ostream& out);
void emit_report(const ExperimentReport& report, const std::filesystem::path& path);
ExperimentReport parse_report(std::istream& in);
ExperimentReport load_report(const std::filesystem::path& path);

}  // namespace softdtw
