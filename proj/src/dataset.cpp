#include "softdtw/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

namespace softdtw {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \r\n\t");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \r\n\t");
    return s.substr(first, last - first + 1);
}

bool is_missing(std::string_view token) {
    if (token.empty()) return true;
    std::string lower(token);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return lower == "nan" || lower == "?";
}

bool parse_double(std::string_view token, double& out) {
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    const auto* end = token.data() + token.size();
    const auto res = std::from_chars(token.data(), end, out);
    return res.ec == std::errc() && res.ptr == end;
}

std::runtime_error line_error(const std::string& name, std::size_t line, const std::string& what) {
    return std::runtime_error(name + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_fields(std::string_view line, char delimiter) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delimiter, start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::vector<int> Dataset::classes() const {
    std::vector<int> out(labels);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.name = name;
    out.label_names = label_names;
    for (auto i : indices) {
        out.series.push_back(series.at(i));
        if (labeled()) out.labels.push_back(labels.at(i));
    }
    return out;
}

void Dataset::validate() const {
    if (labeled() && labels.size() != series.size())
        throw std::logic_error("dataset labels do not line up with its series");
    for (const auto& s : series)
        if (s.empty()) throw std::logic_error("dataset contains an empty series");
}

Dataset parse_ucr(std::istream& in, std::string name) {
    Dataset out;
    out.name = std::move(name);
    std::vector<std::string> raw_labels;
    char delimiter = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty()) continue;
        if (delimiter == 0) delimiter = body.find('\t') != std::string_view::npos ? '\t' : ',';

        auto fields = split_fields(body, delimiter);
        while (fields.size() > 1 && is_missing(fields.back())) fields.pop_back();
        if (fields.size() < 2) throw line_error(out.name, line_no, "row has no values");
        if (fields.front().empty()) throw line_error(out.name, line_no, "missing label");

        std::vector<double> values;
        values.reserve(fields.size() - 1);
        for (std::size_t k = 1; k < fields.size(); ++k) {
            if (is_missing(fields[k]))
                throw line_error(out.name, line_no, "missing value inside the series");
            double v = 0.0;
            if (!parse_double(fields[k], v) || !std::isfinite(v))
                throw line_error(out.name, line_no,
                                 "cannot parse value '" + std::string(fields[k]) + "'");
            values.push_back(v);
        }
        raw_labels.emplace_back(fields.front());
        out.series.emplace_back(values);
    }
    if (out.series.empty()) throw std::runtime_error(out.name + ": no data rows");

    // Integer labels (including integral floats such as 1.0000000e+00) are
    // kept; anything else goes through a sorted dictionary.
    bool integral = true;
    std::vector<int> ints;
    for (const auto& raw : raw_labels) {
        double v = 0.0;
        if (!parse_double(raw, v) || v != std::floor(v) || std::abs(v) > 1e9) {
            integral = false;
            break;
        }
        ints.push_back(static_cast<int>(v));
    }
    if (integral) {
        out.labels = std::move(ints);
    } else {
        std::map<std::string, int> dict;
        for (const auto& raw : raw_labels) dict.emplace(raw, 0);
        int next = 0;
        for (auto& [key, id] : dict) {
            id = next++;
            out.label_names.push_back(key);
        }
        for (const auto& raw : raw_labels) out.labels.push_back(dict.at(raw));
    }
    return out;
}

Dataset load_ucr(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return parse_ucr(in, path.stem().string());
}

void write_ucr(const Dataset& data, std::ostream& out, char delimiter) {
    data.validate();
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.labeled()) {
            const int label = data.labels[i];
            if (!data.label_names.empty())
                out << data.label_names.at(static_cast<std::size_t>(label));
            else
                out << label;
        } else {
            out << 0;
        }
        const auto& s = data.series[i];
        if (s.dims() != 1) throw std::domain_error("UCR files hold univariate series only");
        for (Eigen::Index t = 0; t < s.length(); ++t) out << delimiter << format_double(s.values()(0, t));
        out << '\n';
    }
}

void write_ucr(const Dataset& data, const std::filesystem::path& path, char delimiter) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_ucr(data, out, delimiter);
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<Dataset> split_dataset(const Dataset& data, std::span<const double> fractions,
                                   std::uint64_t seed) {
    if (fractions.empty()) throw std::domain_error("no split fractions given");
    double total = 0.0;
    for (double f : fractions) {
        if (!(f > 0.0)) throw std::domain_error("split fractions must be positive");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::domain_error("split fractions must sum to one");
    data.validate();

    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::size_t>> parts(fractions.size());

    auto partition = [&](std::vector<std::size_t> members) {
        std::shuffle(members.begin(), members.end(), rng);
        double cum = 0.0;
        std::size_t begin = 0;
        for (std::size_t k = 0; k < fractions.size(); ++k) {
            cum += fractions[k];
            const auto end = k + 1 == fractions.size()
                                 ? members.size()
                                 : std::min(members.size(), static_cast<std::size_t>(std::llround(
                                                                cum * static_cast<double>(members.size()))));
            for (std::size_t i = begin; i < std::max(begin, end); ++i) parts[k].push_back(members[i]);
            begin = std::max(begin, end);
        }
    };

    if (data.labeled()) {
        for (int c : data.classes()) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < data.size(); ++i)
                if (data.labels[i] == c) members.push_back(i);
            partition(std::move(members));
        }
        for (auto& part : parts) std::shuffle(part.begin(), part.end(), rng);
    } else {
        std::vector<std::size_t> all(data.size());
        std::iota(all.begin(), all.end(), 0);
        partition(std::move(all));
    }

    std::vector<Dataset> out;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        if (parts[k].empty())
            throw std::domain_error("split " + std::to_string(k) + " would receive no series");
        out.push_back(data.subset(parts[k]));
    }
    return out;
}

}  // namespace softdtw
