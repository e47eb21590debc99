#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "softdtw/time_series.hpp"

namespace softdtw {

// Labeled (or unlabeled) collection of series, as stored in UCR files.
struct Dataset {
    std::string name;
    std::vector<TimeSeries> series;
    // Empty for unlabeled data; otherwise one label per series.
    std::vector<int> labels;
    // Set when the file held non-integer labels: label k stands for label_names[k].
    std::vector<std::string> label_names;

    std::size_t size() const { return series.size(); }
    bool labeled() const { return !labels.empty(); }
    // Sorted distinct labels.
    std::vector<int> classes() const;
    Dataset subset(std::span<const std::size_t> indices) const;
    // Throws if labels do not line up with series.
    void validate() const;
};

// Parses label-first rows separated by commas or tabs (detected from the
// first data row). Trailing empty or NaN fields are dropped; interior ones
// are an error. Errors name the offending line.
Dataset parse_ucr(std::istream& in, std::string name = "");
Dataset load_ucr(const std::filesystem::path& path);

void write_ucr(const Dataset& data, std::ostream& out, char delimiter = ',');
void write_ucr(const Dataset& data, const std::filesystem::path& path, char delimiter = ',');

// Seeded shuffle followed by a contiguous partition, per class when labels
// are present. Fractions must be positive and sum to one; every part must
// receive at least one series.
std::vector<Dataset> split_dataset(const Dataset& data, std::span<const double> fractions,
                                   std::uint64_t seed);

}  // namespace softdtw
