#ifndef ATD_DATAIO_HPP
#define ATD_DATAIO_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dataset.hpp"
#include "error.hpp"
#include "matrix.hpp"
#include "rng.hpp"
#include "text.hpp"

/**
 * @file dataio.hpp
 *
 * @brief Reading ordinal tabular data, splitting it, and generating synthetic sets.
 *
 * A schema file describes each column of a delimited text file, one line per
 * column, in file order:
 *
 *     # comment
 *     delimiter = ,
 *     header = true
 *     column buying = ordinal: low, med, high, vhigh
 *     column hobby = nominal: 1, 2, 3
 *     target class = unacc, acc, good, vgood
 *
 * Ordinal columns are encoded as `position / (levels - 1)`, nominal columns
 * one-hot, and the target by its position in the listed order. A level may
 * list aliases separated by `|` (`recommend | very_recom`); all of them map
 * to the same position, and the first is used when writing.
 */

namespace atd {

enum class ColumnKind { ordinal, nominal, target };

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::ordinal;
    /** Ordered levels; each level is a non-empty list of accepted spellings. */
    std::vector<std::vector<std::string>> levels;

    std::size_t encoded_width() const {
        switch (kind) {
        case ColumnKind::ordinal: return 1;
        case ColumnKind::nominal: return levels.size();
        case ColumnKind::target: return 0;
        }
        return 0;
    }
};

/**
 * @brief Column layout and encoding rules for one delimited file.
 */
struct DatasetSchema {
    char delimiter = ',';
    bool header = true;
    std::vector<ColumnSpec> columns;

    std::size_t target_column() const {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (columns[c].kind == ColumnKind::target) {
                return c;
            }
        }
        detail::fail(ErrorCategory::schema_violation, "schema has no target column");
    }

    int categories() const { return static_cast<int>(columns[target_column()].levels.size()); }

    std::size_t encoded_dimension() const {
        std::size_t d = 0;
        for (const auto& col : columns) {
            d += col.encoded_width();
        }
        return d;
    }

    std::vector<std::string> feature_names() const {
        std::vector<std::string> names;
        for (const auto& col : columns) {
            if (col.kind == ColumnKind::ordinal) {
                names.push_back(col.name);
            } else if (col.kind == ColumnKind::nominal) {
                for (const auto& level : col.levels) {
                    names.push_back(col.name + "=" + level.front());
                }
            }
        }
        return names;
    }

    std::vector<std::string> category_names() const {
        std::vector<std::string> names;
        for (const auto& level : columns[target_column()].levels) {
            names.push_back(level.front());
        }
        return names;
    }

    /**
     * Throws `schema_violation` unless there is exactly one target with at
     * least three levels, column names are unique, and no column lists a
     * spelling twice.
     */
    void validate() const {
        std::size_t targets = 0;
        std::unordered_map<std::string, int> seen_names;
        for (const auto& col : columns) {
            detail::require(!col.name.empty(), ErrorCategory::schema_violation, "column with empty name");
            detail::require(seen_names[col.name]++ == 0, ErrorCategory::schema_violation, "duplicate column '" + col.name + "'");
            detail::require(!col.levels.empty(), ErrorCategory::schema_violation, "column '" + col.name + "' lists no levels");
            std::unordered_map<std::string, int> spellings;
            for (const auto& level : col.levels) {
                detail::require(!level.empty(), ErrorCategory::schema_violation, "column '" + col.name + "' has an empty level");
                for (const auto& s : level) {
                    detail::require(!s.empty(), ErrorCategory::schema_violation, "column '" + col.name + "' has an empty level name");
                    detail::require(spellings[s]++ == 0, ErrorCategory::schema_violation,
                        "column '" + col.name + "' lists '" + s + "' twice");
                }
            }
            if (col.kind == ColumnKind::target) {
                ++targets;
                detail::require(col.levels.size() >= static_cast<std::size_t>(min_categories), ErrorCategory::schema_violation,
                    "target '" + col.name + "' needs at least " + std::to_string(min_categories) + " classes");
            }
        }
        detail::require(targets == 1, ErrorCategory::schema_violation,
            "schema needs exactly one target column, found " + std::to_string(targets));
    }
};

namespace detail {

inline std::vector<std::vector<std::string>> parse_levels(std::string_view list) {
    std::vector<std::vector<std::string>> levels;
    for (const auto& item : text::split(list, ',')) {
        levels.push_back(text::split(item, '|'));
    }
    return levels;
}

inline bool parse_bool(std::string_view value, std::size_t line) {
    if (value == "true" || value == "yes" || value == "1") {
        return true;
    }
    if (value == "false" || value == "no" || value == "0") {
        return false;
    }
    fail(ErrorCategory::parse, "schema line " + std::to_string(line) + ": '" + std::string(value) + "' is not a boolean");
}

}

/** Parse schema text; see the file comment for the format. */
inline DatasetSchema parse_schema(std::string_view source) {
    DatasetSchema schema;
    std::istringstream in{std::string(source)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string stripped = raw.substr(0, raw.find('#'));
        auto line = text::trim(stripped);
        if (line.empty()) {
            continue;
        }
        auto eq = line.find('=');
        detail::require(eq != std::string_view::npos, ErrorCategory::parse,
            "schema line " + std::to_string(line_no) + ": expected 'key = value'");
        auto key = text::trim(line.substr(0, eq));
        auto value = text::trim(line.substr(eq + 1));

        if (key == "delimiter") {
            if (value == "tab" || value == "\\t") {
                schema.delimiter = '\t';
            } else {
                detail::require(value.size() == 1, ErrorCategory::parse,
                    "schema line " + std::to_string(line_no) + ": delimiter must be one character or 'tab'");
                schema.delimiter = value.front();
            }
        } else if (key == "header") {
            schema.header = detail::parse_bool(value, line_no);
        } else if (key.starts_with("column ") || key.starts_with("target ")) {
            ColumnSpec col;
            col.name = std::string(text::trim(key.substr(7)));
            if (key.starts_with("target ")) {
                col.kind = ColumnKind::target;
                col.levels = detail::parse_levels(value);
            } else {
                auto colon = value.find(':');
                detail::require(colon != std::string_view::npos, ErrorCategory::parse,
                    "schema line " + std::to_string(line_no) + ": expected 'ordinal: ...' or 'nominal: ...'");
                auto kind = text::trim(value.substr(0, colon));
                if (kind == "ordinal") {
                    col.kind = ColumnKind::ordinal;
                } else if (kind == "nominal") {
                    col.kind = ColumnKind::nominal;
                } else {
                    detail::fail(ErrorCategory::parse, "schema line " + std::to_string(line_no) + ": unknown column kind '" + std::string(kind) + "'");
                }
                col.levels = detail::parse_levels(value.substr(colon + 1));
            }
            schema.columns.push_back(std::move(col));
        } else {
            detail::fail(ErrorCategory::parse, "schema line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
        }
    }
    schema.validate();
    return schema;
}

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCategory::io, "cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorCategory::io, "cannot write '" + path.string() + "'");
    out << contents;
    out.flush();
    require(static_cast<bool>(out), ErrorCategory::io, "write to '" + path.string() + "' failed");
}

}

inline DatasetSchema load_schema(const std::filesystem::path& path) {
    return parse_schema(detail::read_file(path));
}

/**
 * Encode delimited text with `schema`. `origin` is recorded as provenance
 * and used in error messages; rows are numbered by file line.
 *
 * Throws `parse` for a row with the wrong number of cells and
 * `schema_violation` for an empty cell, an unlisted value or a header that
 * does not match the schema's column names.
 */
inline OrdinalDataset parse_csv_ordinal(std::string_view source, const DatasetSchema& schema, const std::string& origin = "<memory>") {
    schema.validate();
    std::vector<std::unordered_map<std::string, int>> lookup(schema.columns.size());
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
        const auto& levels = schema.columns[c].levels;
        for (std::size_t pos = 0; pos < levels.size(); ++pos) {
            for (const auto& s : levels[pos]) {
                lookup[c][s] = static_cast<int>(pos);
            }
        }
    }

    OrdinalDataset data;
    data.categories = schema.categories();
    data.feature_names = schema.feature_names();
    data.category_names = schema.category_names();
    data.provenance = origin;
    std::size_t width = schema.encoded_dimension();
    std::vector<double> encoded(width);

    std::istringstream in{std::string(source)};
    std::string raw;
    std::size_t line_no = 0;
    bool header_pending = schema.header;
    while (std::getline(in, raw)) {
        ++line_no;
        if (text::trim(raw).empty()) {
            continue;
        }
        auto cells = text::split(raw, schema.delimiter);
        detail::require(cells.size() == schema.columns.size(), ErrorCategory::parse,
            origin + " line " + std::to_string(line_no) + ": " + std::to_string(cells.size()) + " cells, schema has " +
            std::to_string(schema.columns.size()) + " columns");
        if (header_pending) {
            header_pending = false;
            for (std::size_t c = 0; c < cells.size(); ++c) {
                detail::require(cells[c] == schema.columns[c].name, ErrorCategory::schema_violation,
                    origin + " header column " + std::to_string(c + 1) + " is '" + cells[c] + "', schema expects '" +
                    schema.columns[c].name + "'");
            }
            continue;
        }

        std::size_t offset = 0;
        int label = -1;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto& col = schema.columns[c];
            std::string where = origin + " line " + std::to_string(line_no) + ", column '" + col.name + "'";
            detail::require(!cells[c].empty(), ErrorCategory::schema_violation, where + ": missing value");
            auto found = lookup[c].find(cells[c]);
            detail::require(found != lookup[c].end(), ErrorCategory::schema_violation,
                where + ": value '" + cells[c] + "' is not in the schema");
            int pos = found->second;
            switch (col.kind) {
            case ColumnKind::target:
                label = pos;
                break;
            case ColumnKind::ordinal:
                encoded[offset++] = col.levels.size() > 1 ? static_cast<double>(pos) / static_cast<double>(col.levels.size() - 1) : 0.0;
                break;
            case ColumnKind::nominal:
                for (std::size_t l = 0; l < col.levels.size(); ++l) {
                    encoded[offset++] = static_cast<int>(l) == pos ? 1.0 : 0.0;
                }
                break;
            }
        }
        if (data.features.rows() == 0) {
            data.features = Matrix(0, width);
        }
        data.features.push_row(encoded);
        data.labels.push_back(label);
    }
    detail::require(data.size() >= static_cast<std::size_t>(data.categories), ErrorCategory::insufficient_samples,
        origin + " has " + std::to_string(data.size()) + " rows, fewer than its " + std::to_string(data.categories) + " categories");
    data.validate();
    return data;
}

inline OrdinalDataset load_csv_ordinal(const std::filesystem::path& path, const DatasetSchema& schema) {
    return parse_csv_ordinal(detail::read_file(path), schema, path.string());
}

/**
 * Decode `data` back to level names under `schema`, producing text that
 * `parse_csv_ordinal` reads back to the same features and labels.
 */
inline std::string format_csv_ordinal(const OrdinalDataset& data, const DatasetSchema& schema) {
    schema.validate();
    detail::require(data.dimension() == schema.encoded_dimension(), ErrorCategory::argument,
        "dataset has " + std::to_string(data.dimension()) + " features, schema encodes " + std::to_string(schema.encoded_dimension()));
    std::string delim(1, schema.delimiter);
    std::ostringstream out;
    if (schema.header) {
        std::vector<std::string> names;
        for (const auto& col : schema.columns) {
            names.push_back(col.name);
        }
        out << text::join(names, delim) << '\n';
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto row = data.features.row(i);
        std::vector<std::string> cells;
        std::size_t offset = 0;
        for (const auto& col : schema.columns) {
            std::size_t pos = 0;
            if (col.kind == ColumnKind::target) {
                pos = static_cast<std::size_t>(data.labels[i]);
            } else if (col.kind == ColumnKind::ordinal) {
                double scaled = row[offset++] * static_cast<double>(col.levels.size() - 1);
                pos = static_cast<std::size_t>(std::lround(scaled));
                detail::require(std::abs(scaled - static_cast<double>(pos)) < 1e-9 && pos < col.levels.size(), ErrorCategory::argument,
                    "row " + std::to_string(i) + " column '" + col.name + "' is not a level encoding");
            } else {
                auto first = row.begin() + static_cast<std::ptrdiff_t>(offset);
                pos = static_cast<std::size_t>(std::max_element(first, first + static_cast<std::ptrdiff_t>(col.levels.size())) - first);
                offset += col.levels.size();
            }
            cells.push_back(col.levels[pos].front());
        }
        out << text::join(cells, delim) << '\n';
    }
    return out.str();
}

inline void write_csv_ordinal(const OrdinalDataset& data, const DatasetSchema& schema, const std::filesystem::path& path) {
    detail::write_file(path, format_csv_ordinal(data, schema));
}

/**
 * @brief Sorted row indices of a train/validation/test partition.
 */
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;

    friend bool operator==(const SplitIndices&, const SplitIndices&) = default;
};

struct DatasetSplit {
    OrdinalDataset train;
    OrdinalDataset val;
    OrdinalDataset test;
    SplitIndices indices;
};

/**
 * Stratified partition. Within each category of size `n`, `round(n *
 * test_fraction)` shuffled rows go to test and `round(m * val_fraction)` of
 * the remaining `m` go to validation.
 *
 * Throws `argument` for fractions outside (0, 1) and `insufficient_samples`,
 * naming the rank, when a category would leave some split empty.
 */
inline SplitIndices split_indices(const OrdinalDataset& data, double test_fraction, double val_fraction, std::uint64_t seed) {
    data.validate();
    detail::require(test_fraction > 0 && test_fraction < 1, ErrorCategory::argument, "test fraction must lie in (0, 1)");
    detail::require(val_fraction > 0 && val_fraction < 1, ErrorCategory::argument, "validation fraction must lie in (0, 1)");
    Rng rng(seed);
    SplitIndices out;
    auto members = data.members_by_category();
    for (std::size_t rank = 0; rank < members.size(); ++rank) {
        auto& rows = members[rank];
        std::shuffle(rows.begin(), rows.end(), rng.engine());
        auto n_test = static_cast<std::size_t>(std::lround(static_cast<double>(rows.size()) * test_fraction));
        auto remaining = rows.size() - std::min(n_test, rows.size());
        auto n_val = static_cast<std::size_t>(std::lround(static_cast<double>(remaining) * val_fraction));
        detail::require(n_test >= 1 && n_val >= 1 && remaining > n_val, ErrorCategory::insufficient_samples,
            "category rank " + std::to_string(rank) + " has " + std::to_string(rows.size()) + " rows, too few to stratify");
        out.test.insert(out.test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
        out.val.insert(out.val.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test),
            rows.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
        out.train.insert(out.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), rows.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.val.begin(), out.val.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

inline DatasetSplit split(const OrdinalDataset& data, double test_fraction, double val_fraction, std::uint64_t seed) {
    auto indices = split_indices(data, test_fraction, val_fraction, seed);
    return {data.subset(indices.train), data.subset(indices.val), data.subset(indices.test), std::move(indices)};
}

/**
 * @brief Parameters of the synthetic ordinal generator.
 */
struct SyntheticSpec {
    int categories = 4;
    std::size_t samples_per_class = 100;
    std::size_t dim = 2;
    /** Distance between neighboring class centers. */
    double separation = 1.0;
    double noise_sigma = 0.1;
    std::uint64_t seed = 0;

    std::string describe() const {
        return "synthetic:categories=" + std::to_string(categories) + ",per_class=" + std::to_string(samples_per_class) +
            ",dim=" + std::to_string(dim) + ",separation=" + text::format_double(separation) +
            ",noise=" + text::format_double(noise_sigma) + ",seed=" + std::to_string(seed);
    }
};

/**
 * Classes on a quarter circle in the first two coordinates, rank `r` at
 * angle `r * (pi/2) / (C - 1)`, with the radius chosen so neighboring
 * centers are `separation` apart. Every coordinate gets isotropic Gaussian
 * noise, then all features are rescaled by one global min/max to `[0, 1]`.
 * Rows are grouped by class.
 */
inline OrdinalDataset make_synthetic_ordinal(const SyntheticSpec& spec) {
    detail::check_category_count(spec.categories);
    detail::require(spec.dim >= 2, ErrorCategory::argument, "synthetic data needs dim >= 2");
    detail::require(spec.samples_per_class >= 3, ErrorCategory::argument, "synthetic data needs at least 3 samples per class");
    detail::require(std::isfinite(spec.separation) && spec.separation > 0, ErrorCategory::argument, "class separation must be positive");
    detail::require(std::isfinite(spec.noise_sigma) && spec.noise_sigma >= 0, ErrorCategory::argument, "noise sigma must be non-negative");

    double step = (std::numbers::pi / 2) / static_cast<double>(spec.categories - 1);
    double radius = spec.separation / (2 * std::sin(step / 2));
    Rng rng(spec.seed);

    OrdinalDataset data;
    data.categories = spec.categories;
    data.features = Matrix(0, spec.dim);
    std::vector<double> point(spec.dim);
    for (int r = 0; r < spec.categories; ++r) {
        double phi = step * r;
        for (std::size_t s = 0; s < spec.samples_per_class; ++s) {
            for (std::size_t d = 0; d < spec.dim; ++d) {
                double center = d == 0 ? radius * std::cos(phi) : d == 1 ? radius * std::sin(phi) : 0.0;
                point[d] = spec.noise_sigma > 0 ? center + rng.normal(0.0, spec.noise_sigma) : center;
            }
            data.features.push_row(point);
            data.labels.push_back(r);
        }
        data.category_names.push_back("l" + std::to_string(r));
    }

    auto& values = data.features.values();
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    double low = *lo;
    double span = *hi - *lo;
    for (auto& v : values) {
        v = (v - low) / span;
    }
    for (std::size_t d = 0; d < spec.dim; ++d) {
        data.feature_names.push_back("x" + std::to_string(d));
    }
    data.provenance = spec.describe();
    return data;
}

inline OrdinalDataset make_synthetic_ordinal(int categories, std::size_t samples_per_class, std::size_t dim, double separation,
    double noise_sigma, std::uint64_t seed) {
    return make_synthetic_ordinal(SyntheticSpec{categories, samples_per_class, dim, separation, noise_sigma, seed});
}

}

#endif
