#ifndef ATD_MODEL_IO_HPP
#define ATD_MODEL_IO_HPP

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <zlib.h>

#include "dataio.hpp"
#include "embed_net.hpp"
#include "error.hpp"
#include "text.hpp"

/**
 * @file model_io.hpp
 *
 * @brief Text container for trained models.
 *
 * Layout:
 *
 *     ATD-MODEL 1
 *     crc32 <8 hex digits over every byte after this line>
 *     categories 4
 *     feature_dim 21
 *     seed 7
 *     provenance data/uci/car_evaluation.csv
 *     l2_normalize 1
 *     layers 2
 *     layer 21 64 relu
 *     weights <out*in numbers, row-major>
 *     bias <out numbers>
 *     ...
 *     config <key> <value>
 *     end
 *
 * Numbers use the shortest representation that parses back to the same
 * double, so saved parameters reload bit for bit.
 */

namespace atd {

inline constexpr int model_format_version = 1;

/**
 * @brief A trained network together with what is needed to reuse it.
 */
struct ModelArtifact {
    NetworkParameters params;
    int categories = 0;
    std::size_t feature_dim = 0;
    /** Training and split settings, stored as text. */
    std::map<std::string, std::string> config;
    std::string provenance;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::uint32_t crc32_of(std::string_view bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
    return static_cast<std::uint32_t>(crc);
}

inline void write_numbers(std::ostringstream& out, std::string_view key, std::span<const double> values) {
    out << key;
    for (double v : values) {
        out << ' ' << text::format_double(v);
    }
    out << '\n';
}

inline void check_single_line(const std::string& s, const std::string& what) {
    require(s.find_first_of("\r\n") == std::string::npos, ErrorCategory::argument, what + " must not contain line breaks");
}

/** Run `f`, reporting any library error it raises as corruption. */
template<typename F>
std::invoke_result_t<F> as_corruption(F&& f) {
    try {
        return f();
    } catch (const Error& err) {
        fail(ErrorCategory::corruption, std::string("model file: ") + err.what());
    }
}

/** Line reader over the checksummed body; any shape problem is corruption. */
class BodyReader {
public:
    explicit BodyReader(std::string_view body) : in_{std::string(body)} {}

    std::vector<std::string> fields(std::string_view expected_key) {
        std::string line;
        require(static_cast<bool>(std::getline(in_, line)), ErrorCategory::corruption,
            "model file ends before '" + std::string(expected_key) + "'");
        ++line_no_;
        std::vector<std::string> out;
        std::istringstream words(line);
        std::string w;
        while (words >> w) {
            out.push_back(w);
        }
        require(!out.empty() && out[0] == expected_key, ErrorCategory::corruption,
            "model line " + std::to_string(line_no_) + ": expected '" + std::string(expected_key) + "'");
        return out;
    }

    /** Rest of the line after `key `, kept verbatim. */
    std::string rest(std::string_view key) {
        std::string line;
        require(static_cast<bool>(std::getline(in_, line)), ErrorCategory::corruption,
            "model file ends before '" + std::string(key) + "'");
        ++line_no_;
        require(line.starts_with(std::string(key) + " ") || line == key, ErrorCategory::corruption,
            "model line " + std::to_string(line_no_) + ": expected '" + std::string(key) + "'");
        return line.size() > key.size() ? line.substr(key.size() + 1) : std::string();
    }

    std::string peek_key() {
        auto pos = in_.tellg();
        std::string line;
        std::getline(in_, line);
        in_.clear();
        in_.seekg(pos);
        return line.substr(0, line.find(' '));
    }

    template<typename T>
    T integer(std::string_view key) {
        auto f = fields(key);
        require(f.size() == 2, ErrorCategory::corruption, "model field '" + std::string(key) + "' malformed");
        return as_corruption([&] { return text::parse_integer<T>(f[1]); });
    }

    std::vector<double> numbers(std::string_view key, std::size_t count) {
        auto f = fields(key);
        require(f.size() == count + 1, ErrorCategory::corruption,
            "model field '" + std::string(key) + "' has " + std::to_string(f.size() - 1) + " values, expected " + std::to_string(count));
        std::vector<double> out(count);
        for (std::size_t i = 0; i < count; ++i) {
            out[i] = as_corruption([&] { return text::parse_double(f[i + 1]); });
        }
        return out;
    }

private:
    std::istringstream in_;
    std::size_t line_no_ = 0;
};

}

inline std::string serialize_model(const ModelArtifact& artifact) {
    artifact.params.validate();
    detail::check_single_line(artifact.provenance, "provenance");
    std::ostringstream body;
    body << "categories " << artifact.categories << '\n';
    body << "feature_dim " << artifact.feature_dim << '\n';
    body << "seed " << artifact.seed << '\n';
    body << "provenance " << artifact.provenance << '\n';
    body << "l2_normalize " << (artifact.params.l2_normalize ? 1 : 0) << '\n';
    body << "layers " << artifact.params.layers.size() << '\n';
    for (const auto& layer : artifact.params.layers) {
        body << "layer " << layer.weights.cols() << ' ' << layer.weights.rows() << ' ' << activation_name(layer.activation) << '\n';
        detail::write_numbers(body, "weights", layer.weights.values());
        detail::write_numbers(body, "bias", layer.bias);
    }
    for (const auto& [key, value] : artifact.config) {
        detail::require(!key.empty() && key.find_first_of(" \t\r\n") == std::string::npos, ErrorCategory::argument,
            "config key '" + key + "' must be a single word");
        detail::check_single_line(value, "config value of '" + key + "'");
        body << "config " << key << ' ' << value << '\n';
    }
    body << "end\n";
    std::string payload = body.str();
    char crc[16];
    std::snprintf(crc, sizeof(crc), "%08x", detail::crc32_of(payload));
    return "ATD-MODEL " + std::to_string(model_format_version) + "\ncrc32 " + crc + "\n" + payload;
}

/**
 * Inverse of `serialize_model`.
 *
 * Throws `unsupported_version` for another format version and `corruption`
 * for a checksum mismatch, a truncated file or malformed content.
 */
inline ModelArtifact deserialize_model(std::string_view contents) {
    auto first_break = contents.find('\n');
    std::string_view magic = first_break == std::string_view::npos ? contents : contents.substr(0, first_break);
    detail::require(magic.starts_with("ATD-MODEL "), ErrorCategory::corruption, "not a model file");
    int version = detail::as_corruption([&] { return text::parse_integer<int>(text::trim(magic.substr(10))); });
    detail::require(version == model_format_version, ErrorCategory::unsupported_version,
        "model format version " + std::to_string(version) + " is not supported (expected " + std::to_string(model_format_version) + ")");

    detail::require(first_break != std::string_view::npos, ErrorCategory::corruption, "model file truncated after header");
    auto rest = contents.substr(first_break + 1);
    auto second_break = rest.find('\n');
    detail::require(second_break != std::string_view::npos && rest.starts_with("crc32 "), ErrorCategory::corruption,
        "model file has no checksum line");
    auto stored = std::string(text::trim(rest.substr(6, second_break - 6)));
    auto payload = rest.substr(second_break + 1);
    char actual[16];
    std::snprintf(actual, sizeof(actual), "%08x", detail::crc32_of(payload));
    detail::require(stored == actual, ErrorCategory::corruption,
        "checksum mismatch: file says " + stored + ", content hashes to " + actual);

    detail::BodyReader reader(payload);
    ModelArtifact artifact;
    artifact.categories = reader.integer<int>("categories");
    artifact.feature_dim = reader.integer<std::size_t>("feature_dim");
    artifact.seed = reader.integer<std::uint64_t>("seed");
    artifact.provenance = reader.rest("provenance");
    artifact.params.l2_normalize = reader.integer<int>("l2_normalize") != 0;
    auto count = reader.integer<std::size_t>("layers");
    for (std::size_t l = 0; l < count; ++l) {
        auto shape = reader.fields("layer");
        detail::require(shape.size() == 4, ErrorCategory::corruption, "model layer line malformed");
        auto in = detail::as_corruption([&] { return text::parse_integer<std::size_t>(shape[1]); });
        auto out = detail::as_corruption([&] { return text::parse_integer<std::size_t>(shape[2]); });
        auto act = detail::as_corruption([&] { return parse_activation(shape[3]); });
        DenseLayer layer;
        layer.weights = Matrix(out, in, reader.numbers("weights", out * in));
        layer.bias = reader.numbers("bias", out);
        layer.activation = act;
        artifact.params.layers.push_back(std::move(layer));
    }
    while (reader.peek_key() == "config") {
        auto line = reader.rest("config");
        auto space = line.find(' ');
        auto key = line.substr(0, space);
        artifact.config[key] = space == std::string::npos ? std::string() : line.substr(space + 1);
    }
    reader.fields("end");

    detail::as_corruption([&] { artifact.params.validate(); return 0; });
    detail::require(artifact.params.input_dim() == artifact.feature_dim, ErrorCategory::corruption,
        "network input size does not match recorded feature dimension");
    return artifact;
}

inline void save_model(const ModelArtifact& artifact, const std::filesystem::path& path) {
    detail::write_file(path, serialize_model(artifact));
}

inline ModelArtifact load_model(const std::filesystem::path& path) {
    return deserialize_model(detail::read_file(path));
}

}

#endif
