#ifndef ATD_CLI_HPP
#define ATD_CLI_HPP

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dataio.hpp"
#include "embed_net.hpp"
#include "error.hpp"
#include "evalharness.hpp"
#include "geometry.hpp"
#include "model_io.hpp"
#include "ordinal_targets.hpp"
#include "text.hpp"
#include "trainer.hpp"

/**
 * @file cli.hpp
 *
 * @brief The `atd` command-line driver.
 *
 * Commands: `train`, `eval`, `matrix`, `verify-metric`, `templates`. Files
 * go to `--output-dir`, which defaults to `$ATD_OUTPUT_DIR` and then to the
 * working directory. Options may also come from an INI/TOML file given with
 * `--config`; command-line values win. Failures print
 * `error category=<name> message=<text>` on the error stream and exit
 * non-zero.
 */

namespace atd::cli {

inline constexpr const char* output_dir_env = "ATD_OUTPUT_DIR";

struct DataOptions {
    std::string data_path;
    std::string schema_path;
    bool synthetic = false;
    SyntheticSpec synth;
    double test_fraction = 0.2;
    double val_fraction = 0.2;
    std::uint64_t split_seed = 0;
    bool split_seed_set = false;
};

struct TrainOptions {
    DataOptions data;
    TrainConfig train;
    std::size_t embedding_dim = 100;
    std::size_t hidden = 64;
    std::string final_activation = "identity";
    std::string model_name = "model.atd";
    bool quiet = false;
};

struct EvalOptions {
    std::string model_path;
    std::vector<std::size_t> ks{3};
};

struct MatrixOptions {
    std::string model_path;
    std::string split = "test";
    bool raw = false;
};

struct VerifyOptions {
    std::size_t dim = 2;
    std::size_t samples = 10000;
    std::uint64_t seed = 0;
    double tolerance = 1e-9;
};

namespace detail {

using atd::detail::require;

inline std::filesystem::path default_output_dir() {
    const char* env = std::getenv(output_dir_env);
    return env != nullptr && *env != '\0' ? std::filesystem::path(env) : std::filesystem::path(".");
}

inline std::filesystem::path prepare_dir(const std::string& dir) {
    std::filesystem::path path(dir);
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    require(!ec, ErrorCategory::io, "cannot create output directory '" + dir + "': " + ec.message());
    return path;
}

inline void write_key_values(const std::filesystem::path& path, const std::vector<std::pair<std::string, std::string>>& entries) {
    std::string body;
    for (const auto& [k, v] : entries) {
        body += k + "=" + v + "\n";
    }
    atd::detail::write_file(path, body);
}

inline std::map<std::string, std::string> data_config(const DataOptions& d) {
    std::map<std::string, std::string> c;
    if (d.synthetic) {
        c["source"] = "synthetic";
        c["synthetic.categories"] = std::to_string(d.synth.categories);
        c["synthetic.per_class"] = std::to_string(d.synth.samples_per_class);
        c["synthetic.dim"] = std::to_string(d.synth.dim);
        c["synthetic.separation"] = text::format_double(d.synth.separation);
        c["synthetic.noise"] = text::format_double(d.synth.noise_sigma);
        c["synthetic.seed"] = std::to_string(d.synth.seed);
    } else {
        c["source"] = "csv";
        c["data"] = std::filesystem::absolute(d.data_path).lexically_normal().string();
        c["schema"] = std::filesystem::absolute(d.schema_path).lexically_normal().string();
    }
    c["split.test_fraction"] = text::format_double(d.test_fraction);
    c["split.val_fraction"] = text::format_double(d.val_fraction);
    c["split.seed"] = std::to_string(d.split_seed);
    return c;
}

inline const std::string& config_value(const std::map<std::string, std::string>& c, const std::string& key) {
    auto it = c.find(key);
    require(it != c.end(), ErrorCategory::argument, "model config has no '" + key + "' entry");
    return it->second;
}

inline DataOptions data_options_from(const std::map<std::string, std::string>& c) {
    DataOptions d;
    d.synthetic = config_value(c, "source") == "synthetic";
    if (d.synthetic) {
        d.synth.categories = text::parse_integer<int>(config_value(c, "synthetic.categories"));
        d.synth.samples_per_class = text::parse_integer<std::size_t>(config_value(c, "synthetic.per_class"));
        d.synth.dim = text::parse_integer<std::size_t>(config_value(c, "synthetic.dim"));
        d.synth.separation = text::parse_double(config_value(c, "synthetic.separation"));
        d.synth.noise_sigma = text::parse_double(config_value(c, "synthetic.noise"));
        d.synth.seed = text::parse_integer<std::uint64_t>(config_value(c, "synthetic.seed"));
    } else {
        d.data_path = config_value(c, "data");
        d.schema_path = config_value(c, "schema");
    }
    d.test_fraction = text::parse_double(config_value(c, "split.test_fraction"));
    d.val_fraction = text::parse_double(config_value(c, "split.val_fraction"));
    d.split_seed = text::parse_integer<std::uint64_t>(config_value(c, "split.seed"));
    d.split_seed_set = true;
    return d;
}

inline OrdinalDataset load_data(const DataOptions& d) {
    if (d.synthetic) {
        return make_synthetic_ordinal(d.synth);
    }
    require(!d.data_path.empty() && !d.schema_path.empty(), ErrorCategory::argument,
        "give --data and --schema, or --synthetic");
    return load_csv_ordinal(d.data_path, load_schema(d.schema_path));
}

struct LoadedModel {
    ModelArtifact artifact;
    OrdinalDataset data;
    DatasetSplit parts;
};

inline LoadedModel load_with_data(const std::string& model_path) {
    auto artifact = load_model(model_path);
    auto options = data_options_from(artifact.config);
    auto data = load_data(options);
    require(data.dimension() == artifact.feature_dim && data.categories == artifact.categories, ErrorCategory::argument,
        "data no longer matches the model's feature dimension or category count");
    auto parts = split(data, options.test_fraction, options.val_fraction, options.split_seed);
    return {std::move(artifact), std::move(data), std::move(parts)};
}

inline std::vector<std::size_t> merged(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::vector<std::size_t> out;
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline int run_train(TrainOptions opt, const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err) {
    if (!opt.data.split_seed_set) {
        opt.data.split_seed = opt.train.seed;
    }
    auto data = load_data(opt.data);
    auto parts = split(data, opt.data.test_fraction, opt.data.val_fraction, opt.data.split_seed);
    auto arch = Architecture::tabular(data.dimension(), opt.embedding_dim, opt.hidden, parse_activation(opt.final_activation));

    ProgressSink sink;
    if (!opt.quiet) {
        sink = [&err](const EpochRecord& r) {
            err << "epoch " << r.epoch << " loss=" << text::format_double(r.mean_loss)
                << " val_accuracy=" << text::format_double(r.validation_accuracy) << '\n';
        };
    }
    auto result = train(parts.train, parts.val, opt.train, arch, sink);

    ModelArtifact artifact;
    artifact.params = result.best;
    artifact.categories = data.categories;
    artifact.feature_dim = data.dimension();
    artifact.provenance = data.provenance;
    artifact.seed = opt.train.seed;
    artifact.config = data_config(opt.data);
    artifact.config["train.epochs"] = std::to_string(opt.train.epochs);
    artifact.config["train.batch_size"] = std::to_string(opt.train.batch_size);
    artifact.config["train.batches_per_epoch"] = std::to_string(opt.train.resolved_batches(parts.train.size()));
    artifact.config["train.learning_rate"] = text::format_double(opt.train.learning_rate);
    artifact.config["train.arccos_guard"] = text::format_double(opt.train.arccos_guard);
    artifact.config["train.validation_k"] = std::to_string(opt.train.validation_k);
    artifact.config["train.best_epoch"] = std::to_string(result.history.best_epoch);

    auto model_path = out_dir / opt.model_name;
    save_model(artifact, model_path);

    std::string history = "epoch,mean_loss,validation_accuracy\n";
    for (const auto& r : result.history.epochs) {
        history += std::to_string(r.epoch) + "," + text::format_double(r.mean_loss) + "," + text::format_double(r.validation_accuracy) + "\n";
    }
    atd::detail::write_file(out_dir / "history.csv", history);

    out << "model=" << model_path.string() << '\n';
    if (!result.history.epochs.empty()) {
        const auto& best = result.history.epochs[result.history.best_epoch];
        out << "best_epoch=" << best.epoch << '\n' << "best_val_accuracy=" << text::format_double(best.validation_accuracy) << '\n';
    }
    return 0;
}

inline int run_eval(const EvalOptions& opt, const std::filesystem::path& out_dir, std::ostream& out) {
    auto loaded = load_with_data(opt.model_path);
    const auto& params = loaded.artifact.params;
    auto reference_rows = merged(loaded.parts.indices.train, loaded.parts.indices.val);
    auto reference = loaded.data.subset(reference_rows);
    auto test_emb = embed_rows(params, loaded.parts.test.features);
    auto ref_emb = embed_rows(params, reference.features);

    std::string csv = "k,retrieval_accuracy,classification_error\n";
    std::vector<std::pair<std::string, std::string>> report{
        {"model", opt.model_path}, {"test_size", std::to_string(loaded.parts.test.size())},
        {"reference_size", std::to_string(reference.size())}};
    for (auto k : opt.ks) {
        auto acc = knn_accuracy(test_emb, loaded.parts.test.labels, k);
        auto error = knn_classify_error(ref_emb, reference.labels, test_emb, loaded.parts.test.labels, k);
        csv += std::to_string(k) + "," + text::format_double(acc) + "," + text::format_double(error) + "\n";
        report.emplace_back("k" + std::to_string(k) + ".retrieval_accuracy", text::format_double(acc));
        report.emplace_back("k" + std::to_string(k) + ".classification_error", text::format_double(error));
    }
    atd::detail::write_file(out_dir / "metrics.csv", csv);
    write_key_values(out_dir / "metrics.txt", report);
    for (std::size_t i = 3; i < report.size(); ++i) {
        out << report[i].first << '=' << report[i].second << '\n';
    }
    return 0;
}

inline int run_matrix(const MatrixOptions& opt, const std::filesystem::path& out_dir, std::ostream& out) {
    auto loaded = load_with_data(opt.model_path);
    const OrdinalDataset* subset = nullptr;
    if (opt.split == "test") {
        subset = &loaded.parts.test;
    } else if (opt.split == "train") {
        subset = &loaded.parts.train;
    } else if (opt.split == "val") {
        subset = &loaded.parts.val;
    } else {
        subset = &loaded.data;
    }
    auto emb = embed_rows(loaded.artifact.params, subset->features);
    auto matrix = category_distance_matrix(emb, subset->labels, subset->categories, opt.raw ? CosineDistance::raw : CosineDistance::half);
    auto score = ordinal_monotonicity_score(matrix);
    auto pooled = pooled_gap_spearman(matrix);

    atd::detail::write_file(out_dir / "matrix.csv", to_csv(matrix));
    write_key_values(out_dir / "matrix.txt",
        {{"model", opt.model_path}, {"split", opt.split}, {"distance", opt.raw ? "raw" : "half"},
            {"monotonicity", text::format_double(score)}, {"pooled_gap_spearman", text::format_double(pooled)}});
    out << "monotonicity=" << text::format_double(score) << '\n' << "pooled_gap_spearman=" << text::format_double(pooled) << '\n';
    return 0;
}

inline int run_verify(const VerifyOptions& opt, const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err) {
    Rng rng(opt.seed);
    auto triples = random_unit_triples(opt.samples, opt.dim, rng);
    auto report = check_metric_axioms(triples, opt.tolerance);

    std::string csv = "axiom,passed,worst_violation,worst_index\n";
    std::vector<std::pair<std::string, std::string>> kv{{"dim", std::to_string(opt.dim)},
        {"samples", std::to_string(report.triples_checked)}, {"seed", std::to_string(opt.seed)},
        {"tolerance", text::format_double(report.tolerance)}};
    for (const auto* result : report.axioms()) {
        const auto& axiom = *result;
        std::string name(axiom.name);
        csv += name + "," + (axiom.passed ? "1" : "0") + "," + text::format_double(axiom.worst_violation) + "," +
            std::to_string(axiom.worst_index) + "\n";
        kv.emplace_back(name + ".passed", axiom.passed ? "true" : "false");
        kv.emplace_back(name + ".worst_violation", text::format_double(axiom.worst_violation));
    }
    kv.emplace_back("all_passed", report.all_passed() ? "true" : "false");
    atd::detail::write_file(out_dir / "axioms.csv", csv);
    write_key_values(out_dir / "axioms.txt", kv);
    out << csv;
    if (!report.all_passed()) {
        err << "error category=axiom-violation message=at least one metric axiom failed\n";
        return 3;
    }
    return 0;
}

inline std::string fraction_text(const Fraction& f) {
    int g = std::gcd(f.numerator, f.denominator);
    return std::to_string(f.numerator / g) + "/" + std::to_string(f.denominator / g);
}

inline int run_templates(int categories, std::ostream& out) {
    auto templates = triplet_templates(categories);
    out << "index,kind,first,second,third,target_first_second,target_second_third,exact_first_second,exact_second_third\n";
    for (std::size_t t = 0; t < templates.size(); ++t) {
        const auto& tmpl = templates[t];
        const char* kind = tmpl.kind == TemplateKind::inner ? "inner" : tmpl.kind == TemplateKind::boundary ? "boundary" : "full_rotation";
        out << t << ',' << kind;
        for (int r : tmpl.ranks) {
            out << ",l" << r;
        }
        auto targets = tmpl.targets();
        out << ',' << text::format_double(targets[0]) << ',' << text::format_double(targets[1]) << ','
            << fraction_text(tmpl.exact_targets[0]) << ',' << fraction_text(tmpl.exact_targets[1]) << '\n';
    }
    return 0;
}

inline void add_data_options(CLI::App& cmd, DataOptions& d) {
    cmd.add_option("--data", d.data_path, "Delimited data file")->check(CLI::ExistingFile);
    cmd.add_option("--schema", d.schema_path, "Schema file describing --data")->check(CLI::ExistingFile);
    cmd.add_flag("--synthetic", d.synthetic, "Use the synthetic ordinal generator instead of a file");
    cmd.add_option("--categories", d.synth.categories, "Synthetic: number of ordered classes")->capture_default_str();
    cmd.add_option("--per-class", d.synth.samples_per_class, "Synthetic: samples per class")->capture_default_str();
    cmd.add_option("--dim", d.synth.dim, "Synthetic: feature dimension")->capture_default_str();
    cmd.add_option("--separation", d.synth.separation, "Synthetic: distance between neighboring class centers")->capture_default_str();
    cmd.add_option("--noise", d.synth.noise_sigma, "Synthetic: Gaussian noise sigma")->capture_default_str();
    cmd.add_option("--data-seed", d.synth.seed, "Synthetic: generator seed")->capture_default_str();
    cmd.add_option("--test-fraction", d.test_fraction, "Fraction of each class held out for testing")
        ->capture_default_str()->check(CLI::Range(0.0, 1.0));
    cmd.add_option("--val-fraction", d.val_fraction, "Fraction of the remaining rows used for validation")
        ->capture_default_str()->check(CLI::Range(0.0, 1.0));
    cmd.add_option_function<std::uint64_t>("--split-seed", [&d](const std::uint64_t& s) {
        d.split_seed = s;
        d.split_seed_set = true;
    }, "Seed of the stratified split (defaults to --seed)");
}

}

/**
 * Run one command. `args` excludes the program name. Returns the process
 * exit status.
 */
inline int run_command(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ordinal metric learning with angular triangle distance", "atd"};
    app.set_config("--config", "", "INI or TOML file with option values");
    app.require_subcommand(1);
    app.fallthrough();
    std::string output_dir = detail::default_output_dir().string();
    app.add_option("--output-dir", output_dir, "Directory for emitted files (default: $ATD_OUTPUT_DIR or .)");

    TrainOptions train_opt;
    auto* train_cmd = app.add_subcommand("train", "Train a model and save it with its epoch history");
    detail::add_data_options(*train_cmd, train_opt.data);
    train_cmd->add_option("--epochs", train_opt.train.epochs)->capture_default_str();
    train_cmd->add_option("--batch-size", train_opt.train.batch_size)->capture_default_str()->check(CLI::PositiveNumber);
    train_cmd->add_option("--batches-per-epoch", train_opt.train.batches_per_epoch, "0 means ceil(train size / batch size)")->capture_default_str();
    train_cmd->add_option("--learning-rate", train_opt.train.learning_rate)->capture_default_str()->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--validation-k", train_opt.train.validation_k)->capture_default_str()->check(CLI::PositiveNumber);
    train_cmd->add_option("--seed", train_opt.train.seed)->capture_default_str();
    train_cmd->add_option("--embedding-dim", train_opt.embedding_dim)->capture_default_str()->check(CLI::Range(2, 100000));
    train_cmd->add_option("--hidden", train_opt.hidden)->capture_default_str()->check(CLI::PositiveNumber);
    train_cmd->add_option("--final-activation", train_opt.final_activation)->capture_default_str()
        ->check(CLI::IsMember({"identity", "linear", "relu"}));
    train_cmd->add_option("--model-name", train_opt.model_name, "File name of the saved model")->capture_default_str();
    train_cmd->add_flag("--quiet", train_opt.quiet, "Do not print per-epoch progress");

    EvalOptions eval_opt;
    auto* eval_cmd = app.add_subcommand("eval", "Neighbor retrieval accuracy and classification error on the test split");
    eval_cmd->add_option("--model", eval_opt.model_path)->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--k", eval_opt.ks, "Neighbor counts")->capture_default_str()->check(CLI::PositiveNumber);

    MatrixOptions matrix_opt;
    auto* matrix_cmd = app.add_subcommand("matrix", "Category distance matrix and ordinal monotonicity score");
    matrix_cmd->add_option("--model", matrix_opt.model_path)->required()->check(CLI::ExistingFile);
    matrix_cmd->add_option("--split", matrix_opt.split)->capture_default_str()->check(CLI::IsMember({"test", "train", "val", "all"}));
    matrix_cmd->add_flag("--raw", matrix_opt.raw, "Use 1 - cosine instead of (1 - cosine) / 2");

    VerifyOptions verify_opt;
    auto* verify_cmd = app.add_subcommand("verify-metric", "Check the metric axioms on random unit vectors");
    verify_cmd->add_option("--dim", verify_opt.dim)->capture_default_str()->check(CLI::PositiveNumber);
    verify_cmd->add_option("--samples", verify_opt.samples)->capture_default_str()->check(CLI::PositiveNumber);
    verify_cmd->add_option("--seed", verify_opt.seed)->capture_default_str();
    verify_cmd->add_option("--tolerance", verify_opt.tolerance)->capture_default_str()->check(CLI::NonNegativeNumber);

    int categories = 0;
    auto* templates_cmd = app.add_subcommand("templates", "List the triplet templates for C categories");
    templates_cmd->add_option("--categories", categories)->required();

    if (args.empty()) {
        err << app.help();
        return 2;
    }
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error category=argument message=" << e.what() << '\n' << app.help();
        return 2;
    }

    try {
        if (*templates_cmd) {
            return detail::run_templates(categories, out);
        }
        auto dir = detail::prepare_dir(output_dir);
        if (*train_cmd) {
            return detail::run_train(train_opt, dir, out, err);
        }
        if (*eval_cmd) {
            return detail::run_eval(eval_opt, dir, out);
        }
        if (*matrix_cmd) {
            return detail::run_matrix(matrix_opt, dir, out);
        }
        return detail::run_verify(verify_opt, dir, out, err);
    } catch (const Error& e) {
        err << "error category=" << category_name(e.category()) << " message=" << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error category=internal message=" << e.what() << '\n';
        return 1;
    }
}

}

#endif
