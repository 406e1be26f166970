// Command-line front end: sizing tables, insert/query/overestimate benchmarks
// and the statistical verification suites.

#include <CLI11.hpp>

#include <cctype>
#include <fstream>
#include <iostream>
#include <memory>
#include <stdexcept>
#include <string>

#include "bcms/bench.hpp"

namespace {

// Accepts plain byte counts or a K/M/G suffix (binary units, optional "B").
std::uint64_t parse_size(std::string text) {
    if (text.empty()) throw std::invalid_argument("empty size");
    if (text.back() == 'B' || text.back() == 'b') text.pop_back();
    std::uint64_t scale = 1;
    if (!text.empty() && std::isalpha(static_cast<unsigned char>(text.back()))) {
        switch (std::toupper(static_cast<unsigned char>(text.back()))) {
            case 'K': scale = 1ull << 10; break;
            case 'M': scale = 1ull << 20; break;
            case 'G': scale = 1ull << 30; break;
            default: throw std::invalid_argument("bad size suffix in '" + text + "'");
        }
        text.pop_back();
    }
    std::size_t used = 0;
    const auto value = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument("bad size '" + text + "'");
    return value * scale;
}

struct Output {
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file = std::make_unique<std::ofstream>(path);
            if (!*file) throw std::runtime_error("cannot open " + path);
        }
    }
    std::ostream& stream() { return file ? *file : std::cout; }
    std::unique_ptr<std::ofstream> file;
};

}  // namespace

int main(int argc, char** argv) {
    using namespace bcms;
    CLI::App app{"Buffered count-min sketch toolkit"};
    app.require_subcommand(1);

    std::string size = "64MB", bufferSize, variant = "buffered", backend = "memory", out, workDir;
    bench::BenchConfig config;
    std::uint64_t elements = 0;

    auto add_sizing = [&](CLI::App* cmd) {
        cmd->add_option("--size", size, "Sketch size (bytes, or with K/M/G suffix)")->capture_default_str();
        cmd->add_option("--delta", config.delta, "Failure probability")->capture_default_str();
        cmd->add_option("--overestimate", config.maxOverestimate, "Target maximum overestimate O")
            ->capture_default_str();
        cmd->add_option("--page-bytes", config.pageBytes, "Page size in bytes")->capture_default_str();
    };
    auto add_bench = [&](CLI::App* cmd) {
        add_sizing(cmd);
        cmd->add_option("--variant", variant, "classical | buffered")->capture_default_str();
        cmd->add_option("--backend", backend, "memory | file")->capture_default_str();
        cmd->add_option("--buffer-bytes", bufferSize, "Buffer size (default: size / 4)");
        cmd->add_option("--elements", elements, "Insert count (default: derived element budget)");
        cmd->add_option("--queries", config.queryCount, "Query count")->capture_default_str();
        cmd->add_option("--seed", config.seed, "Workload and hash seed")->capture_default_str();
        cmd->add_option("--work-dir", workDir, "Directory for file-backed sketches");
        cmd->add_option("--out", out, "CSV output path (default: stdout)");
    };

    auto* configure = app.add_subcommand("configure", "Derive sketch dimensions from a size budget");
    add_sizing(configure);
    auto* insert = app.add_subcommand("insert", "Insert benchmark");
    add_bench(insert);
    auto* query = app.add_subcommand("query", "Query benchmark (runs the insert phase first)");
    add_bench(query);
    auto* overestimate = app.add_subcommand("overestimate", "Paired classical/buffered overestimate run");
    add_bench(overestimate);

    bench::VerifyOptions verify;
    std::string suite = "guarantee";
    auto* verifyCmd = app.add_subcommand("verify", "Statistical verification suites");
    verifyCmd->add_option("suite", suite, "guarantee | theorem | maxload")->required();
    verifyCmd->add_option("--epsilon", verify.epsilon, "Error rate (guarantee)");
    verifyCmd->add_option("--delta", verify.delta, "Failure probability");
    verifyCmd->add_option("--C", verify.c, "Tail exponent C >= 1");
    auto* kOpt = verifyCmd->add_option("--k", verify.k, "Pages (theorem) or bins (maxload)");
    auto* nOpt = verifyCmd->add_option("--n", verify.n, "Inserted elements / balls");
    verifyCmd->add_option("--queries", verify.queries, "Queries per seed");
    auto* trialsOpt = verifyCmd->add_option("--trials", verify.trials, "Seeds or load trials");
    auto* failOpt =
        verifyCmd->add_option("--allowed-failures", verify.allowedFailures, "Seeds allowed to miss the bound");
    verifyCmd->add_option("--page-bytes", verify.pageBytes, "Page size in bytes");
    verifyCmd->add_option("--seed", verify.seed, "Base seed");
    verifyCmd->add_option("--out", out, "CSV output path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        config.sizeBytes = parse_size(size);
        if (!bufferSize.empty()) config.bufferBytes = parse_size(bufferSize);
        if (elements) config.elementCount = elements;
        if (!workDir.empty()) config.workDir = workDir;
        config.variant = bench::parse_variant(variant);
        config.backend = bench::parse_backend(backend);

        if (configure->parsed()) {
            const auto params =
                derive_params_from_size(config.sizeBytes, config.delta, config.maxOverestimate, config.pageBytes);
            bench::print_params_row(std::cout, config.sizeBytes, params);
            return 0;
        }

        Output output(out);
        if (insert->parsed() || query->parsed()) {
            const auto result = insert->parsed() ? bench::run_insert_bench(config) : bench::run_query_bench(config);
            bench::write_csv_header(output.stream());
            bench::write_csv_row(output.stream(), config, result);
            return 0;
        }
        if (overestimate->parsed()) {
            const auto [classical, buffered] = bench::run_overestimate_bench(config);
            auto& os = output.stream();
            os << "variant,queries,mean,max,threshold,tailFraction\n";
            for (auto [name, r] : {std::pair{"classical", classical}, std::pair{"buffered", buffered}}) {
                os << name << ',' << r.queries << ',' << r.meanOverestimate << ',' << r.maxOverestimate << ','
                   << r.threshold << ',' << r.tailFraction << '\n';
            }
            const double meanGap = classical.meanOverestimate > 0
                                       ? std::abs(buffered.meanOverestimate - classical.meanOverestimate) /
                                             classical.meanOverestimate
                                       : 0.0;
            std::cerr << "relative mean gap " << meanGap << '\n';
            return 0;
        }
        if (verifyCmd->parsed()) {
            verify.suite = bench::parse_suite(suite);
            // Suite defaults reproduce the acceptance configurations.
            switch (verify.suite) {
                case bench::Suite::guarantee:
                    if (!failOpt->count()) verify.allowedFailures = 1;
                    break;
                case bench::Suite::theorem:
                    if (!nOpt->count()) verify.n = 1000000;
                    break;
                case bench::Suite::maxload:
                    if (!nOpt->count()) verify.n = 1000000;
                    if (!kOpt->count()) verify.k = 64;
                    if (!trialsOpt->count()) verify.trials = 400;
                    break;
            }
            return bench::run_verify(verify, output.stream(), std::cerr) ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
