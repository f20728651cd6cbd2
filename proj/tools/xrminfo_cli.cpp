#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "xrminfo/core/error.hpp"
#include "xrminfo/io/report.hpp"
#include "xrminfo/io/study.hpp"

namespace {

using namespace xrminfo;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "csv";
    std::string scope;
    std::vector<std::string> params;
};

int run(io::StudyKind kind, const Options &opt) {
    io::StudyConfig cfg = opt.config.empty() ? io::StudyConfig{} : io::load_study_config(opt.config);
    if (opt.seed) cfg.seed = *opt.seed;
    if (!opt.scope.empty()) {
        cfg.convention.scope = io::parse_scope(opt.scope);
        if (cfg.dataset) cfg.dataset->scope = cfg.convention.scope;
    }
    for (const auto &kv : opt.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) fail(ErrorCategory::Param, "--param expects key=value, got '" + kv + "'");
        cfg.params.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    const auto format = io::parse_format(opt.format);
    const auto report = io::run_study(kind, cfg);
    if (opt.out.empty() || opt.out == "-") {
        std::cout << io::render(report, format);
    } else {
        io::emit(report, format, opt.out);
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Information budget studies for X-ray micro-CT pipelines"};
    app.require_subcommand(1);
    Options opt;
    std::optional<io::StudyKind> chosen;

    for (auto kind : io::kStudyKinds) {
        const std::string name(io::study_name(kind));
        auto *sub = app.add_subcommand(name, "run the " + name + " study");
        sub->add_option("--config", opt.config, "JSON study config");
        sub->add_option("--seed", opt.seed, "seed for every random draw");
        sub->add_option("--out", opt.out, "output file (default stdout)");
        sub->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--norm-scope", opt.scope, "global or per-image")
            ->check(CLI::IsMember({"global", "per-image", "per_image"}));
        sub->add_option("--param", opt.params, "study parameter override key=value (repeatable)");
        sub->callback([&chosen, kind] { chosen = kind; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: ParamError: " << e.what() << "\n";
        return category_exit_code(ErrorCategory::Param);
    }

    try {
        return run(*chosen, opt);
    } catch (const Error &e) {
        std::cerr << "error: " << category_name(e.category()) << ": " << e.what() << "\n";
        return category_exit_code(e.category());
    } catch (const std::exception &e) {
        std::cerr << "error: Internal: " << e.what() << "\n";
        return 1;
    }
}
