#include <destrike/commands.hpp>
#include <destrike/errors.hpp>

#include "CLI11.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <iostream>

namespace fs = std::filesystem;
using namespace destrike;

namespace {

// Training allocates and frees many large activation buffers per step.
// Keeping them on the heap instead of fresh mmaps is markedly faster.
void tune_allocator() {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

ArchName arch_option(const std::string& name) {
    const auto arch = parse_arch(name);
    if (!arch) throw ValidationError("unknown architecture '" + name + "'");
    return *arch;
}

}  // namespace

int main(int argc, char** argv) {
    tune_allocator();
    CLI::App app{"Strikethrough removal for handwritten words"};
    app.require_subcommand(1);
    std::ostream& log = std::cerr;

    SynthOptions synth;
    std::string synth_as;
    auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic struck/clean partitions");
    synth_cmd->add_option("clean_dir", synth.clean_dir, "Directory of clean word PNGs")->required();
    synth_cmd->add_option("out_dir", synth.out_dir, "Dataset root to write")->required();
    synth_cmd->add_option("-p,--partitions", synth.partitions, "Number of partitions")->capture_default_str();
    synth_cmd->add_option("-s,--seed", synth.seed, "Global seed")->capture_default_str();
    synth_cmd->add_option("--as", synth_as, "Write one partition under this split name");
    synth_cmd->add_option("--name", synth.name, "Dataset name for the manifest");

    fs::path words_out;
    std::size_t words_offset = 0, words_count = 126;
    std::uint64_t words_seed = 0;
    auto* words_cmd = app.add_subcommand("render-words", "Render the builtin word list as clean images");
    words_cmd->add_option("out_dir", words_out)->required();
    words_cmd->add_option("--offset", words_offset)->capture_default_str();
    words_cmd->add_option("--count", words_count)->capture_default_str();
    words_cmd->add_option("-s,--seed", words_seed)->capture_default_str();

    TrainOptions train;
    int train_parallel = 0;
    std::string train_profile;
    auto* train_cmd = app.add_subcommand("train", "Train every configured architecture and repetition");
    train_cmd->add_option("config", train.config, "Experiment config file")->required()->check(CLI::ExistingFile);
    train_cmd->add_flag("--force", train.force, "Overwrite an existing experiment directory");
    train_cmd->add_option("--profile", train_profile, "Named profile (desk)");
    train_cmd->add_option("-j,--parallel", train_parallel, "Concurrent repetitions");

    EvaluateOptions evaluate;
    std::string eval_dataset, eval_out;
    auto* eval_cmd = app.add_subcommand("evaluate", "Score every run of an experiment on a test split");
    eval_cmd->add_option("experiment_dir", evaluate.experiment_dir)->required()->check(CLI::ExistingDirectory);
    eval_cmd->add_option("--dataset", eval_dataset, "Test dataset root or manifest");
    eval_cmd->add_option("--split", evaluate.split, "Test split name");
    eval_cmd->add_flag("--identity-baseline", evaluate.identity_baseline, "Also score the unchanged input");
    eval_cmd->add_option("--out", eval_out, "Output directory (default <experiment>/eval)");
    eval_cmd->add_option("--limit", evaluate.limit, "Evaluate at most this many pairs");

    fs::path clean_ckpt, clean_in, clean_out;
    std::string clean_arch;
    auto* clean_cmd = app.add_subcommand("clean", "Remove the strikethrough from one image");
    clean_cmd->add_option("checkpoint", clean_ckpt)->required()->check(CLI::ExistingFile);
    clean_cmd->add_option("input", clean_in)->required()->check(CLI::ExistingFile);
    clean_cmd->add_option("output", clean_out)->required();
    clean_cmd->add_option("--arch", clean_arch, "Expected architecture");

    fs::path mean_exp, mean_in, mean_out;
    std::string mean_arch;
    auto* mean_cmd = app.add_subcommand("mean-image", "Average the outputs of every repetition of one arch");
    mean_cmd->add_option("experiment_dir", mean_exp)->required()->check(CLI::ExistingDirectory);
    mean_cmd->add_option("arch", mean_arch)->required();
    mean_cmd->add_option("input", mean_in)->required()->check(CLI::ExistingFile);
    mean_cmd->add_option("output", mean_out)->required();

    FetchOptions fetch;
    auto* fetch_cmd = app.add_subcommand("fetch", "Download a published dataset");
    fetch_cmd->add_option("dataset", fetch.dataset)->required();
    fetch_cmd->add_option("out_dir", fetch.out_dir)->required();
    fetch_cmd->add_option("--record", fetch.record, "Zenodo record id");
    fetch_cmd->add_option("--api-base", fetch.api_base, "Zenodo API base URL")->capture_default_str();

    std::vector<fs::path> report_exps;
    fs::path report_out = "report";
    auto* report_cmd = app.add_subcommand("report", "Combine evaluation summaries into tables");
    report_cmd->add_option("experiments", report_exps)->required();
    report_cmd->add_option("-o,--out", report_out)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*synth_cmd) {
            if (!synth_as.empty()) synth.split_as = synth_as;
            cmd_synth(synth, log);
        } else if (*words_cmd) {
            cmd_render_words(words_out, words_offset, words_count, words_seed, log);
        } else if (*train_cmd) {
            if (!train_profile.empty()) train.profile = train_profile;
            if (train_parallel != 0) train.parallel = train_parallel;
            cmd_train(train, log);
        } else if (*eval_cmd) {
            if (!eval_dataset.empty()) evaluate.dataset = fs::path(eval_dataset);
            if (!eval_out.empty()) evaluate.out_dir = fs::path(eval_out);
            const EvaluateResult r = cmd_evaluate(evaluate, log);
            log << "evaluate: wrote " << r.out_dir.string() << '\n';
        } else if (*clean_cmd) {
            std::optional<ArchName> expected;
            if (!clean_arch.empty()) expected = arch_option(clean_arch);
            cmd_clean(clean_ckpt, clean_in, clean_out, expected, log);
        } else if (*mean_cmd) {
            cmd_mean_image(mean_exp, arch_option(mean_arch), mean_in, mean_out, log);
        } else if (*fetch_cmd) {
            cmd_fetch(fetch, log);
        } else if (*report_cmd) {
            cmd_report(report_exps, report_out, log);
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
