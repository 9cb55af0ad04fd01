#include "frbm/cli.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "frbm/cd.hpp"
#include "frbm/config.hpp"
#include "frbm/dataio.hpp"
#include "frbm/errors.hpp"
#include "frbm/evaluation.hpp"
#include "frbm/exact.hpp"
#include "frbm/fw.hpp"
#include "frbm/io.hpp"
#include "frbm/threads.hpp"

namespace frbm {
namespace {

constexpr const char* kVersion = "0.1.0";

using nlohmann::json;

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

const char* kUsage =
    "usage: frbm [--threads N] <subcommand> [flags]\n"
    "\n"
    "subcommands:\n"
    "  train-fw      fit a growing weight mix by conditional-gradient updates\n"
    "                  --data FSET --out FRBM [--config INI] [--valid FSET]\n"
    "                  [--init FRBM] [--report CSV] [--out-text PATH]\n"
    "  train-cd      fit a fixed-width machine by contrastive divergence\n"
    "                  --data FSET --out FRBM [--config INI] [--valid FSET]\n"
    "                  [--init FRBM] [--report CSV]\n"
    "  eval-exact    enumerate log Z and average test log-likelihood\n"
    "                  --model FRBM --data FSET [--out CSV]\n"
    "  eval-ais      annealed-importance-sampling likelihood estimate\n"
    "                  --model FRBM --data FSET --out CSV [--config INI]\n"
    "                  [--runs N] [--schedule default|uniform:N|@FILE] [--seed N]\n"
    "  classify      softmax readout on hidden features vs raw bits\n"
    "                  --model FRBM --train FSET --test FSET --out CSV\n"
    "                  [--l2 X] [--iters N]\n"
    "  convert-data  IDX images (+ labels) -> FSET\n"
    "                  --images IDX --out FSET [--labels IDX] [--threshold N]\n"
    "\n"
    "Exit codes: 0 ok, 1 usage or validation error, 2 runtime failure.\n"
    "Every output file gets a sibling <name>.manifest.json recording the\n"
    "command, resolved config, seeds, and input digests.\n";

std::map<std::string, std::string> parse_flags(const std::vector<std::string>& args,
                                               std::size_t start,
                                               const std::set<std::string>& allowed) {
    std::map<std::string, std::string> flags;
    for (std::size_t i = start; i < args.size(); i += 2) {
        const std::string& name = args[i];
        if (allowed.find(name) == allowed.end()) {
            throw std::invalid_argument("unknown flag '" + name + "'");
        }
        if (i + 1 >= args.size()) {
            throw std::invalid_argument("flag '" + name + "' needs a value");
        }
        if (!flags.emplace(name, args[i + 1]).second) {
            throw std::invalid_argument("flag '" + name + "' given twice");
        }
    }
    return flags;
}

std::string require_flag(const std::map<std::string, std::string>& flags, const std::string& name) {
    auto it = flags.find(name);
    if (it == flags.end()) throw std::invalid_argument("missing required flag '" + name + "'");
    return it->second;
}

const std::string* find_flag(const std::map<std::string, std::string>& flags,
                             const std::string& name) {
    auto it = flags.find(name);
    return it == flags.end() ? nullptr : &it->second;
}

long long flag_int(const std::map<std::string, std::string>& flags, const std::string& name,
                   long long fallback) {
    const std::string* raw = find_flag(flags, name);
    if (!raw) return fallback;
    std::size_t used = 0;
    long long x = std::stoll(*raw, &used);
    if (used != raw->size()) throw std::invalid_argument("flag '" + name + "' expects an integer");
    return x;
}

double flag_real(const std::map<std::string, std::string>& flags, const std::string& name,
                 double fallback) {
    const std::string* raw = find_flag(flags, name);
    if (!raw) return fallback;
    std::size_t used = 0;
    double x = std::stod(*raw, &used);
    if (used != raw->size()) throw std::invalid_argument("flag '" + name + "' expects a number");
    return x;
}

struct RunContext {
    std::string subcommand;
    std::vector<std::string> argv;
    FullConfig config;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
};

void note_input(RunContext& ctx, const std::string& path) {
    ctx.inputs.emplace_back(path, file_digest_hex(path));
}

void write_manifests(const RunContext& ctx) {
    json config_json = json::object();
    for (const auto& entry : dump_config(ctx.config)) {
        config_json[entry.section][entry.key] = entry.value;
    }
    json inputs_json = json::object();
    for (const auto& [path, digest] : ctx.inputs) inputs_json[path] = digest;
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.started).count();
    json manifest = {
        {"tool", "frbm"},
        {"version", kVersion},
        {"subcommand", ctx.subcommand},
        {"argv", ctx.argv},
        {"config", config_json},
        {"seed", ctx.seed},
        {"inputs", inputs_json},
        {"outputs", ctx.outputs},
        {"threads", thread_cap()},
        {"wall_time_seconds", wall},
    };
    const std::string text = manifest.dump(2) + "\n";
    for (const std::string& output : ctx.outputs) {
        atomic_write_text(output + ".manifest.json", text);
    }
}

FullConfig load_config_flag(const std::map<std::string, std::string>& flags) {
    const std::string* path = find_flag(flags, "--config");
    return path ? load_config(*path) : FullConfig{};
}

// Dense machine for evaluation: a standard mix converts exactly; fractional
// masses go through the proposal expansion, which changes the distribution,
// so say so on stderr.
RbmModel dense_for_eval(const WeightAtomMix& mix, const char* what) {
    if (mix.is_standard()) return to_standard_rbm(mix);
    std::cerr << "frbm: " << what
              << ": fractional mix expanded to its proposal machine (approximate)\n";
    return fractional_proposal_rbm(mix);
}

std::vector<double> materialize_schedule(const std::string& spec, RunContext& ctx) {
    if (spec == "default") return default_schedule();
    if (spec.rfind("uniform:", 0) == 0) {
        return uniform_schedule(std::atoi(spec.c_str() + 8));
    }
    if (spec.rfind('@', 0) == 0) {
        const std::string path = spec.substr(1);
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open " + path);
        note_input(ctx, path);
        std::vector<double> schedule;
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (std::size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
            std::size_t a = line.find_first_not_of(" \t\r");
            if (a == std::string::npos) continue;
            std::size_t b = line.find_last_not_of(" \t\r");
            const std::string token = line.substr(a, b - a + 1);
            char* end = nullptr;
            double beta = std::strtod(token.c_str(), &end);
            if (end == token.c_str() || *end != '\0') {
                throw ConfigError("bad schedule value '" + token + "'", line_no);
            }
            schedule.push_back(beta);
        }
        return schedule;
    }
    throw std::invalid_argument("schedule must be default, uniform:N, or @file");
}

std::string runs_csv_path(const std::string& out) {
    if (out.size() > 4 && out.compare(out.size() - 4, 4, ".csv") == 0) {
        return out.substr(0, out.size() - 4) + ".runs.csv";
    }
    return out + ".runs";
}

int cmd_train_fw(const std::vector<std::string>& args) {
    auto flags = parse_flags(args, 2,
                             {"--config", "--data", "--valid", "--init", "--out", "--report",
                              "--out-text"});
    RunContext ctx;
    ctx.subcommand = "train-fw";
    ctx.argv = args;
    ctx.config = load_config_flag(flags);
    if (const std::string* path = find_flag(flags, "--config")) note_input(ctx, *path);
    ctx.seed = ctx.config.fw.seed;

    const std::string data_path = require_flag(flags, "--data");
    const std::string out_path = require_flag(flags, "--out");
    BinaryDataset data = load_fset(data_path);
    note_input(ctx, data_path);

    BinaryDataset train = std::move(data);
    BinaryDataset valid;
    if (const std::string* path = find_flag(flags, "--valid")) {
        valid = load_fset(*path);
        note_input(ctx, *path);
    } else if (ctx.config.data.validation_count > 0) {
        SplitResult parts = split(train, ctx.config.data.validation_count, ctx.config.data.seed);
        train = std::move(parts.train);
        valid = std::move(parts.validation);
    } else {
        valid = train;
    }
    std::cerr << "frbm: train-fw seed " << ctx.config.fw.seed << "\n";

    FwResult result = [&] {
        if (const std::string* path = find_flag(flags, "--init")) {
            WeightAtomMix init = load_frbm(*path);
            note_input(ctx, *path);
            return fw_train(train, valid, ctx.config.fw, init);
        }
        return fw_train(train, valid, ctx.config.fw);
    }();

    save_frbm(out_path, result.model);
    ctx.outputs.push_back(out_path);
    if (const std::string* path = find_flag(flags, "--out-text")) {
        save_frbm_text(*path, result.model);
        ctx.outputs.push_back(*path);
    }
    if (const std::string* path = find_flag(flags, "--report")) {
        write_report_csv(*path, result.report);
        ctx.outputs.push_back(*path);
    }
    write_manifests(ctx);
    std::cout << "atoms " << result.model.atom_count() << "\nselected_t "
              << result.report.selected_t << "\n";
    return 0;
}

int cmd_train_cd(const std::vector<std::string>& args) {
    auto flags =
        parse_flags(args, 2, {"--config", "--data", "--valid", "--init", "--out", "--report"});
    RunContext ctx;
    ctx.subcommand = "train-cd";
    ctx.argv = args;
    ctx.config = load_config_flag(flags);
    if (const std::string* path = find_flag(flags, "--config")) note_input(ctx, *path);
    ctx.seed = ctx.config.cd.seed;

    const std::string data_path = require_flag(flags, "--data");
    const std::string out_path = require_flag(flags, "--out");
    BinaryDataset train = load_fset(data_path);
    note_input(ctx, data_path);

    BinaryDataset valid;
    if (const std::string* path = find_flag(flags, "--valid")) {
        valid = load_fset(*path);
        note_input(ctx, *path);
    } else if (ctx.config.data.validation_count > 0) {
        SplitResult parts = split(train, ctx.config.data.validation_count, ctx.config.data.seed);
        train = std::move(parts.train);
        valid = std::move(parts.validation);
    } else {
        valid = train;
    }
    std::cerr << "frbm: train-cd seed " << ctx.config.cd.seed << "\n";

    CdResult result = [&] {
        if (const std::string* path = find_flag(flags, "--init")) {
            WeightAtomMix init = load_frbm(*path);
            note_input(ctx, *path);
            return cd_train(train, valid, ctx.config.cd, to_standard_rbm(init));
        }
        return cd_train(train, valid, ctx.config.cd);
    }();

    save_frbm(out_path, from_standard_rbm(result.model));
    ctx.outputs.push_back(out_path);
    if (const std::string* path = find_flag(flags, "--report")) {
        write_report_csv(*path, result.report);
        ctx.outputs.push_back(*path);
    }
    write_manifests(ctx);
    std::cout << "hidden_units " << result.model.hidden_dim() << "\nselected_restart "
              << result.report.selected_restart << "\n";
    return 0;
}

int cmd_eval_exact(const std::vector<std::string>& args) {
    auto flags = parse_flags(args, 2, {"--model", "--data", "--out"});
    RunContext ctx;
    ctx.subcommand = "eval-exact";
    ctx.argv = args;

    const std::string model_path = require_flag(flags, "--model");
    const std::string data_path = require_flag(flags, "--data");
    WeightAtomMix mix = load_frbm(model_path);
    note_input(ctx, model_path);
    BinaryDataset data = load_fset(data_path);
    note_input(ctx, data_path);

    const double log_z = exact_log_partition(mix);
    const double avg = exact_avg_loglik(mix, data);
    std::cout << "log_z " << fmt17(log_z) << "\navg_test_loglik " << fmt17(avg) << "\nn_test "
              << data.size() << "\n";
    if (const std::string* path = find_flag(flags, "--out")) {
        std::ostringstream csv;
        csv << "log_z,avg_test_loglik,n_test\n"
            << fmt17(log_z) << ',' << fmt17(avg) << ',' << data.size() << "\n";
        atomic_write_text(*path, csv.str());
        ctx.outputs.push_back(*path);
        write_manifests(ctx);
    }
    return 0;
}

int cmd_eval_ais(const std::vector<std::string>& args) {
    auto flags = parse_flags(args, 2,
                             {"--model", "--data", "--out", "--config", "--runs", "--schedule",
                              "--seed"});
    RunContext ctx;
    ctx.subcommand = "eval-ais";
    ctx.argv = args;
    ctx.config = load_config_flag(flags);
    if (const std::string* path = find_flag(flags, "--config")) note_input(ctx, *path);

    const std::string model_path = require_flag(flags, "--model");
    const std::string data_path = require_flag(flags, "--data");
    const std::string out_path = require_flag(flags, "--out");
    WeightAtomMix mix = load_frbm(model_path);
    note_input(ctx, model_path);
    BinaryDataset data = load_fset(data_path);
    note_input(ctx, data_path);

    const std::string schedule_spec =
        find_flag(flags, "--schedule") ? *find_flag(flags, "--schedule") : ctx.config.ais.schedule;
    AisConfig ais;
    ais.schedule = materialize_schedule(schedule_spec, ctx);
    ais.runs = static_cast<int>(flag_int(flags, "--runs", ctx.config.ais.runs));
    ais.seed = static_cast<std::uint64_t>(flag_int(
        flags, "--seed", static_cast<long long>(ctx.config.ais.seed)));
    ctx.seed = ais.seed;
    std::cerr << "frbm: eval-ais seed " << ais.seed << ", " << ais.schedule.size()
              << " temperatures, " << ais.runs << " runs\n";

    const RbmModel model = dense_for_eval(mix, "eval-ais");
    const LikelihoodEstimate est = evaluate_ais(model, data, ais);

    std::cout << "log_z_mean " << fmt17(est.log_z_mean) << "\nlog_z_std " << fmt17(est.log_z_std)
              << "\navg_test_loglik " << fmt17(est.avg_test_loglik) << "\nn_test " << est.n_test
              << "\n";
    std::ostringstream csv;
    csv << "log_z_mean,log_z_std,base_log_z,avg_test_loglik,n_test,runs\n"
        << fmt17(est.log_z_mean) << ',' << fmt17(est.log_z_std) << ',' << fmt17(est.base_log_z)
        << ',' << fmt17(est.avg_test_loglik) << ',' << est.n_test << ',' << ais.runs << "\n";
    atomic_write_text(out_path, csv.str());
    ctx.outputs.push_back(out_path);

    std::ostringstream runs_csv;
    runs_csv << "run,log_weight\n";
    for (std::size_t r = 0; r < est.run_log_weights.size(); ++r) {
        runs_csv << r << ',' << fmt17(est.run_log_weights[r]) << "\n";
    }
    const std::string runs_path = runs_csv_path(out_path);
    atomic_write_text(runs_path, runs_csv.str());
    ctx.outputs.push_back(runs_path);
    write_manifests(ctx);
    return 0;
}

Mat raw_feature_matrix(const BinaryDataset& data) {
    Mat x(data.size(), data.dim());
    for (std::int64_t n = 0; n < data.size(); ++n) {
        for (int j = 0; j < data.dim(); ++j) x(n, j) = data.vectors().get(n, j);
    }
    return x;
}

int cmd_classify(const std::vector<std::string>& args) {
    auto flags = parse_flags(args, 2, {"--model", "--train", "--test", "--out", "--l2", "--iters"});
    RunContext ctx;
    ctx.subcommand = "classify";
    ctx.argv = args;

    const std::string model_path = require_flag(flags, "--model");
    const std::string train_path = require_flag(flags, "--train");
    const std::string test_path = require_flag(flags, "--test");
    const std::string out_path = require_flag(flags, "--out");
    WeightAtomMix mix = load_frbm(model_path);
    note_input(ctx, model_path);
    BinaryDataset train = load_fset(train_path);
    note_input(ctx, train_path);
    BinaryDataset test = load_fset(test_path);
    note_input(ctx, test_path);
    if (!train.has_labels() || !test.has_labels()) {
        throw std::invalid_argument("classify: both datasets need labels");
    }
    const double l2 = flag_real(flags, "--l2", 1e-4);
    const int iters = static_cast<int>(flag_int(flags, "--iters", 500));

    const RbmModel model = dense_for_eval(mix, "classify");
    const Mat train_features = extract_features(model, train);
    const Mat test_features = extract_features(model, test);
    const ClassifyResult on_features =
        softmax_classify(train_features, train.labels(), test_features, test.labels(), l2, iters);
    const ClassifyResult on_raw = softmax_classify(raw_feature_matrix(train), train.labels(),
                                                   raw_feature_matrix(test), test.labels(), l2,
                                                   iters);

    std::cout << "feature_error " << fmt17(on_features.error_rate) << "\nraw_error "
              << fmt17(on_raw.error_rate) << "\nn_test " << test.size() << "\n";
    std::ostringstream csv;
    csv << "feature_error,raw_error,n_train,n_test\n"
        << fmt17(on_features.error_rate) << ',' << fmt17(on_raw.error_rate) << ',' << train.size()
        << ',' << test.size() << "\n";
    atomic_write_text(out_path, csv.str());
    ctx.outputs.push_back(out_path);
    write_manifests(ctx);
    return 0;
}

int cmd_convert_data(const std::vector<std::string>& args) {
    auto flags = parse_flags(args, 2, {"--images", "--labels", "--threshold", "--out"});
    RunContext ctx;
    ctx.subcommand = "convert-data";
    ctx.argv = args;

    const std::string images_path = require_flag(flags, "--images");
    const std::string out_path = require_flag(flags, "--out");
    const int threshold = static_cast<int>(flag_int(flags, "--threshold", 127));

    const RawImageSet images = read_idx_images(images_path);
    note_input(ctx, images_path);
    BinaryDataset data = binarize(images, threshold);
    if (const std::string* path = find_flag(flags, "--labels")) {
        const std::vector<std::uint8_t> labels = read_idx_labels(*path);
        note_input(ctx, *path);
        if (static_cast<std::int64_t>(labels.size()) != data.size()) {
            throw std::invalid_argument("convert-data: label count does not match image count");
        }
        data.set_labels(std::vector<std::uint16_t>(labels.begin(), labels.end()));
    }
    save_fset(out_path, data);
    ctx.outputs.push_back(out_path);
    write_manifests(ctx);
    std::cout << "rows " << data.size() << "\ndim " << data.dim() << "\nlabeled "
              << (data.has_labels() ? 1 : 0) << "\n";
    return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& raw_args) {
    std::vector<std::string> args;
    args.reserve(raw_args.size());
    // --threads is global; peel it off wherever it appears.
    for (std::size_t i = 0; i < raw_args.size(); ++i) {
        if (raw_args[i] == "--threads") {
            if (i + 1 >= raw_args.size()) {
                std::cerr << "frbm: error: --threads needs a value\n";
                return 1;
            }
            int n = std::atoi(raw_args[i + 1].c_str());
            if (n < 1) {
                std::cerr << "frbm: error: --threads expects a positive integer\n";
                return 1;
            }
            set_thread_cap(n);
            ++i;
            continue;
        }
        args.push_back(raw_args[i]);
    }
    if (args.size() < 2) {
        std::cerr << kUsage;
        return 1;
    }
    const std::string& sub = args[1];
    try {
        if (sub == "--help" || sub == "-h" || sub == "help") {
            std::cout << kUsage << "\nconfig keys (defaults shown):\n" << config_help();
            return 0;
        }
        if (sub == "--version") {
            std::cout << "frbm " << kVersion << "\n";
            return 0;
        }
        if (sub == "train-fw") return cmd_train_fw(args);
        if (sub == "train-cd") return cmd_train_cd(args);
        if (sub == "eval-exact") return cmd_eval_exact(args);
        if (sub == "eval-ais") return cmd_eval_ais(args);
        if (sub == "classify") return cmd_classify(args);
        if (sub == "convert-data") return cmd_convert_data(args);
        std::cerr << "frbm: error: unknown subcommand '" << sub << "'\n" << kUsage;
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "frbm: error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "frbm: error: " << e.what() << "\n";
        return 2;
    }
}

int dispatch(int argc, char** argv) {
    return dispatch(std::vector<std::string>(argv, argv + argc));
}

}  // namespace frbm
