#include <destrike/config.hpp>

#include <destrike/dataset.hpp>
#include <destrike/errors.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

namespace destrike {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    while (true) {
        const auto comma = s.find(',');
        const std::string_view item = trim(s.substr(0, comma));
        if (!item.empty()) out.emplace_back(item);
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
    Int v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<double> parse_real(std::string_view s) {
    const std::string text(s);
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size()) return std::nullopt;
    return v;
}

std::string real_to_string(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
    return out;
}

fs::path resolve(const fs::path& base, std::string_view value) {
    const fs::path p(value);
    return (p.is_absolute() ? p : base / p).lexically_normal();
}

[[noreturn]] void fail(const std::string& header, const std::vector<std::string>& problems) {
    std::string msg = header;
    for (const auto& p : problems) msg += "\n  " + p;
    throw ValidationError(msg);
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view text, const fs::path& base_dir) {
    ExperimentConfig c;
    std::vector<std::string> problems;
    std::set<std::string> seen;

    const auto bad = [&](const std::string& key, std::string_view value, const char* expected) {
        problems.push_back(key + ": '" + std::string(value) + "' is not " + expected);
    };
    const auto set_int = [&](int& field, int minimum) {
        return [&field, minimum, &bad](const std::string& key, std::string_view v) {
            const auto n = parse_int<int>(v);
            if (!n || *n < minimum) return bad(key, v, minimum > 0 ? "a positive integer" : "a non-negative integer");
            field = *n;
        };
    };
    const auto set_size = [&](std::size_t& field) {
        return [&field, &bad](const std::string& key, std::string_view v) {
            const auto n = parse_int<std::size_t>(v);
            if (!n) return bad(key, v, "a non-negative integer");
            field = *n;
        };
    };
    const auto set_real = [&](double& field) {
        return [&field, &bad](const std::string& key, std::string_view v) {
            const auto x = parse_real(v);
            if (!x) return bad(key, v, "a number");
            field = *x;
        };
    };

    using Setter = std::function<void(const std::string&, std::string_view)>;
    const std::map<std::string, Setter> setters = {
        {"name", [&](const std::string& key, std::string_view v) {
             if (v.empty() || v.find('/') != std::string_view::npos) return bad(key, v, "a plain directory name");
             c.name = std::string(v);
         }},
        {"dataset", [&](const std::string&, std::string_view v) { c.dataset = resolve(base_dir, v); }},
        {"train_splits", [&](const std::string& key, std::string_view v) {
             c.train_splits = split_list(v);
             if (c.train_splits.empty()) bad(key, v, "a list of split names");
         }},
        {"validation_split", [&](const std::string&, std::string_view v) { c.validation_split = std::string(v); }},
        {"test_dataset", [&](const std::string&, std::string_view v) { c.test_dataset = resolve(base_dir, v); }},
        {"test_split", [&](const std::string&, std::string_view v) { c.test_split = std::string(v); }},
        {"archs", [&](const std::string& key, std::string_view v) {
             c.archs.clear();
             for (const std::string& a : split_list(v)) {
                 const auto arch = parse_arch(a);
                 if (!arch) {
                     problems.push_back(key + ": unknown architecture '" + a +
                                        "' (expected simple_cnn, shallow, unet or generator)");
                 } else {
                     c.archs.push_back(*arch);
                 }
             }
             if (c.archs.empty() && split_list(v).empty()) bad(key, v, "a list of architectures");
         }},
        {"epochs", set_int(c.epochs, 1)},
        {"batch_size", set_int(c.batch_size, 1)},
        {"learning_rate", set_real(c.adam.learning_rate)},
        {"beta1", set_real(c.adam.beta1)},
        {"beta2", set_real(c.adam.beta2)},
        {"epsilon", set_real(c.adam.epsilon)},
        {"repetitions", set_int(c.repetitions, 1)},
        {"run_seed", [&](const std::string& key, std::string_view v) {
             const auto n = parse_int<std::uint64_t>(v);
             if (!n) return bad(key, v, "an unsigned integer seed");
             c.run_seed = *n;
         }},
        {"parallel", set_int(c.parallel, 1)},
        {"train_limit", set_size(c.train_limit)},
        {"validation_limit", set_size(c.validation_limit)},
        {"output_dir", [&](const std::string&, std::string_view v) { c.output_dir = resolve(base_dir, v); }},
        {"profile", [&](const std::string&, std::string_view v) {
             if (v.empty()) {
                 c.profile.reset();
             } else {
                 c.profile = std::string(v);
             }
         }},
    };

    c.output_dir = resolve(base_dir, "runs");
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line(raw);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            problems.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
            continue;
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) {
            problems.push_back("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
            continue;
        }
        if (!seen.insert(key).second) {
            problems.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
            continue;
        }
        it->second(key, value);
    }

    if (!seen.contains("dataset")) problems.emplace_back("dataset: required");
    if (!(c.adam.learning_rate > 0.0)) problems.emplace_back("learning_rate: must be positive");
    if (!(c.adam.beta1 > 0.0 && c.adam.beta1 < 1.0)) problems.emplace_back("beta1: must lie in (0, 1)");
    if (!(c.adam.beta2 > 0.0 && c.adam.beta2 < 1.0)) problems.emplace_back("beta2: must lie in (0, 1)");
    if (!(c.adam.epsilon > 0.0)) problems.emplace_back("epsilon: must be positive");
    if (c.profile) {
        try {
            apply_profile(c, *c.profile);
        } catch (const ValidationError& e) {
            problems.emplace_back(e.what());
        }
    }
    if (!problems.empty()) fail("invalid experiment config:", problems);
    return c;
}

ExperimentConfig load_experiment_config(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ValidationError("cannot read config " + file.string());
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_experiment_config(text, fs::absolute(file).parent_path());
}

std::string serialize_experiment_config(const ExperimentConfig& c) {
    std::vector<std::string> archs;
    for (ArchName a : c.archs) archs.emplace_back(to_string(a));
    std::ostringstream out;
    out << "# resolved experiment configuration\n";
    out << "name = " << c.name << '\n';
    out << "dataset = " << fs::absolute(c.dataset).string() << '\n';
    out << "train_splits = " << join(c.train_splits) << '\n';
    out << "validation_split = " << c.validation_split << '\n';
    if (!c.test_dataset.empty()) out << "test_dataset = " << fs::absolute(c.test_dataset).string() << '\n';
    out << "test_split = " << c.test_split << '\n';
    out << "archs = " << join(archs) << '\n';
    out << "epochs = " << c.epochs << '\n';
    out << "batch_size = " << c.batch_size << '\n';
    out << "learning_rate = " << real_to_string(c.adam.learning_rate) << '\n';
    out << "beta1 = " << real_to_string(c.adam.beta1) << '\n';
    out << "beta2 = " << real_to_string(c.adam.beta2) << '\n';
    out << "epsilon = " << real_to_string(c.adam.epsilon) << '\n';
    out << "repetitions = " << c.repetitions << '\n';
    out << "run_seed = " << c.run_seed << '\n';
    out << "parallel = " << c.parallel << '\n';
    out << "train_limit = " << c.train_limit << '\n';
    out << "validation_limit = " << c.validation_limit << '\n';
    out << "output_dir = " << fs::absolute(c.output_dir).string() << '\n';
    if (c.profile) out << "profile = " << *c.profile << '\n';
    return out.str();
}

void apply_profile(ExperimentConfig& c, std::string_view profile) {
    if (profile != "desk") throw ValidationError("profile: unknown profile '" + std::string(profile) + "' (known: desk)");
    c.profile = std::string(profile);
    c.archs = {ArchName::shallow};
    c.repetitions = 1;
    c.train_limit = c.train_limit == 0 ? 640 : std::min<std::size_t>(c.train_limit, 640);
    c.validation_limit = c.validation_limit == 0 ? 64 : std::min<std::size_t>(c.validation_limit, 64);
}

fs::path manifest_file(const fs::path& dataset) {
    return fs::is_directory(dataset) ? dataset / kManifestFile : dataset;
}

void resolve_experiment_config(ExperimentConfig& c) {
    std::vector<std::string> problems;
    const auto check_dataset = [&](const fs::path& dataset, const char* key) -> std::optional<Manifest> {
        const fs::path file = manifest_file(dataset);
        if (!fs::exists(file)) {
            problems.push_back(std::string(key) + ": no manifest at " + file.string());
            return std::nullopt;
        }
        try {
            return load_manifest(file);
        } catch (const Error& e) {
            problems.push_back(std::string(key) + ": " + e.what());
            return std::nullopt;
        }
    };

    if (const auto m = check_dataset(c.dataset, "dataset")) {
        if (c.train_splits == std::vector<std::string>{"partitions"}) {
            c.train_splits.clear();
            for (const auto& [name, split] : m->splits) {
                if (name.rfind("partition-", 0) == 0) c.train_splits.push_back(name);
            }
            if (c.train_splits.empty()) problems.emplace_back("train_splits: dataset has no partition-N splits");
        }
        for (const auto& s : c.train_splits) {
            if (!m->has_split(s)) problems.push_back("train_splits: dataset has no split '" + s + "'");
        }
        if (!m->has_split(c.validation_split)) {
            problems.push_back("validation_split: dataset has no split '" + c.validation_split + "'");
        }
    }
    if (!c.test_dataset.empty()) {
        if (const auto m = check_dataset(c.test_dataset, "test_dataset"); m && !m->has_split(c.test_split)) {
            problems.push_back("test_split: test dataset has no split '" + c.test_split + "'");
        }
    }
    if (!problems.empty()) fail("invalid experiment config:", problems);
}

fs::path experiment_dir(const ExperimentConfig& c) { return c.output_dir / c.name; }

TrainConfig train_config_for(const ExperimentConfig& c, ArchName arch) {
    TrainConfig t;
    t.model = reference_config(arch);
    t.epochs = c.epochs;
    t.batch_size = c.batch_size;
    t.adam = c.adam;
    t.run_seed = derive_seed(c.run_seed, to_string(arch));
    t.repetitions = c.repetitions;
    t.manifest = manifest_file(c.dataset);
    t.train_splits = c.train_splits;
    t.validation_split = c.validation_split;
    t.train_limit = c.train_limit;
    t.validation_limit = c.validation_limit;
    return t;
}

}  // namespace destrike
