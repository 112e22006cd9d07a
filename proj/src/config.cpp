#include "calliper/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "calliper/csv.hpp"

namespace calliper {

namespace {

double parse_number(const std::string& section, const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigInvalidError("[" + section + "] " + key + ": not a number: '" + value + "'");
    }
}

std::size_t parse_count(const std::string& section, const std::string& key,
                        const std::string& value) {
    const double v = parse_number(section, key, value);
    if (v < 0 || v != std::floor(v)) {
        throw ConfigInvalidError("[" + section + "] " + key + ": not a non-negative integer");
    }
    return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& section, const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw ConfigInvalidError("[" + section + "] " + key + ": expected true or false");
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> parts;
    std::string current;
    for (char c : value) {
        if (c == ',') {
            parts.push_back(trim(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    parts.push_back(trim(current));
    return parts;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigInvalidError("line " + std::to_string(line_no) + ": unclosed section");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section != "pe" && section != "fcnet" && section != "trainer" &&
                section != "probe" && section != "paths") {
                throw ConfigInvalidError("unknown config section: [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigInvalidError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) {
            throw ConfigInvalidError("line " + std::to_string(line_no) + ": key outside section");
        }

        if (section == "pe") {
            if (key == "r_min") config.pe.r_min = parse_number(section, key, value);
            else if (key == "r_max") config.pe.r_max = parse_number(section, key, value);
            else if (key == "scales") config.pe.scales = parse_count(section, key, value);
            else throw ConfigInvalidError("unknown key: [pe] " + key);
        } else if (section == "fcnet") {
            if (key == "hidden") config.fcnet.hidden = parse_count(section, key, value);
            else if (key == "residual_blocks")
                config.fcnet.residual_blocks = parse_count(section, key, value);
            else if (key == "dim") config.fcnet.dim = parse_count(section, key, value);
            else throw ConfigInvalidError("unknown key: [fcnet] " + key);
        } else if (section == "trainer") {
            if (key == "batch_size") config.trainer.batch_size = parse_count(section, key, value);
            else if (key == "epochs") config.trainer.epochs = parse_count(section, key, value);
            else if (key == "lr") config.trainer.lr = parse_number(section, key, value);
            else if (key == "tau") config.trainer.tau = parse_number(section, key, value);
            else if (key == "tau_learnable")
                config.trainer.tau_learnable = parse_bool(section, key, value);
            else if (key == "normalize")
                config.trainer.normalize_embeddings = parse_bool(section, key, value);
            else if (key == "dedup")
                config.trainer.dedup_within_batch = parse_bool(section, key, value);
            else if (key == "log_every") config.trainer.log_every = parse_count(section, key, value);
            else if (key == "seed")
                config.trainer.seed = static_cast<std::uint64_t>(parse_count(section, key, value));
            else if (key == "model_seed")
                config.model_seed = static_cast<std::uint64_t>(parse_count(section, key, value));
            else if (key == "data_seed")
                config.data_seed = static_cast<std::uint64_t>(parse_count(section, key, value));
            else throw ConfigInvalidError("unknown key: [trainer] " + key);
        } else if (section == "probe") {
            if (key == "head") {
                if (value == "linear") config.probe.head = HeadKind::Linear;
                else if (value == "mlp") config.probe.head = HeadKind::MlpOneHidden;
                else throw ConfigInvalidError("[probe] head: expected linear or mlp");
            } else if (key == "hidden") {
                config.probe.hidden = parse_count(section, key, value);
            } else if (key == "lr") {
                config.probe.lr = parse_number(section, key, value);
            } else if (key == "max_epochs") {
                config.probe.max_epochs = parse_count(section, key, value);
            } else if (key == "patience") {
                config.probe.patience = parse_count(section, key, value);
            } else if (key == "batch_size") {
                config.probe.batch_size = parse_count(section, key, value);
            } else if (key == "seeds") {
                config.probe.seeds.clear();
                for (const auto& part : split_list(value)) {
                    config.probe.seeds.push_back(
                        static_cast<std::uint64_t>(parse_count(section, key, part)));
                }
                if (config.probe.seeds.empty()) {
                    throw ConfigInvalidError("[probe] seeds: empty list");
                }
            } else if (key == "ratio") {
                const auto parts = split_list(value);
                if (parts.size() != 3) {
                    throw ConfigInvalidError("[probe] ratio: expected train,val,test");
                }
                config.ratio.train = parse_number(section, key, parts[0]);
                config.ratio.val = parse_number(section, key, parts[1]);
                config.ratio.test = parse_number(section, key, parts[2]);
            } else {
                throw ConfigInvalidError("unknown key: [probe] " + key);
            }
        } else if (section == "paths") {
            if (key == "poi") config.paths.poi = value;
            else if (key == "embeddings") config.paths.embeddings = value;
            else if (key == "checkpoint") config.paths.checkpoint = value;
            else if (key == "dataset") config.paths.dataset = value;
            else if (key == "report") config.paths.report = value;
            else if (key == "log") config.paths.log = value;
            else throw ConfigInvalidError("unknown key: [paths] " + key);
        }
    }
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalidError("cannot open config file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

std::string canonical_config_text(const RunConfig& config) {
    std::ostringstream out;
    out << "[pe]\n";
    out << "r_min = " << format_double(config.pe.r_min) << '\n';
    out << "r_max = " << format_double(config.pe.r_max) << '\n';
    out << "scales = " << config.pe.scales << '\n';
    out << "\n[fcnet]\n";
    out << "hidden = " << config.fcnet.hidden << '\n';
    out << "residual_blocks = " << config.fcnet.residual_blocks << '\n';
    out << "dim = " << config.fcnet.dim << '\n';
    out << "\n[trainer]\n";
    out << "batch_size = " << config.trainer.batch_size << '\n';
    out << "epochs = " << config.trainer.epochs << '\n';
    out << "lr = " << format_double(config.trainer.lr) << '\n';
    out << "tau = " << format_double(config.trainer.tau) << '\n';
    out << "tau_learnable = " << (config.trainer.tau_learnable ? "true" : "false") << '\n';
    out << "normalize = " << (config.trainer.normalize_embeddings ? "true" : "false") << '\n';
    out << "dedup = " << (config.trainer.dedup_within_batch ? "true" : "false") << '\n';
    out << "log_every = " << config.trainer.log_every << '\n';
    out << "seed = " << config.trainer.seed << '\n';
    out << "model_seed = " << config.model_seed << '\n';
    out << "data_seed = " << config.data_seed << '\n';
    out << "\n[probe]\n";
    out << "head = " << (config.probe.head == HeadKind::Linear ? "linear" : "mlp") << '\n';
    out << "hidden = " << config.probe.hidden << '\n';
    out << "lr = " << format_double(config.probe.lr) << '\n';
    out << "max_epochs = " << config.probe.max_epochs << '\n';
    out << "patience = " << config.probe.patience << '\n';
    out << "batch_size = " << config.probe.batch_size << '\n';
    out << "seeds = ";
    for (std::size_t i = 0; i < config.probe.seeds.size(); ++i) {
        if (i) out << ',';
        out << config.probe.seeds[i];
    }
    out << '\n';
    out << "ratio = " << format_double(config.ratio.train) << ',' << format_double(config.ratio.val)
        << ',' << format_double(config.ratio.test) << '\n';
    out << "\n[paths]\n";
    out << "poi = " << config.paths.poi << '\n';
    out << "embeddings = " << config.paths.embeddings << '\n';
    out << "checkpoint = " << config.paths.checkpoint << '\n';
    out << "dataset = " << config.paths.dataset << '\n';
    out << "report = " << config.paths.report << '\n';
    out << "log = " << config.paths.log << '\n';
    return out.str();
}

}  // namespace calliper
