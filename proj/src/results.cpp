#include "slwla/results.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "slwla/error.hpp"

namespace slwla {

using nlohmann::json;

std::string ResultRecord::scenario() const {
    return std::to_string(way) + "-way " + std::to_string(shot) + "-shot";
}

void append_result(const std::filesystem::path& store, const ResultRecord& r) {
    json j = {{"scenario", r.scenario()}, {"n_way", r.way},         {"k_shot", r.shot},
              {"ablation", to_string(r.ablation)}, {"m", r.m},       {"auc", r.auc},
              {"macro_f1", r.macro_f1},     {"episodes", r.episodes}, {"skipped", r.skipped},
              {"test_seed", r.test_seed},   {"checkpoint", r.checkpoint}};
    if (store.has_parent_path()) std::filesystem::create_directories(store.parent_path());
    const std::string line = j.dump() + "\n";
    std::ofstream out(store, std::ios::app | std::ios::binary);
    if (!out) throw EnvironmentError("cannot open results store '" + store.string() + "'");
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    out.flush();
    if (!out) throw EnvironmentError("write to results store '" + store.string() + "' failed");
}

std::vector<ResultRecord> load_results(const std::filesystem::path& store) {
    std::ifstream in(store);
    if (!in) throw ConfigError("cannot read results store '" + store.string() + "'");
    std::vector<ResultRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = json::parse(line);
            ResultRecord r;
            r.way = j.at("n_way").get<std::size_t>();
            r.shot = j.at("k_shot").get<std::size_t>();
            r.ablation = parse_variant(j.at("ablation").get<std::string>());
            r.m = j.at("m").get<std::size_t>();
            r.auc = j.at("auc").get<double>();
            r.macro_f1 = j.at("macro_f1").get<double>();
            r.episodes = j.at("episodes").get<std::size_t>();
            r.skipped = j.value("skipped", std::size_t{0});
            r.test_seed = j.value("test_seed", std::uint64_t{0});
            r.checkpoint = j.value("checkpoint", std::string{});
            out.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw ParseError(store.string(), line_no, e.what());
        }
    }
    return out;
}

std::string row_label(const RowKey& key) {
    switch (key.ablation) {
        case Variant::proto: return "Prototypical Network";
        case Variant::slw: return "Proto-SLW";
        case Variant::slw_las: return "Proto-SLW+LAS";
        case Variant::slwla: return "Proto-SLWLA (m=" + std::to_string(key.m) + ")";
    }
    return "?";
}

ResultsTable::ResultsTable(const std::vector<ResultRecord>& records, std::vector<Scenario> requested)
    : scenarios_(std::move(requested)) {
    for (const auto& r : records) {
        RowKey key{r.ablation, r.ablation == Variant::slwla ? r.m : 0};
        const Scenario sc{r.way, r.shot};
        cells_[{key, sc}] = {r.auc, r.macro_f1};
        if (std::find(rows_.begin(), rows_.end(), key) == rows_.end()) rows_.push_back(key);
        if (std::find(scenarios_.begin(), scenarios_.end(), sc) == scenarios_.end()) scenarios_.push_back(sc);
    }
    std::sort(rows_.begin(), rows_.end());
    std::sort(scenarios_.begin(), scenarios_.end());
}

std::optional<ResultCell> ResultsTable::cell(const RowKey& row, const Scenario& scenario) const {
    auto it = cells_.find({row, scenario});
    if (it == cells_.end()) return std::nullopt;
    return it->second;
}

namespace {

std::string scenario_name(const Scenario& s) {
    return std::to_string(s.first) + "-way " + std::to_string(s.second) + "-shot";
}

std::string fixed(double v, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

}  // namespace

void ResultsTable::render_text(std::ostream& out) const {
    std::size_t first = std::string("Model").size();
    for (const auto& r : rows_) first = std::max(first, row_label(r).size());
    constexpr std::size_t col = 17;
    out << std::left << std::setw(static_cast<int>(first)) << "Model";
    for (const auto& s : scenarios_) out << " | " << std::setw(col) << scenario_name(s);
    out << '\n' << std::setw(static_cast<int>(first)) << "";
    for (std::size_t i = 0; i < scenarios_.size(); ++i) out << " | " << std::setw(col) << "AUC     F1";
    out << '\n';
    for (const auto& r : rows_) {
        out << std::setw(static_cast<int>(first)) << row_label(r);
        for (const auto& s : scenarios_) {
            auto c = cell(r, s);
            std::string text = c ? fixed(c->auc, 4) + "  " + fixed(c->macro_f1, 2) : std::string(absent);
            out << " | " << std::setw(col) << text;
        }
        out << '\n';
    }
    out << std::right;
}

void ResultsTable::render_csv(std::ostream& out) const {
    out << "model,ablation,m,n_way,k_shot,auc,macro_f1\n";
    for (const auto& r : rows_) {
        for (const auto& s : scenarios_) {
            auto c = cell(r, s);
            out << '"' << row_label(r) << "\"," << to_string(r.ablation) << ',' << r.m << ',' << s.first << ','
                << s.second << ',';
            if (c) out << fixed(c->auc, 6) << ',' << fixed(c->macro_f1, 4);
            else out << absent << ',' << absent;
            out << '\n';
        }
    }
}

void ResultsTable::render_json(std::ostream& out) const {
    json rows = json::array();
    for (const auto& r : rows_) {
        json cells = json::object();
        for (const auto& s : scenarios_) {
            auto c = cell(r, s);
            cells[scenario_name(s)] = c ? json{{"auc", c->auc}, {"macro_f1", c->macro_f1}} : json(nullptr);
        }
        rows.push_back({{"model", row_label(r)}, {"ablation", to_string(r.ablation)}, {"m", r.m}, {"cells", cells}});
    }
    out << json{{"rows", rows}}.dump(2) << '\n';
}

}  // namespace slwla
