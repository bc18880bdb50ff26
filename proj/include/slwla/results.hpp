#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "slwla/attention.hpp"
#include "slwla/training.hpp"

namespace slwla {

struct ResultRecord {
    std::size_t way = 0;
    std::size_t shot = 0;
    Variant ablation = Variant::slwla;
    std::size_t m = 0;
    double auc = 0.0;
    double macro_f1 = 0.0;  // percent
    std::size_t episodes = 0;
    std::size_t skipped = 0;
    std::uint64_t test_seed = 0;
    std::string checkpoint;

    std::string scenario() const;  // "5-way 5-shot"
};

/// One JSON object per line, appended with a single write so readers never see half a record.
void append_result(const std::filesystem::path& store, const ResultRecord& record);
std::vector<ResultRecord> load_results(const std::filesystem::path& store);

using Scenario = std::pair<std::size_t, std::size_t>;  // (N, K)

struct RowKey {
    Variant ablation = Variant::slwla;
    std::size_t m = 0;  // always 0 for variants that ignore labels

    auto operator<=>(const RowKey&) const = default;
};

std::string row_label(const RowKey& key);

struct ResultCell {
    double auc = 0.0;
    double macro_f1 = 0.0;
};

/// Rows are (variant, m), columns are (N, K) scenarios. Later records overwrite earlier ones.
class ResultsTable {
public:
    static constexpr const char* absent = "n/a";

    explicit ResultsTable(const std::vector<ResultRecord>& records,
                          std::vector<Scenario> requested = {});

    const std::vector<RowKey>& rows() const noexcept { return rows_; }
    const std::vector<Scenario>& scenarios() const noexcept { return scenarios_; }
    std::optional<ResultCell> cell(const RowKey& row, const Scenario& scenario) const;

    void render_text(std::ostream& out) const;
    void render_csv(std::ostream& out) const;
    void render_json(std::ostream& out) const;

private:
    std::vector<RowKey> rows_;
    std::vector<Scenario> scenarios_;
    std::map<std::pair<RowKey, Scenario>, ResultCell> cells_;
};

}  // namespace slwla
