#include "slwla/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "slwla/error.hpp"
#include "slwla/hash.hpp"

namespace slwla {

using nlohmann::json;

namespace {

constexpr char magic[8] = {'S', 'L', 'W', 'L', 'A', 'C', 'K', 'P'};

template <typename T>
void put(std::string& buf, T value) {
    buf.append(reinterpret_cast<const char*>(&value), sizeof(T));
}

class Reader {
public:
    Reader(const std::string& data, std::string source) : data_(data), source_(std::move(source)) {}

    template <typename T>
    T get() {
        T value{};
        need(sizeof(T));
        std::memcpy(&value, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::string bytes(std::size_t n) {
        need(n);
        auto out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    void read_doubles(double* out, std::size_t n) {
        need(n * sizeof(double));
        std::memcpy(out, data_.data() + pos_, n * sizeof(double));
        pos_ += n * sizeof(double);
    }

    std::size_t position() const { return pos_; }

private:
    void need(std::size_t n) const {
        if (pos_ + n > data_.size()) throw CompatibilityError("checkpoint '" + source_ + "' is truncated");
    }
    const std::string& data_;
    std::string source_;
    std::size_t pos_ = 0;
};

void put_matrix(std::string& buf, const std::string& name, const double* data, std::uint64_t rows, std::uint64_t cols) {
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(name.size()));
    buf += name;
    put<std::uint64_t>(buf, rows);
    put<std::uint64_t>(buf, cols);
    buf.append(reinterpret_cast<const char*>(data), static_cast<std::size_t>(rows * cols * sizeof(double)));
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    json meta;
    meta["config"] = ckpt.config;
    meta["encoder"] = ckpt.encoder_id;
    meta["variant"] = to_string(ckpt.variant);
    meta["m"] = ckpt.m;
    meta["labels"] = ckpt.label_texts;
    meta["best_epoch"] = ckpt.best_epoch;
    meta["best_val_auc"] = ckpt.best_val_auc;
    meta["rng_state"] = ckpt.rng_state;
    meta["e_m"] = ckpt.params.repeat();
    meta["d"] = ckpt.params.dim();
    json log = json::array();
    for (const auto& e : ckpt.log)
        log.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_auc", e.val_auc},
                       {"val_macro_f1", e.val_macro_f1}, {"val_skipped", e.val_skipped}});
    meta["log"] = log;
    const auto meta_text = meta.dump();

    std::string buf(magic, sizeof magic);
    put<std::uint32_t>(buf, Checkpoint::format_version);
    put<std::uint64_t>(buf, meta_text.size());
    buf += meta_text;
    const auto& p = ckpt.params;
    put<std::uint32_t>(buf, 6);
    put_matrix(buf, "W", p.W.data(), static_cast<std::uint64_t>(p.W.rows()), static_cast<std::uint64_t>(p.W.cols()));
    put_matrix(buf, "b", p.b.data(), static_cast<std::uint64_t>(p.b.size()), 1);
    put_matrix(buf, "W_g", p.W_g.data(), 2, 1);
    put_matrix(buf, "b_g", &p.b_g, 1, 1);
    put_matrix(buf, "W_s", p.W_s.data(), static_cast<std::uint64_t>(p.W_s.rows()), static_cast<std::uint64_t>(p.W_s.cols()));
    put_matrix(buf, "b_s", p.b_s.data(), static_cast<std::uint64_t>(p.b_s.size()), 1);
    put<std::uint64_t>(buf, fnv1a64(buf));

    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw EnvironmentError("cannot write checkpoint '" + path.string() + "'");
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CompatibilityError("cannot read checkpoint '" + path.string() + "'");
    const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto source = path.string();
    if (data.size() < sizeof magic + 8 || data.compare(0, sizeof magic, magic, sizeof magic) != 0)
        throw CompatibilityError("'" + source + "' is not a checkpoint");
    std::uint64_t stored = 0;
    std::memcpy(&stored, data.data() + data.size() - 8, 8);
    if (stored != fnv1a64(std::string_view(data).substr(0, data.size() - 8)))
        throw CompatibilityError("checkpoint '" + source + "' failed its checksum");

    Reader r(data, source);
    r.bytes(sizeof magic);
    if (auto v = r.get<std::uint32_t>(); v != Checkpoint::format_version)
        throw CompatibilityError("checkpoint format version " + std::to_string(v) + " is not supported (expected " +
                                 std::to_string(Checkpoint::format_version) + ")");
    Checkpoint ckpt;
    try {
        const auto meta = json::parse(r.bytes(r.get<std::uint64_t>()));
        ckpt.config = meta.at("config").get<std::map<std::string, std::string>>();
        ckpt.encoder_id = meta.at("encoder").get<std::string>();
        ckpt.variant = parse_variant(meta.at("variant").get<std::string>());
        ckpt.m = meta.at("m").get<std::size_t>();
        ckpt.label_texts = meta.at("labels").get<std::map<std::string, std::string>>();
        ckpt.best_epoch = meta.at("best_epoch").get<std::size_t>();
        ckpt.best_val_auc = meta.at("best_val_auc").get<double>();
        ckpt.rng_state = meta.at("rng_state").get<std::string>();
        for (const auto& e : meta.at("log"))
            ckpt.log.push_back({e.at("epoch").get<std::size_t>(), e.at("train_loss").get<double>(),
                                e.at("val_auc").get<double>(), e.at("val_macro_f1").get<double>(),
                                e.at("val_skipped").get<std::size_t>()});
        const auto d = meta.at("d").get<std::size_t>();
        const auto e_m = meta.at("e_m").get<std::size_t>();
        ckpt.params = d > 0 && e_m > 0 ? ModelParams::zeros(d, e_m) : ModelParams{};
    } catch (const json::exception& e) {
        throw CompatibilityError("checkpoint '" + source + "' has unreadable metadata: " + e.what());
    } catch (const ConfigError& e) {
        throw CompatibilityError("checkpoint '" + source + "': " + e.what());
    }

    auto views = ckpt.params.tensors();
    if (r.get<std::uint32_t>() != views.size()) throw CompatibilityError("checkpoint tensor count mismatch");
    for (auto& view : views) {
        const auto name = r.bytes(r.get<std::uint32_t>());
        const auto rows = r.get<std::uint64_t>();
        const auto cols = r.get<std::uint64_t>();
        if (name != view.name || rows * cols != view.size)
            throw CompatibilityError("checkpoint tensor '" + name + "' does not match the expected layout");
        r.read_doubles(view.data, view.size);
    }
    if (r.position() + 8 != data.size()) throw CompatibilityError("checkpoint '" + source + "' has trailing bytes");
    return ckpt;
}

}  // namespace slwla
