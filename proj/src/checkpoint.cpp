#include "rationmem/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rationmem {

using nlohmann::json;

namespace {

constexpr char kMagic[] = "RATIONMEM CHECKPOINT v1";

void write_f64_le(std::ostream& out, double x) {
    const auto bits = std::bit_cast<std::uint64_t>(x);
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

double read_f64_le(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

json config_to_json(const TrainingConfig& c) {
    return json{{"embedding_dim", c.embedding_dim},
                {"gamma", c.gamma},
                {"lambda", c.lambda},
                {"learning_rate", c.learning_rate},
                {"optimizer", std::string(optimizer_id(c.optimizer))},
                {"adam_beta1", c.adam_beta1},
                {"adam_beta2", c.adam_beta2},
                {"adam_epsilon", c.adam_epsilon},
                {"epochs", c.epochs},
                {"batch_size", c.batch_size},
                {"seed", c.seed},
                {"min_token_count", c.min_token_count},
                {"early_stop_patience", c.early_stop_patience},
                {"train_memory_embeddings", c.train_memory_embeddings}};
}

TrainingConfig config_from_json(const json& j) {
    TrainingConfig c;
    c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
    c.gamma = j.at("gamma").get<double>();
    c.lambda = j.at("lambda").get<double>();
    c.learning_rate = j.at("learning_rate").get<double>();
    const std::string opt = j.at("optimizer").get<std::string>();
    auto parsed = parse_optimizer(opt);
    if (!parsed) throw DataError("checkpoint: unknown optimizer '" + opt + "'");
    c.optimizer = *parsed;
    c.adam_beta1 = j.at("adam_beta1").get<double>();
    c.adam_beta2 = j.at("adam_beta2").get<double>();
    c.adam_epsilon = j.at("adam_epsilon").get<double>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.min_token_count = j.at("min_token_count").get<std::size_t>();
    c.early_stop_patience = j.at("early_stop_patience").get<std::size_t>();
    c.train_memory_embeddings = j.at("train_memory_embeddings").get<bool>();
    return c;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const MemoryNetModel& model,
                     const TrainingConfig& config) {
    const ParamStore& params = model.params();

    json manifest = json::array();
    for (std::size_t i = 0; i < params.slot_count(); ++i) {
        const std::string& name = params.name_at(i);
        json t;
        t["name"] = name;
        if (name == MemoryNetModel::kEmbeddingsSlot || name == MemoryNetModel::kSimilaritySlot) {
            const Mat64& m = params.mat(name);
            t["kind"] = "mat";
            t["rows"] = m.rows;
            t["cols"] = m.cols;
        } else {
            const Vec64& v = params.vec(name);
            t["kind"] = "vec";
            t["rows"] = 1;
            t["cols"] = v.dim();
        }
        manifest.push_back(std::move(t));
    }

    json header;
    header["format_version"] = 1;
    header["category"] = std::string(category_id(model.category()));
    header["config"] = config_to_json(config);
    header["vocabulary"] = model.vocab().tokens();
    header["tensors"] = std::move(manifest);
    const std::string header_text = header.dump(2) + "\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write checkpoint file: " + path.string());
    }
    out << kMagic << "\n" << header_text.size() << "\n" << header_text;
    for (std::size_t i = 0; i < params.slot_count(); ++i) {
        const double* data = params.data_at(i);
        for (std::size_t k = 0; k < params.size_at(i); ++k) write_f64_le(out, data[k]);
    }
    if (!out) {
        throw DataError("failed writing checkpoint file: " + path.string());
    }
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open checkpoint file: " + path.string());
    }
    std::string magic;
    std::getline(in, magic);
    if (magic != kMagic) {
        throw DataError("not a checkpoint file (bad magic line): " + path.string());
    }
    std::string len_line;
    std::getline(in, len_line);
    std::size_t header_len = 0;
    try {
        header_len = static_cast<std::size_t>(std::stoull(len_line));
    } catch (const std::exception&) {
        throw DataError("corrupt checkpoint header length: " + path.string());
    }
    std::string header_text(header_len, '\0');
    in.read(header_text.data(), static_cast<std::streamsize>(header_len));
    if (!in) {
        throw DataError("truncated checkpoint header: " + path.string());
    }
    json header;
    try {
        header = json::parse(header_text);
    } catch (const json::exception& e) {
        throw DataError(std::string("corrupt checkpoint header JSON: ") + e.what());
    }
    if (header.at("format_version").get<int>() != 1) {
        throw DataError("unsupported checkpoint format version");
    }
    const std::string raw_cat = header.at("category").get<std::string>();
    auto category = parse_category(raw_cat);
    if (!category) throw DataError("checkpoint: unknown category '" + raw_cat + "'");
    const TrainingConfig config = config_from_json(header.at("config"));
    Vocabulary vocab(header.at("vocabulary").get<std::vector<std::string>>());

    ParamStore params;
    for (const json& t : header.at("tensors")) {
        const std::string name = t.at("name").get<std::string>();
        const std::string kind = t.at("kind").get<std::string>();
        const auto rows = t.at("rows").get<std::size_t>();
        const auto cols = t.at("cols").get<std::size_t>();
        if (kind == "mat") {
            Mat64 m(rows, cols);
            for (double& x : m.values) x = read_f64_le(in);
            params.add(name, std::move(m));
        } else if (kind == "vec") {
            if (rows != 1) throw DataError("checkpoint: vector tensor with rows != 1");
            Vec64 v(cols);
            for (double& x : v.values) x = read_f64_le(in);
            params.add(name, std::move(v));
        } else {
            throw DataError("checkpoint: unknown tensor kind '" + kind + "'");
        }
        if (!in) throw DataError("truncated checkpoint payload: " + path.string());
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw DataError("trailing bytes after checkpoint payload: " + path.string());
    }

    try {
        MemoryNetModel model(std::move(vocab), *category, std::move(params));
        return LoadedCheckpoint{std::move(model), config};
    } catch (const std::invalid_argument& e) {
        throw DataError("inconsistent checkpoint " + path.string() + ": " + e.what());
    }
}

}  // namespace rationmem
