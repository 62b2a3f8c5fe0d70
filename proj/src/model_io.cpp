#include "sarclab/model_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "sarclab/errors.hpp"

namespace sarclab {

namespace {

constexpr char kMagic[8] = {'S', 'A', 'R', 'C', 'L', 'A', 'B', 'M'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kTagSpace = 0x53504345;      // "SPCE"
constexpr std::uint32_t kTagClassifier = 0x434C5346; // "CLSF"

void put_u8(std::string& out, std::uint8_t v) {
    out.push_back(static_cast<char>(v));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_i32(std::string& out, std::int32_t v) {
    put_u32(out, static_cast<std::uint32_t>(v));
}

void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u64(out, bits);
}

void put_string(std::string& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.append(s);
}

class Reader {
public:
    Reader(const std::string& data, std::string section)
        : data_(data), section_(std::move(section)) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(byte()); }

    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(byte()) << (8 * i);
        return v;
    }

    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(byte()) << (8 * i);
        return v;
    }

    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }

    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }

    std::string str() {
        const std::uint32_t len = u32();
        need(len);
        std::string s = data_.substr(pos_, len);
        pos_ += len;
        return s;
    }

    // guards bulk reads before any large allocation
    void require_doubles(std::uint64_t count) const { need(count * 8); }
    void require_bytes(std::uint64_t count) const { need(count); }

    bool done() const { return pos_ == data_.size(); }

    void expect_done() const {
        if (!done())
            throw ParseError("model file: trailing bytes in " + section_ +
                             " section");
    }

private:
    unsigned char byte() {
        need(1);
        return static_cast<unsigned char>(data_[pos_++]);
    }

    void need(std::uint64_t count) const {
        if (pos_ + count > data_.size())
            throw ParseError("model file: " + section_ + " section truncated");
    }

    const std::string& data_;
    std::string section_;
    std::size_t pos_ = 0;
};

std::string encode_space(const SemanticSpace& space) {
    std::string out;
    put_u8(out, space.variant == Variant::traditional ? 0 : 1);
    put_u8(out, 1);   // tokenizer flags: bit0 = lowercase folding
    put_u32(out, static_cast<std::uint32_t>(space.rank));
    const auto m = static_cast<std::uint64_t>(space.vocabulary.size());
    put_u64(out, m);
    for (const auto& tok : space.vocabulary.tokens()) put_string(out, tok);
    for (Eigen::Index i = 0; i < space.U_r.rows(); ++i)
        for (Eigen::Index j = 0; j < space.U_r.cols(); ++j)
            put_f64(out, space.U_r(i, j));
    for (Eigen::Index j = 0; j < space.sigma_r.size(); ++j)
        put_f64(out, space.sigma_r(j));
    if (space.variant == Variant::traditional) {
        for (double v : space.idf) put_f64(out, v);
    } else {
        put_f64(out, space.grand_total);
    }
    return out;
}

SemanticSpace decode_space(const std::string& payload) {
    Reader in(payload, "space");
    SemanticSpace space;
    const std::uint8_t variant = in.u8();
    if (variant > 1) throw ParseError("model file: space section has unknown variant");
    space.variant = variant == 0 ? Variant::traditional : Variant::statistical;
    const std::uint8_t flags = in.u8();
    if (flags != 1)
        throw ParseError("model file: space section has unknown tokenizer flags");
    space.rank = static_cast<int>(in.u32());
    const std::uint64_t m = in.u64();
    for (std::uint64_t i = 0; i < m; ++i) space.vocabulary.add(in.str());
    if (space.vocabulary.size() != m)
        throw ParseError("model file: space section has duplicate vocabulary tokens");
    in.require_doubles(m * static_cast<std::uint64_t>(space.rank) +
                       static_cast<std::uint64_t>(space.rank));
    space.U_r.resize(static_cast<Eigen::Index>(m), space.rank);
    for (Eigen::Index i = 0; i < space.U_r.rows(); ++i)
        for (Eigen::Index j = 0; j < space.U_r.cols(); ++j)
            space.U_r(i, j) = in.f64();
    space.sigma_r.resize(space.rank);
    for (int j = 0; j < space.rank; ++j) space.sigma_r(j) = in.f64();
    if (space.variant == Variant::traditional) {
        space.idf.resize(m);
        for (auto& v : space.idf) v = in.f64();
    } else {
        space.grand_total = in.f64();
    }
    in.expect_done();
    return space;
}

std::string encode_classifier(const ClassifierModel& model, bool uses_star) {
    std::string out;
    put_u8(out, uses_star ? 1 : 0);
    if (const auto* lr = std::get_if<LogisticModel>(&model)) {
        put_u8(out, 0);
        put_u8(out, lr->penalty == Penalty::l1 ? 0 : 1);
        put_f64(out, lr->C);
        put_u32(out, static_cast<std::uint32_t>(lr->beta.size()));
        for (Eigen::Index j = 0; j < lr->beta.size(); ++j)
            put_f64(out, lr->beta(j));
    } else if (const auto* svm = std::get_if<SvmModel>(&model)) {
        put_u8(out, 1);
        put_f64(out, svm->C);
        put_f64(out, svm->gamma);
        put_f64(out, svm->bias);
        put_u32(out, static_cast<std::uint32_t>(svm->support_vectors.cols()));
        put_u64(out, static_cast<std::uint64_t>(svm->support_vectors.rows()));
        for (Eigen::Index k = 0; k < svm->dual_coefs.size(); ++k)
            put_f64(out, svm->dual_coefs(k));
        for (Eigen::Index i = 0; i < svm->support_vectors.rows(); ++i)
            for (Eigen::Index j = 0; j < svm->support_vectors.cols(); ++j)
                put_f64(out, svm->support_vectors(i, j));
    } else {
        const auto& ens = std::get<TreeEnsembleModel>(model);
        put_u8(out, ens.kind == EnsembleKind::random_forest ? 2 : 3);
        put_u32(out, static_cast<std::uint32_t>(ens.trees.size()));
        put_f64(out, ens.learning_rate);
        put_f64(out, ens.base_score);
        for (const auto& tree : ens.trees) {
            put_u32(out, static_cast<std::uint32_t>(tree.nodes.size()));
            for (const auto& node : tree.nodes) {
                put_i32(out, node.feature);
                put_f64(out, node.threshold);
                put_i32(out, node.left);
                put_i32(out, node.right);
                put_f64(out, node.value);
            }
        }
    }
    return out;
}

std::pair<ClassifierModel, bool> decode_classifier(const std::string& payload) {
    Reader in(payload, "classifier");
    const bool uses_star = in.u8() != 0;
    const std::uint8_t kind = in.u8();
    if (kind == 0) {
        LogisticModel lr;
        lr.penalty = in.u8() == 0 ? Penalty::l1 : Penalty::l2;
        lr.C = in.f64();
        const std::uint32_t len = in.u32();
        lr.beta.resize(len);
        for (std::uint32_t j = 0; j < len; ++j) lr.beta(j) = in.f64();
        in.expect_done();
        return {std::move(lr), uses_star};
    }
    if (kind == 1) {
        SvmModel svm;
        svm.C = in.f64();
        svm.gamma = in.f64();
        svm.bias = in.f64();
        const std::uint32_t dim = in.u32();
        const std::uint64_t n_sv = in.u64();
        in.require_doubles(n_sv * (dim + 1));
        svm.dual_coefs.resize(static_cast<Eigen::Index>(n_sv));
        for (std::uint64_t k = 0; k < n_sv; ++k)
            svm.dual_coefs(static_cast<Eigen::Index>(k)) = in.f64();
        svm.support_vectors.resize(static_cast<Eigen::Index>(n_sv), dim);
        for (Eigen::Index i = 0; i < svm.support_vectors.rows(); ++i)
            for (Eigen::Index j = 0; j < svm.support_vectors.cols(); ++j)
                svm.support_vectors(i, j) = in.f64();
        in.expect_done();
        return {std::move(svm), uses_star};
    }
    if (kind == 2 || kind == 3) {
        TreeEnsembleModel ens;
        ens.kind = kind == 2 ? EnsembleKind::random_forest
                             : EnsembleKind::gradient_boosting;
        const std::uint32_t n_trees = in.u32();
        ens.learning_rate = in.f64();
        ens.base_score = in.f64();
        ens.trees.resize(n_trees);
        for (auto& tree : ens.trees) {
            const std::uint32_t n_nodes = in.u32();
            in.require_bytes(static_cast<std::uint64_t>(n_nodes) * 28);
            tree.nodes.resize(n_nodes);
            for (auto& node : tree.nodes) {
                node.feature = in.i32();
                node.threshold = in.f64();
                node.left = in.i32();
                node.right = in.i32();
                node.value = in.f64();
            }
        }
        in.expect_done();
        return {std::move(ens), uses_star};
    }
    throw ParseError("model file: classifier section has unknown kind");
}

void append_section(std::string& out, std::uint32_t tag,
                    const std::string& payload) {
    put_u32(out, tag);
    put_u64(out, payload.size());
    out.append(payload);
}

}  // namespace

void save_model(const std::filesystem::path& path, const ModelFile& model) {
    std::string out(kMagic, sizeof kMagic);
    put_u32(out, kVersion);
    append_section(out, kTagSpace, encode_space(model.space));
    if (model.classifier)
        append_section(out, kTagClassifier,
                       encode_classifier(*model.classifier,
                                         model.classifier_uses_star));

    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
        if (!file) throw IoError("cannot write model file: " + path.string());
        file.write(out.data(), static_cast<std::streamsize>(out.size()));
        if (!file) {
            std::filesystem::remove(tmp);
            throw IoError("write failure on model file: " + path.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

ModelFile load_model(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open model file: " + path.string());
    std::string data((std::istreambuf_iterator<char>(file)),
                     std::istreambuf_iterator<char>());

    if (data.size() < sizeof kMagic + 4 ||
        std::memcmp(data.data(), kMagic, sizeof kMagic) != 0)
        throw ParseError("model file: bad magic (not a sarclab model)");
    std::size_t pos = sizeof kMagic;
    auto read_u32 = [&](const char* what) {
        if (pos + 4 > data.size())
            throw ParseError(std::string("model file: ") + what + " truncated");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(
                     static_cast<unsigned char>(data[pos + static_cast<std::size_t>(i)]))
                 << (8 * i);
        pos += 4;
        return v;
    };
    auto read_u64 = [&](const char* what) {
        if (pos + 8 > data.size())
            throw ParseError(std::string("model file: ") + what + " truncated");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(
                     static_cast<unsigned char>(data[pos + static_cast<std::size_t>(i)]))
                 << (8 * i);
        pos += 8;
        return v;
    };

    const std::uint32_t version = read_u32("version");
    if (version != kVersion)
        throw ParseError("model file: unsupported version " +
                         std::to_string(version) + " (expected " +
                         std::to_string(kVersion) + ")");

    ModelFile model;
    bool have_space = false;
    while (pos < data.size()) {
        const std::uint32_t tag = read_u32("section header");
        const std::uint64_t len = read_u64("section header");
        const std::string section = tag == kTagSpace        ? "space"
                                    : tag == kTagClassifier ? "classifier"
                                                            : "unknown";
        if (pos + len > data.size())
            throw ParseError("model file: " + section +
                             " section payload truncated");
        const std::string payload = data.substr(pos, len);
        pos += len;
        if (tag == kTagSpace) {
            model.space = decode_space(payload);
            have_space = true;
        } else if (tag == kTagClassifier) {
            auto [clf, star] = decode_classifier(payload);
            model.classifier = std::move(clf);
            model.classifier_uses_star = star;
        } else {
            throw ParseError("model file: unknown section tag");
        }
    }
    if (!have_space)
        throw ParseError("model file: missing space section");
    return model;
}

}  // namespace sarclab
