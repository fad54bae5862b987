#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "narrm/csv.hpp"
#include "narrm/narnn.hpp"

namespace narrm {

namespace {

constexpr std::array<char, 8> kMagic = {'N', 'A', 'R', 'N', 'N', 'M', 'D', 'L'};
constexpr std::uint32_t kVersion = 1;
constexpr std::string_view kTextMagic = "narnn-model-text";

std::uint32_t activation_code(Activation a) {
    switch (a) {
    case Activation::logsig:
        return 0;
    case Activation::tansig:
        return 1;
    case Activation::linear:
        return 2;
    }
    return 0;
}

Activation activation_from_code(std::uint32_t c) {
    switch (c) {
    case 0:
        return Activation::logsig;
    case 1:
        return Activation::tansig;
    case 2:
        return Activation::linear;
    default:
        throw std::runtime_error("model: unknown activation code " + std::to_string(c));
    }
}

// Little-endian fixed-width encoding, independent of host byte order.
void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<char>((v >> (8 * i)) & 0xffU);
    }
    out.write(b, 8);
}

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) {
        b[i] = static_cast<char>((v >> (8 * i)) & 0xffU);
    }
    out.write(b, 4);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) {
        throw std::runtime_error("model: truncated binary file");
    }
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | b[i];
    }
    return v;
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw std::runtime_error("model: truncated binary file");
    }
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
        v = (v << 8) | b[i];
    }
    return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

void check_dims(std::uint64_t n_delays, std::uint64_t n_hidden) {
    // guards against absurd allocations from a corrupt header
    if (n_delays == 0 || n_hidden == 0 || n_delays > 100000 || n_hidden > 100000) {
        throw std::runtime_error("model: implausible dimensions in header");
    }
}

}  // namespace

void save_binary(const NarnnModel& model, std::ostream& out) {
    model.validate();
    out.write(kMagic.data(), kMagic.size());
    put_u32(out, kVersion);
    put_u32(out, activation_code(model.topology.hidden_activation));
    put_u64(out, model.topology.n_delays);
    put_u64(out, model.topology.n_hidden);
    const Eigen::VectorXd theta = model.parameters();
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        put_f64(out, theta(i));
    }
    for (Eigen::Index i = 0; i < model.normalizer.input_min.size(); ++i) {
        put_f64(out, model.normalizer.input_min(i));
    }
    for (Eigen::Index i = 0; i < model.normalizer.input_max.size(); ++i) {
        put_f64(out, model.normalizer.input_max(i));
    }
    put_f64(out, model.normalizer.target_min);
    put_f64(out, model.normalizer.target_max);
}

NarnnModel load_binary(std::istream& in) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
        throw std::runtime_error("model: not a binary NARNN model file");
    }
    const std::uint32_t version = get_u32(in);
    if (version != kVersion) {
        throw std::runtime_error("model: unsupported format version " + std::to_string(version));
    }
    NarnnModel m;
    m.topology.hidden_activation = activation_from_code(get_u32(in));
    const std::uint64_t n_delays = get_u64(in);
    const std::uint64_t n_hidden = get_u64(in);
    check_dims(n_delays, n_hidden);
    m.topology.n_delays = n_delays;
    m.topology.n_hidden = n_hidden;

    Eigen::VectorXd theta(static_cast<Eigen::Index>(m.topology.parameter_count()));
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        theta(i) = get_f64(in);
    }
    m.set_parameters(theta);
    const auto n = static_cast<Eigen::Index>(n_delays);
    m.normalizer.input_min.resize(n);
    m.normalizer.input_max.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m.normalizer.input_min(i) = get_f64(in);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        m.normalizer.input_max(i) = get_f64(in);
    }
    m.normalizer.target_min = get_f64(in);
    m.normalizer.target_max = get_f64(in);
    m.validate();
    return m;
}

namespace {

void put_line(std::ostream& out, std::string_view key, const Eigen::VectorXd& values) {
    out << key;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        out << ' ' << csv::format(values(i));
    }
    out << '\n';
}

Eigen::VectorXd read_values(std::istream& in, std::string_view key, std::size_t count) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("model: missing '" + std::string(key) + "' line");
    }
    std::istringstream ss(line);
    std::string found;
    ss >> found;
    if (found != key) {
        throw std::runtime_error("model: expected '" + std::string(key) + "', found '" + found + "'");
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
        std::string tok;
        if (!(ss >> tok)) {
            throw std::runtime_error("model: '" + std::string(key) + "' has too few values");
        }
        v(static_cast<Eigen::Index>(i)) = std::stod(tok);
    }
    std::string extra;
    if (ss >> extra) {
        throw std::runtime_error("model: '" + std::string(key) + "' has too many values");
    }
    return v;
}

std::string read_word(std::istream& in, std::string_view key) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("model: missing '" + std::string(key) + "' line");
    }
    std::istringstream ss(line);
    std::string found;
    std::string value;
    ss >> found >> value;
    if (found != key || value.empty()) {
        throw std::runtime_error("model: expected '" + std::string(key) + " <value>'");
    }
    return value;
}

}  // namespace

void save_text(const NarnnModel& model, std::ostream& out) {
    model.validate();
    out << kTextMagic << ' ' << kVersion << '\n';
    out << "n_delays " << model.topology.n_delays << '\n';
    out << "n_hidden " << model.topology.n_hidden << '\n';
    out << "hidden_activation " << to_string(model.topology.hidden_activation) << '\n';
    Eigen::VectorXd w1(model.w1.size());
    for (Eigen::Index i = 0, k = 0; i < model.w1.rows(); ++i) {
        for (Eigen::Index j = 0; j < model.w1.cols(); ++j) {
            w1(k++) = model.w1(i, j);
        }
    }
    put_line(out, "w1", w1);
    put_line(out, "b1", model.b1);
    put_line(out, "w2", model.w2);
    put_line(out, "b2", Eigen::VectorXd::Constant(1, model.b2));
    put_line(out, "input_min", model.normalizer.input_min);
    put_line(out, "input_max", model.normalizer.input_max);
    put_line(out, "target_min", Eigen::VectorXd::Constant(1, model.normalizer.target_min));
    put_line(out, "target_max", Eigen::VectorXd::Constant(1, model.normalizer.target_max));
}

NarnnModel load_text(std::istream& in) {
    const std::string version = read_word(in, kTextMagic);
    if (version != std::to_string(kVersion)) {
        throw std::runtime_error("model: unsupported text format version " + version);
    }
    NarnnModel m;
    const auto n_delays = std::stoull(read_word(in, "n_delays"));
    const auto n_hidden = std::stoull(read_word(in, "n_hidden"));
    check_dims(n_delays, n_hidden);
    m.topology.n_delays = n_delays;
    m.topology.n_hidden = n_hidden;
    m.topology.hidden_activation = parse_activation(read_word(in, "hidden_activation"));

    const Eigen::VectorXd w1 = read_values(in, "w1", n_delays * n_hidden);
    const Eigen::VectorXd b1 = read_values(in, "b1", n_hidden);
    const Eigen::VectorXd w2 = read_values(in, "w2", n_hidden);
    const double b2 = read_values(in, "b2", 1)(0);
    Eigen::VectorXd theta(static_cast<Eigen::Index>(m.topology.parameter_count()));
    theta << w1, b1, w2, b2;
    m.set_parameters(theta);
    m.normalizer.input_min = read_values(in, "input_min", n_delays);
    m.normalizer.input_max = read_values(in, "input_max", n_delays);
    m.normalizer.target_min = read_values(in, "target_min", 1)(0);
    m.normalizer.target_max = read_values(in, "target_max", 1)(0);
    m.validate();
    return m;
}

void save_model(const NarnnModel& model, const std::string& path) {
    const bool text = path.size() >= 4 && path.compare(path.size() - 4, 4, ".txt") == 0;
    std::ofstream out(path, text ? std::ios::out : std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    if (text) {
        save_text(model, out);
    } else {
        save_binary(model, out);
    }
    if (!out) {
        throw std::runtime_error("failed writing '" + path + "'");
    }
}

NarnnModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open model file '" + path + "'");
    }
    std::array<char, 8> head{};
    in.read(head.data(), head.size());
    in.clear();
    in.seekg(0);
    if (head == kMagic) {
        return load_binary(in);
    }
    return load_text(in);
}

}  // namespace narrm
