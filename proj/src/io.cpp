#include "qkdc/io.hpp"

#include "qkdc/bounds.hpp"

#include <fstream>
#include <sstream>

namespace qkdc {

using nlohmann::json;

namespace {

Vec vector_from_json(const json& j) {
    if (j.is_object()) {
        const auto& re = j.at("re");
        Vec v = Vec::Zero(static_cast<Eigen::Index>(re.size()));
        for (size_t i = 0; i < re.size(); ++i) v(i) = re[i].get<double>();
        if (j.contains("im")) {
            const auto& im = j.at("im");
            if (im.size() != re.size()) throw std::invalid_argument("vector: re and im differ in length");
            for (size_t i = 0; i < im.size(); ++i) v(i) += cplx(0.0, im[i].get<double>());
        }
        return v;
    }
    if (!j.is_array() || j.empty()) throw std::invalid_argument("vector: expected a non-empty array or {re, im}");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
    return v;
}

double number(const json& j, const char* key) {
    if (!j.contains(key)) throw std::invalid_argument(std::string("channel spec: missing \"") + key + "\"");
    if (!j.at(key).is_number()) throw std::invalid_argument(std::string("channel spec: \"") + key + "\" must be a number");
    return j.at(key).get<double>();
}

void only_keys(const json& j, std::initializer_list<const char*> keys) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : keys) ok = ok || it.key() == k;
        if (!ok) throw std::invalid_argument("channel spec: unexpected key \"" + it.key() + "\"");
    }
}

} // namespace

Mat matrix_from_json(const json& j, Dims* dims) {
    try {
        const auto& re = j.at("re");
        const auto rows = static_cast<Eigen::Index>(re.size());
        if (rows == 0) throw std::invalid_argument("matrix: empty");
        Mat m = Mat::Zero(rows, rows);
        for (Eigen::Index r = 0; r < rows; ++r) {
            if (static_cast<Eigen::Index>(re[r].size()) != rows) throw std::invalid_argument("matrix: must be square");
            for (Eigen::Index c = 0; c < rows; ++c) m(r, c) = re[r][c].get<double>();
        }
        if (j.contains("im")) {
            const auto& im = j.at("im");
            if (static_cast<Eigen::Index>(im.size()) != rows) throw std::invalid_argument("matrix: re and im shapes differ");
            for (Eigen::Index r = 0; r < rows; ++r) {
                if (static_cast<Eigen::Index>(im[r].size()) != rows) throw std::invalid_argument("matrix: re and im shapes differ");
                for (Eigen::Index c = 0; c < rows; ++c) m(r, c) += cplx(0.0, im[r][c].get<double>());
            }
        }
        Dims d = j.contains("dims") ? j.at("dims").get<Dims>() : Dims{static_cast<int>(rows)};
        if (dims_product(d) != rows) throw std::invalid_argument("matrix: dims do not multiply to the matrix size");
        if (dims) *dims = d;
        return m;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("matrix: malformed JSON (") + e.what() + ")");
    }
}

json matrix_to_json(const Mat& m, const Dims& dims, int digits) {
    json re = json::array(), im = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json rr = json::array(), ii = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            rr.push_back(round_sig(m(r, c).real(), digits));
            ii.push_back(round_sig(m(r, c).imag(), digits));
        }
        re.push_back(rr);
        im.push_back(ii);
    }
    return json{{"dims", dims}, {"re", re}, {"im", im}};
}

json load_json(const std::string& text_or_path) {
    std::string text = text_or_path;
    auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || (text[first] != '{' && text[first] != '[')) {
        std::ifstream in(text_or_path);
        if (!in) throw std::invalid_argument("cannot open " + text_or_path);
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("invalid JSON: ") + e.what());
    }
}

DensityOperator read_state(const std::string& path) {
    Dims dims;
    Mat m = matrix_from_json(load_json(path), &dims);
    return DensityOperator(m, dims);
}

void write_state(const std::string& path, const DensityOperator& rho) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write " + path);
    out << matrix_to_json(rho.matrix(), rho.dims()).dump() << "\n";
}

ChannelFamily channel_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw std::invalid_argument("channel spec: expected an object with a string \"kind\"");
    ChannelFamily f;
    f.kind = channel_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("d")) f.d = j.at("d").get<int>();
    switch (f.kind) {
    case ChannelKind::identity: only_keys(j, {"kind", "d"}); break;
    case ChannelKind::dephasing:
        only_keys(j, {"kind", "d", "gamma"});
        f.gamma = number(j, "gamma");
        break;
    case ChannelKind::erasure:
    case ChannelKind::depolarizing:
        only_keys(j, {"kind", "d", "p"});
        f.p = number(j, "p");
        break;
    case ChannelKind::generalized_dephasing:
    case ChannelKind::measure_prepare: {
        only_keys(j, {"kind", "d", "vectors"});
        if (!j.contains("vectors") || !j.at("vectors").is_array())
            throw std::invalid_argument("channel spec: \"vectors\" must be an array");
        for (const auto& v : j.at("vectors")) f.vectors.push_back(vector_from_json(v));
        if (!j.contains("d")) f.d = static_cast<int>(f.vectors.size());
        break;
    }
    }
    return f;
}

BosonicChannelParams bosonic_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw std::invalid_argument("channel spec: expected an object with a string \"kind\"");
    const std::string kind = j.at("kind").get<std::string>();
    BosonicChannelParams p;
    if (kind == "thermal") {
        only_keys(j, {"kind", "eta", "nb"});
        p.kind = BosonicKind::thermal;
        p.eta = number(j, "eta");
        p.NB = number(j, "nb");
    } else if (kind == "pure-loss") {
        only_keys(j, {"kind", "eta"});
        p = pure_loss(number(j, "eta"));
    } else if (kind == "amplifier") {
        only_keys(j, {"kind", "G", "nb"});
        p.kind = BosonicKind::amplifier;
        p.G = number(j, "G");
        p.NB = number(j, "nb");
    } else if (kind == "ql-amplifier") {
        only_keys(j, {"kind", "G"});
        p = quantum_limited_amplifier(number(j, "G"));
    } else if (kind == "additive") {
        only_keys(j, {"kind", "xi"});
        p.kind = BosonicKind::additive;
        p.xi = number(j, "xi");
    } else {
        throw std::invalid_argument("unknown bosonic channel kind: " + kind);
    }
    p.validate();
    return p;
}

} // namespace qkdc
