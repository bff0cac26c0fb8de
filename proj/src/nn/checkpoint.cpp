#include "evcs/nn/checkpoint.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "evcs/error.hpp"

namespace evcs::nn {

namespace {

constexpr const char* kMagic = "evcs-checkpoint";
constexpr int kVersion = 1;

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ConstParamRefs& params) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + path.string());
    out << kMagic << ' ' << kVersion << '\n' << params.size() << '\n';
    for (const Parameter* p : params) {
        out << p->name << ' ' << p->value.rows << ' ' << p->value.cols << '\n';
        for (std::size_t r = 0; r < p->value.rows; ++r) {
            for (std::size_t c = 0; c < p->value.cols; ++c) {
                if (c) out << ' ';
                out << format_double(p->value(r, c));
            }
            out << '\n';
        }
    }
    if (!out) throw IoError("failed writing checkpoint " + path.string());
}

void load_checkpoint(const std::filesystem::path& path, const ParamRefs& params) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    std::size_t line_no = 0;
    std::string line;
    auto next_line = [&]() -> std::string& {
        if (!std::getline(in, line)) throw ParseError("unexpected end of checkpoint", line_no + 1);
        ++line_no;
        return line;
    };

    {
        std::istringstream hdr(next_line());
        std::string magic;
        int version = 0;
        if (!(hdr >> magic >> version) || magic != kMagic)
            throw ParseError("not an evcs checkpoint", line_no);
        if (version != kVersion)
            throw ParseError("unsupported checkpoint version " + std::to_string(version), line_no);
    }
    std::size_t count = 0;
    {
        std::istringstream cnt(next_line());
        if (!(cnt >> count)) throw ParseError("missing parameter count", line_no);
    }
    if (count != params.size())
        throw ShapeError("checkpoint holds " + std::to_string(count) + " parameters, model has " +
                         std::to_string(params.size()));

    // Parse everything first so a mismatch leaves the model untouched.
    std::vector<Matrix> loaded;
    loaded.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        std::istringstream hdr(next_line());
        std::string name;
        std::size_t rows = 0, cols = 0;
        if (!(hdr >> name >> rows >> cols)) throw ParseError("malformed parameter header", line_no);
        const Parameter& target = *params[k];
        if (name != target.name)
            throw ShapeError("checkpoint parameter '" + name + "' where model expects '" + target.name + "'");
        if (rows != target.value.rows || cols != target.value.cols)
            throw ShapeError("shape mismatch for " + name + ": checkpoint " + std::to_string(rows) + "x" +
                             std::to_string(cols) + ", model " + std::to_string(target.value.rows) + "x" +
                             std::to_string(target.value.cols));
        Matrix m(rows, cols);
        for (std::size_t r = 0; r < rows; ++r) {
            const std::string& row = next_line();
            const char* p = row.data();
            const char* end = row.data() + row.size();
            for (std::size_t c = 0; c < cols; ++c) {
                while (p < end && *p == ' ') ++p;
                auto [q, ec] = std::from_chars(p, end, m(r, c));
                if (ec != std::errc()) throw ParseError("malformed value in " + name, line_no);
                p = q;
            }
            while (p < end && (*p == ' ' || *p == '\r')) ++p;
            if (p != end) throw ParseError("extra values in row of " + name, line_no);
        }
        loaded.push_back(std::move(m));
    }
    for (std::size_t k = 0; k < count; ++k) params[k]->value = std::move(loaded[k]);
}

}  // namespace evcs::nn
