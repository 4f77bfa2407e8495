#include "duc/touchstone.hpp"

#include "duc/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

namespace duc {

namespace {

enum class DataFormat { DB, MA, RI };

struct OptionLine {
    double frequency_scale = 1.0;
    DataFormat format = DataFormat::MA;
};

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

std::vector<std::string> split_ws(std::string_view line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
        }
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) {
            ++j;
        }
        if (j > i) {
            out.emplace_back(line.substr(i, j - i));
        }
        i = j;
    }
    return out;
}

OptionLine parse_option_line(std::string_view line, int line_no) {
    auto tokens = split_ws(line.substr(1));
    if (tokens.size() != 5) {
        throw ParseError("option line must be '# <unit> S <DB|MA|RI> R 50'", line_no);
    }
    OptionLine opt;
    const std::string unit = upper(tokens[0]);
    if (unit == "HZ") {
        opt.frequency_scale = 1.0;
    } else if (unit == "KHZ") {
        opt.frequency_scale = 1e3;
    } else if (unit == "MHZ") {
        opt.frequency_scale = 1e6;
    } else if (unit == "GHZ") {
        opt.frequency_scale = 1e9;
    } else {
        throw ParseError("unknown frequency unit '" + tokens[0] + "'", line_no);
    }
    if (upper(tokens[1]) != "S") {
        throw ParseError("only S-parameter files are supported", line_no);
    }
    const std::string fmt = upper(tokens[2]);
    if (fmt == "DB") {
        opt.format = DataFormat::DB;
    } else if (fmt == "MA") {
        opt.format = DataFormat::MA;
    } else if (fmt == "RI") {
        opt.format = DataFormat::RI;
    } else {
        throw ParseError("unknown data format '" + tokens[2] + "'", line_no);
    }
    if (upper(tokens[3]) != "R") {
        throw ParseError("expected 'R <impedance>'", line_no);
    }
    double r = 0.0;
    auto [ptr, ec] = std::from_chars(tokens[4].data(), tokens[4].data() + tokens[4].size(), r);
    if (ec != std::errc() || ptr != tokens[4].data() + tokens[4].size() || r != 50.0) {
        throw ParseError("reference impedance must be 50 ohm", line_no);
    }
    return opt;
}

double parse_number(const std::string& token, int line_no) {
    // strtod accepts the exponent forms Touchstone writers emit.
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || token.empty()) {
        throw ParseError("invalid number '" + token + "'", line_no);
    }
    return v;
}

double to_db(DataFormat format, double a, double b) {
    switch (format) {
    case DataFormat::DB:
        return a;
    case DataFormat::MA:
        return 20.0 * std::log10(std::abs(a));
    case DataFormat::RI:
        return 20.0 * std::log10(std::hypot(a, b));
    }
    return a;
}

} // namespace

TabulatedResponse parse_touchstone(std::string_view text, Extrapolation extrapolation) {
    TabulatedResponse out;
    out.extrapolation = extrapolation;
    std::optional<OptionLine> option;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) {
            eol = text.size();
        }
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        if (auto bang = line.find('!'); bang != std::string_view::npos) {
            line = line.substr(0, bang);
        }
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) {
            line.remove_suffix(1);
        }
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) {
            line.remove_prefix(1);
        }
        if (line.empty()) {
            if (eol == text.size()) {
                break;
            }
            continue;
        }
        if (line.front() == '#') {
            if (option) {
                throw ParseError("duplicate option line", line_no);
            }
            option = parse_option_line(line, line_no);
            continue;
        }
        if (!option) {
            throw ParseError("data before option line", line_no);
        }
        const auto tokens = split_ws(line);
        if (tokens.size() != 9) {
            throw ParseError("two-port record needs 9 columns, found " + std::to_string(tokens.size()),
                             line_no);
        }
        const double f = parse_number(tokens[0], line_no) * option->frequency_scale;
        const double a = parse_number(tokens[3], line_no);
        const double b = parse_number(tokens[4], line_no);
        if (!out.points.empty() && !(f > out.points.back().first)) {
            throw ParseError("frequencies must be strictly increasing", line_no);
        }
        out.points.emplace_back(f, to_db(option->format, a, b));
        if (eol == text.size()) {
            break;
        }
    }
    if (!option) {
        throw ParseError("missing option line");
    }
    if (out.points.size() < 2) {
        throw ParseError("at least two frequency points are required");
    }
    return out;
}

std::string write_touchstone(const TabulatedResponse& response) {
    response.validate();
    std::string out = "! S21 magnitude only; S11/S22 are placeholders\n# HZ S DB R 50\n";
    char buf[256];
    for (const auto& [f, s21] : response.points) {
        std::snprintf(buf, sizeof(buf), "%.17g -200 0 %.17g 0 %.17g 0 -200 0\n", f, s21, s21);
        out += buf;
    }
    return out;
}

TabulatedResponse load_touchstone(const std::string& path, Extrapolation extrapolation) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    text.erase(std::remove(text.begin(), text.end(), '\r'), text.end());
    return parse_touchstone(text, extrapolation);
}

} // namespace duc
