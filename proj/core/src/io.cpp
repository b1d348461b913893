#include "sreg/io.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace sreg {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x,
                             std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string format_int(std::int64_t x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

csv_writer::csv_writer(const std::string& path,
                       const std::vector<std::string>& header)
    : out_(path, std::ios::binary), n_cols_(header.size()) {
    if (!out_) {
        throw std::runtime_error("cannot open for writing: " + path);
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_ << ',';
        out_ << header[i];
    }
    out_ << '\n';
}

void csv_writer::sep() {
    if (col_) out_ << ',';
    ++col_;
}

csv_writer& csv_writer::field(const std::string& s) {
    sep();
    out_ << s;
    return *this;
}

csv_writer& csv_writer::field(double x) {
    sep();
    out_ << format_double(x);
    return *this;
}

csv_writer& csv_writer::field(std::int64_t x) {
    sep();
    out_ << format_int(x);
    return *this;
}

void csv_writer::end_row() {
    if (col_ != n_cols_) {
        throw std::logic_error("csv row has wrong number of fields");
    }
    out_ << '\n';
    col_ = 0;
}

}  // namespace sreg
