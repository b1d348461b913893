#ifndef SREG_IO_HPP
#define SREG_IO_HPP

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace sreg {

// Locale-independent numeric formatting for CSV output. Doubles are printed
// with 17 significant digits (round-trip exact), so rerunning a command with
// the same config yields byte-identical files.
std::string format_double(double x);
std::string format_int(std::int64_t x);

class csv_writer {
public:
    csv_writer(const std::string& path, const std::vector<std::string>& header);

    csv_writer& field(const std::string& s);
    csv_writer& field(double x);
    csv_writer& field(std::int64_t x);
    csv_writer& field(int x) { return field(static_cast<std::int64_t>(x)); }
    void end_row();

private:
    std::ofstream out_;
    std::size_t n_cols_;
    std::size_t col_ = 0;
    void sep();
};

}  // namespace sreg

#endif
