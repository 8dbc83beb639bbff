#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace riskpanel {

// Minimal CSV support for the toolkit's long-format files. Fields never
// contain commas or quotes, so no quoting rules are implemented.
struct CsvReader {
    explicit CsvReader(const std::string& path);

    // Reads the next row; returns false at EOF. Blank lines are skipped.
    bool next(std::vector<std::string>& fields);

    std::size_t line_number() const { return line_; }

private:
    std::ifstream in_;
    std::string path_;
    std::size_t line_ = 0;
};

std::vector<std::string> split_csv_line(const std::string& line);

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);
    void row(const std::vector<std::string>& fields);

private:
    std::ofstream out_;
};

}  // namespace riskpanel
