#include "riskpanel/csv.hpp"

#include "riskpanel/errors.hpp"

namespace riskpanel {

CsvReader::CsvReader(const std::string& path) : in_(path), path_(path) {
    if (!in_) throw ValidationError("cannot open CSV file: " + path);
}

bool CsvReader::next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        fields = split_csv_line(line);
        return true;
    }
    return false;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

CsvWriter::CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw ValidationError("cannot open CSV file for writing: " + path);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << fields[i];
    }
    out_ << '\n';
}

}  // namespace riskpanel
