#include "pathrouter/core/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "pathrouter/core/error.hpp"
#include "pathrouter/core/text.hpp"

namespace pathrouter::jsonl {

void for_each_in(std::string_view document,
                 const std::function<void(const Json&, std::size_t line)>& fn) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= document.size()) {
        const auto nl = document.find('\n', pos);
        const auto end = nl == std::string_view::npos ? document.size() : nl;
        const auto line = text::trim(document.substr(pos, end - pos));
        ++line_no;
        if (!line.empty() && line.front() != '#') {
            Json record;
            try {
                record = Json::parse(line);
            } catch (const Json::parse_error& e) {
                throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
            }
            fn(record, line_no);
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
}

void for_each(const std::filesystem::path& file,
              const std::function<void(const Json&, std::size_t line)>& fn) {
    const std::string contents = read_file(file);
    for_each_in(contents, fn);
}

std::string dump_line(const Json& record) { return record.dump(-1, ' ', false, Json::error_handler_t::replace); }

std::string read_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorCode::IOError, "cannot open " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& file, std::string_view contents) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IOError, "cannot write " + file.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::IOError, "short write to " + file.string());
}

}  // namespace pathrouter::jsonl
