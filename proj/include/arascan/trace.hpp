#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "arascan/bytes.hpp"
#include "arascan/diag.hpp"

namespace arascan {

/// One recorded API call from an instrumented run.
struct TraceEvent {
    uint64_t seq = 0;
    int64_t thread = 0;
    std::string api;
    std::vector<std::string> args;
    std::string ret;
};

/// Line-delimited JSON records: {"seq":N,"thread":N,"api":str,"args":[str...],
/// "ret":str}. Unknown extra fields are ignored; seq must strictly increase.
inline std::vector<TraceEvent> load_trace(ByteView file_bytes)
{
    std::vector<TraceEvent> events;
    std::string text(file_bytes.begin(), file_bytes.end());
    size_t line_no = 0;
    size_t pos = 0;
    bool have_prev = false;
    uint64_t prev_seq = 0;
    while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string::npos) {
            end = text.size();
        }
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw TraceFormatError(std::string("invalid JSON: ") + e.what(), line_no);
        }
        if (!j.is_object()) {
            throw TraceFormatError("record must be an object", line_no);
        }
        TraceEvent ev;
        if (!j.contains("seq") || !j["seq"].is_number_unsigned()) {
            throw TraceFormatError("missing non-negative integer 'seq'", line_no);
        }
        ev.seq = j["seq"].get<uint64_t>();
        if (!j.contains("thread") || !j["thread"].is_number_integer()) {
            throw TraceFormatError("missing integer 'thread'", line_no);
        }
        ev.thread = j["thread"].get<int64_t>();
        if (!j.contains("api") || !j["api"].is_string()) {
            throw TraceFormatError("missing string 'api'", line_no);
        }
        ev.api = j["api"].get<std::string>();
        if (j.contains("args")) {
            if (!j["args"].is_array()) {
                throw TraceFormatError("'args' must be an array of strings", line_no);
            }
            for (const auto& a : j["args"]) {
                if (!a.is_string()) {
                    throw TraceFormatError("'args' must be an array of strings", line_no);
                }
                ev.args.push_back(a.get<std::string>());
            }
        }
        if (j.contains("ret") && j["ret"].is_string()) {
            ev.ret = j["ret"].get<std::string>();
        }
        if (have_prev && ev.seq <= prev_seq) {
            throw TraceFormatError("seq values must strictly increase", line_no);
        }
        prev_seq = ev.seq;
        have_prev = true;
        events.push_back(std::move(ev));
    }
    return events;
}

}  // namespace arascan
