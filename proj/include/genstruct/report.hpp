#pragma once

#include <string>
#include <vector>

namespace genstruct {

// One verification suite's outcome: named cases with pass/fail/skip status.
// Rendering is deterministic (no timing, no environment details), so a report
// produced twice from the same seed is byte-identical.
struct ReportLine {
    std::string name;
    std::string status;  // "pass", "fail", or "skip"
    std::string detail;  // witness or note; empty when not needed
};

struct Report {
    std::string title;
    std::vector<ReportLine> lines;

    void add(std::string name, bool passed, std::string detail = "") {
        lines.push_back({std::move(name), passed ? "pass" : "fail", std::move(detail)});
    }
    void skip(std::string name, std::string why) {
        lines.push_back({std::move(name), "skip", std::move(why)});
    }

    bool ok() const {
        for (const auto& l : lines)
            if (l.status == "fail") return false;
        return true;
    }

    std::size_t count(const std::string& status) const {
        std::size_t n = 0;
        for (const auto& l : lines)
            if (l.status == status) ++n;
        return n;
    }

    std::string render() const {
        std::string out = "== " + title + " ==\n";
        for (const auto& l : lines) {
            out += "[" + l.status + "] " + l.name;
            if (!l.detail.empty()) out += " | " + l.detail;
            out += "\n";
        }
        out += "summary: " + std::to_string(count("pass")) + " pass, " +
               std::to_string(count("fail")) + " fail, " + std::to_string(count("skip")) +
               " skip\n";
        return out;
    }
};

}  // namespace genstruct
