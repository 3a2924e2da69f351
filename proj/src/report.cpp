#include "topseg/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace topseg {

namespace {

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot open " + path.string() + " for writing");
    }
    return out;
}

} // namespace

void write_per_document_csv(const std::filesystem::path& path,
                            std::span<const NamedReport> reports) {
    auto out = open_out(path);
    out << "segmenter,doc_id,B,BP,BR,Pk,WD\n";
    for (const NamedReport& r : reports) {
        for (const DocScores& d : r.report.docs) {
            out << r.name << ',' << d.doc_id << ',' << fixed3(d.b) << ',' << fixed3(d.bp) << ','
                << fixed3(d.br) << ',' << fixed3(d.pk) << ',' << fixed3(d.wd) << '\n';
        }
    }
}

void write_aggregate_csv(const std::filesystem::path& path, std::span<const NamedReport> reports) {
    auto out = open_out(path);
    out << "segmenter,docs,B,BP,BR,Pk,WD\n";
    for (const NamedReport& r : reports) {
        const DocScores& m = r.report.mean;
        out << r.name << ',' << r.report.count << ',' << fixed3(m.b) << ',' << fixed3(m.bp) << ','
            << fixed3(m.br) << ',' << fixed3(m.pk) << ',' << fixed3(m.wd) << '\n';
    }
}

std::vector<NamedReport> read_aggregate_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open report file: " + path.string());
    }
    std::vector<NamedReport> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || line.empty()) {
            continue;
        }
        std::istringstream row(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(row, field, ',')) {
            fields.push_back(field);
        }
        if (fields.size() != 7) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": expected 7 columns");
        }
        NamedReport r;
        r.name = fields[0];
        try {
            r.report.count = static_cast<std::size_t>(std::stoull(fields[1]));
            r.report.mean.b = std::stod(fields[2]);
            r.report.mean.bp = std::stod(fields[3]);
            r.report.mean.br = std::stod(fields[4]);
            r.report.mean.pk = std::stod(fields[5]);
            r.report.mean.wd = std::stod(fields[6]);
        } catch (const std::exception&) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad number");
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::string format_aggregate_table(std::span<const NamedReport> reports) {
    std::size_t name_width = 9; // "segmenter"
    for (const NamedReport& r : reports) {
        name_width = std::max(name_width, r.name.size());
    }
    std::ostringstream out;
    out << std::left;
    auto pad = [&](const std::string& s, std::size_t w) {
        out << s;
        for (std::size_t i = s.size(); i < w; ++i) {
            out << ' ';
        }
    };
    pad("segmenter", name_width);
    for (const char* col : {"docs", "B", "BP", "BR", "Pk", "WD"}) {
        out << "  ";
        pad(col, 6);
    }
    out << '\n';
    for (const NamedReport& r : reports) {
        pad(r.name, name_width);
        out << "  ";
        pad(std::to_string(r.report.count), 6);
        const DocScores& m = r.report.mean;
        for (double v : {m.b, m.bp, m.br, m.pk, m.wd}) {
            out << "  ";
            pad(fixed3(v), 6);
        }
        out << '\n';
    }
    return out.str();
}

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 300.0;
constexpr double kMarginLeft = 48.0;
constexpr double kMarginRight = 16.0;
constexpr double kMarginTop = 16.0;
constexpr double kMarginBottom = 32.0;

std::string svg_header() {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << static_cast<int>(kWidth)
        << "\" height=\"" << static_cast<int>(kHeight) << "\" viewBox=\"0 0 "
        << static_cast<int>(kWidth) << ' ' << static_cast<int>(kHeight) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    return out.str();
}

} // namespace

std::string render_series_svg(const SimilaritySeries& series, double threshold) {
    if (series.empty()) {
        throw ParseError("cannot plot an empty similarity series");
    }
    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    // y axis spans [-1, 1]; x positions are boundary indices 1..S-1.
    auto x_of = [&](std::size_t i) {
        if (series.size() == 1) {
            return kMarginLeft + plot_w / 2.0;
        }
        return kMarginLeft + plot_w * static_cast<double>(i) / static_cast<double>(series.size() - 1);
    };
    auto y_of = [&](double v) { return kMarginTop + plot_h * (1.0 - (v + 1.0) / 2.0); };

    std::ostringstream out;
    out << svg_header();
    out << "<line x1=\"" << fixed2(kMarginLeft) << "\" y1=\"" << fixed2(y_of(threshold))
        << "\" x2=\"" << fixed2(kWidth - kMarginRight) << "\" y2=\"" << fixed2(y_of(threshold))
        << "\" stroke=\"red\" stroke-dasharray=\"4 3\"/>\n";
    out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (i > 0) {
            out << ' ';
        }
        out << fixed2(x_of(i)) << ',' << fixed2(y_of(series[i]));
    }
    out << "\"/>\n";
    Segmentation chosen = trough_boundaries(series, threshold);
    for (std::size_t b : chosen.boundaries()) {
        out << "<circle cx=\"" << fixed2(x_of(b - 1)) << "\" cy=\"" << fixed2(y_of(series[b - 1]))
            << "\" r=\"3.5\" fill=\"red\"/>\n";
    }
    out << "<text x=\"" << fixed2(kMarginLeft) << "\" y=\"" << fixed2(kHeight - 8.0)
        << "\" font-size=\"12\" font-family=\"sans-serif\">boundary position (" << series.size()
        << " values), threshold " << fixed2(threshold) << "</text>\n";
    out << "</svg>\n";
    return out.str();
}

std::string render_report_svg(std::span<const NamedReport> reports) {
    if (reports.empty()) {
        throw ParseError("cannot plot an empty report");
    }
    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    const double slot = plot_w / static_cast<double>(reports.size());
    const double bar_w = slot * 0.6;

    std::ostringstream out;
    out << svg_header();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        double b = std::clamp(reports[i].report.mean.b, 0.0, 1.0);
        double h = plot_h * b;
        double x = kMarginLeft + slot * static_cast<double>(i) + (slot - bar_w) / 2.0;
        double y = kMarginTop + plot_h - h;
        out << "<rect x=\"" << fixed2(x) << "\" y=\"" << fixed2(y) << "\" width=\""
            << fixed2(bar_w) << "\" height=\"" << fixed2(h) << "\" fill=\"steelblue\"/>\n";
        out << "<text x=\"" << fixed2(x + bar_w / 2.0) << "\" y=\"" << fixed2(y - 4.0)
            << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">"
            << fixed3(reports[i].report.mean.b) << "</text>\n";
        out << "<text x=\"" << fixed2(x + bar_w / 2.0) << "\" y=\"" << fixed2(kHeight - 8.0)
            << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">"
            << reports[i].name << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

void write_series_csv(const std::filesystem::path& path,
                      std::span<const std::pair<std::string, SimilaritySeries>> rows) {
    auto out = open_out(path);
    out << "doc_id,position,value\n";
    char buf[40];
    for (const auto& [doc_id, series] : rows) {
        for (std::size_t i = 0; i < series.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.9g", series[i]);
            out << doc_id << ',' << (i + 1) << ',' << buf << '\n';
        }
    }
}

std::vector<std::pair<std::string, SimilaritySeries>> read_series_csv(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open series file: " + path.string());
    }
    std::vector<std::pair<std::string, SimilaritySeries>> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || line.empty()) {
            continue; // header
        }
        std::istringstream row(line);
        std::string doc_id;
        std::string position;
        std::string value;
        if (!std::getline(row, doc_id, ',') || !std::getline(row, position, ',') ||
            !std::getline(row, value)) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad series row");
        }
        if (out.empty() || out.back().first != doc_id) {
            out.emplace_back(doc_id, SimilaritySeries{});
        }
        try {
            out.back().second.push_back(std::stod(value));
        } catch (const std::exception&) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": bad series value: " + value);
        }
    }
    return out;
}

} // namespace topseg
