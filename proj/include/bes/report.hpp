#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bes/config.hpp"

namespace bes {

// Full record of one pipeline run. `doc` carries every outcome; primary
// tables are deterministic functions of (config, seed), while wall-clock
// metadata is kept out and written to a sidecar file on emission.
struct ReportBundle {
    nlohmann::ordered_json doc;
    int unit_failures = 0;
};

/// Execute certify -> bounds -> solve -> verify -> soliton -> sweeps in
/// dependency order. A failing unit is recorded and does not abort the rest.
ReportBundle run_pipeline(const RunConfig &cfg, int jobs = 1);

/// FNV-1a 64 over the canonical serialization (hash field blanked).
std::string bundle_hash(const nlohmann::ordered_json &doc);

struct RenderedTable {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::vector<RenderedTable> render_tables(const ReportBundle &bundle);

/// RFC 4180 serialization: CRLF line ends, '.' decimal separator, 17
/// significant digits, quoting only where required.
std::string table_to_csv(const RenderedTable &table);

void emit_json(const ReportBundle &bundle, std::ostream &out);
void emit_markdown(const ReportBundle &bundle, std::ostream &out);

/// Write the bundle under `directory` in the requested format ("csv" writes
/// one file per table, "md" a single report.md, "json" bundle.json). A
/// run_meta.json sidecar carries the timestamp so primary outputs stay
/// byte-reproducible.
std::vector<std::string> emit_to_directory(const ReportBundle &bundle,
                                           const std::string &directory,
                                           const std::string &format);

/// Reload a bundle.json written by emit_to_directory.
ReportBundle load_bundle(const std::string &path);

} // namespace bes
