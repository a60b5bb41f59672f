#pragma once

#include <string>
#include <utility>
#include <vector>

#include "demoforge/analytics.hpp"
#include "demoforge/matchgen.hpp"
#include "demoforge/model.hpp"
#include "demoforge/winprob.hpp"

namespace demoforge {

struct BadDocument : Error {
    using Error::Error;
};

// Document text in the canonical layout: top-level keys mapName, tickRate,
// demoVersion, sourceFile, parserParameters, serverVars, players, cleaning,
// gameRounds; fixed key order; shortest round-trip number formatting.
std::string emit_json(const DemoDocument& doc);

// Inverse of emit_json; throws BadDocument on malformed input.
DemoDocument parse_json(const std::string& text);

// File forms are gzip-compressed when the path ends in .gz and are always
// written atomically.
void write_document_file(const DemoDocument& doc, const std::string& path);
DemoDocument read_document_file(const std::string& path);

// Sampled benchmark datasets, same conventions as documents.
std::string dataset_to_json(const Dataset& dataset);
Dataset dataset_from_json(const std::string& text);  // throws BadDocument
void write_dataset_file(const Dataset& dataset, const std::string& path);
Dataset read_dataset_file(const std::string& path);

// Scripted match truth, written next to generated demos for later checking.
std::string ground_truth_json(const GroundTruth& truth);

// Evaluation artifacts.
std::string calibration_report_json(const CalibrationReport& report);
std::string calibration_report_csv(const CalibrationReport& report);
std::string win_curve_csv(std::span<const std::pair<Tick, double>> curve);
std::string corpus_summary_json(const CorpusSummary& summary);

}  // namespace demoforge
