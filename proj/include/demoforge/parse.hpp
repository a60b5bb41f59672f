#pragma once

#include <span>
#include <string>

#include "demoforge/codec.hpp"
#include "demoforge/model.hpp"

namespace demoforge {

// Full cleaning pipeline: segment -> validate -> reconcile -> sample frames.
// Invalid rounds are dropped and counted unless keep_invalid is set, in which
// case they stay, flagged with their failure reasons, and reconciliation
// (renumbering, score repair, clinch cut) is skipped so the raw record stays
// inspectable. skipped_unknown feeds the unknownRecords cleaning counter.
DemoDocument parse_demo(const EsdmHeader& header, std::span<const GameEvent> events,
                        const ParserParams& params, std::string source_file = "",
                        int skipped_unknown = 0, bool keep_invalid = false);

// Reads one .esdm file from disk and runs the pipeline on it.
DemoDocument parse_demo_file(const std::string& path, const ParserParams& params,
                             bool keep_invalid = false);

}  // namespace demoforge
