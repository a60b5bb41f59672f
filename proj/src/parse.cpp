#include "demoforge/parse.hpp"

#include <fstream>
#include <utility>

#include "demoforge/frames.hpp"
#include "demoforge/rounds.hpp"

namespace demoforge {

DemoDocument parse_demo(const EsdmHeader& header, std::span<const GameEvent> events,
                        const ParserParams& params, std::string source_file, int skipped_unknown,
                        bool keep_invalid) {
    DemoDocument doc;
    doc.meta.map_name = header.map_name;
    doc.meta.tick_rate = header.tick_rate;
    doc.meta.demo_version = header.version;
    doc.meta.source_file = std::move(source_file);
    doc.server_vars = header.vars;
    doc.parser_params = params;
    doc.players = header.players;
    doc.cleaning.unknown_records = skipped_unknown;

    SegmentResult seg = segment_rounds(events, header.vars, header.tick_rate,
                                       params.drop_incomplete_rounds);
    doc.cleaning.orphan_round_ends = seg.stats.orphan_round_ends;
    doc.cleaning.dropped_incomplete = seg.stats.dropped_incomplete;
    doc.cleaning.discarded_pre_match = seg.stats.discarded_pre_match;
    doc.cleaning.ignored_phase_changes = seg.stats.ignored_phase_changes;

    std::vector<RawRound> kept;
    std::optional<std::pair<int, int>> prev_scores;
    for (RawRound& rr : seg.rounds) {
        const ValidityVerdict verdict =
            validate_round(rr, header.vars, header.tick_rate, prev_scores, header.players);
        if (verdict.winner_conflict) ++doc.cleaning.winner_conflicts;
        if (!verdict.valid() && !keep_invalid) {
            ++doc.cleaning.dropped_invalid;
            continue;
        }
        for (ValidityReason reason : verdict.reasons)
            rr.round.invalid_reasons.push_back(std::string(validity_reason_name(reason)));
        prev_scores = {rr.round.ct_score, rr.round.t_score};
        kept.push_back(std::move(rr));
    }

    if (!keep_invalid) reconcile_match(kept, header.vars, doc.cleaning);

    doc.game_rounds.reserve(kept.size());
    for (RawRound& rr : kept) {
        rr.round.frames = sample_frames(rr, header.vars, params, header.tick_rate, header.players);
        doc.game_rounds.push_back(std::move(rr.round));
    }
    return doc;
}

DemoDocument parse_demo_file(const std::string& path, const ParserParams& params,
                             bool keep_invalid) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open demo file: " + path);
    int skipped = 0;
    auto [header, events] = read_demo_all(in, &skipped);
    return parse_demo(header, events, params, path, skipped, keep_invalid);
}

}  // namespace demoforge
