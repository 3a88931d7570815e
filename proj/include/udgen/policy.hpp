#pragma once

#include "udgen/generation_model.hpp"
#include "udgen/latent_space.hpp"
#include "udgen/synth.hpp"
#include "udgen/uncertainty.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace udgen {

enum class PolicyKind { random_cm, distribution_matching, hard_case, mixed };

std::string_view to_string(PolicyKind kind);
/// Accepts the full names and the short forms cm, dm, hc.
PolicyKind policy_kind_from_string(std::string_view name);

struct PolicySpec {
    PolicyKind kind = PolicyKind::mixed;
    double r_a = 0.15;
    std::uint64_t seed = 7;

    void validate() const;
};

/// One member of S_gen: content from labeled x_a, style from x_b in the same
/// content cluster. The generated result lands in cell (i, j) with i the
/// shared content cluster and j the style cluster of x_b.
struct GenerationCandidate {
    std::size_t content_source = 0;
    std::size_t style_source = 0;
    std::size_t i = 0;
    std::size_t j = 0;

    friend auto operator<=>(const GenerationCandidate&, const GenerationCandidate&) = default;
};

/// Every candidate, grouped by cell in row-major order and then by
/// (content_source, style_source).
std::vector<GenerationCandidate> content_matched_pairs(const PatchSpace& space, const Dataset& dataset);

/// Per-cell candidate counts, computed without enumeration:
/// |labeled in row i| * |members of H_ij| - |labeled in H_ij|.
std::vector<std::size_t> candidate_counts(const PatchSpace& space, const Dataset& dataset);

struct CellProbTable {
    std::size_t m = 0;
    std::size_t n = 0;
    std::vector<double> p;  // row-major

    double at(std::size_t i, std::size_t j) const { return p.at(i * n + j); }

    friend bool operator==(const CellProbTable&, const CellProbTable&) = default;
};

/// Cell probabilities of a policy. Cells without candidates are zeroed and
/// the rest renormalized; mixed averages the masked DM and HC tables. Throws
/// PolicyDegenerateError when nothing remains, DataError when hard_case or
/// mixed lack uncertainties.
CellProbTable cell_probs(const PatchSpace& space, const Dataset& dataset, PolicyKind kind,
                         const UncertaintyTable* uncertainties = nullptr);

enum class Provenance { original, generated };

/// A policy decision before any pixels are synthesized.
struct Draw {
    std::size_t i = 0;
    std::size_t j = 0;
    Provenance provenance = Provenance::original;
    std::size_t content_source = 0;  // the original patch for original draws
    std::optional<std::size_t> style_source;
    bool fallback = false;  // generated because H_ij has no labeled member

    friend bool operator==(const Draw&, const Draw&) = default;
};

struct TrainingExample {
    std::vector<double> pixels;
    Mask mask;
    Draw draw;
};

/// Draws cells from a probability table and resolves each to an original
/// labeled patch or a lazily sampled candidate. Holds its own random stream.
class PolicySampler {
public:
    PolicySampler(const PatchSpace& space, const Dataset& dataset, CellProbTable probs, const PolicySpec& spec);

    Draw next();
    const CellProbTable& probs() const { return probs_; }

private:
    const PatchSpace& space_;
    const Dataset& dataset_;
    CellProbTable probs_;
    PolicySpec spec_;
    std::mt19937_64 rng_;
    std::vector<double> cumulative_;
    std::vector<std::vector<std::size_t>> row_labeled_;   // per content cluster
    std::vector<std::vector<std::size_t>> cell_labeled_;  // per cell
};

/// Pixels and mask of a draw: the original patch, or
/// generate(E^c(x_a), E^s(x_b)) with the mask of x_a.
TrainingExample realize(const GenerationModel& model, const Dataset& dataset, const Draw& draw);

/// `count` draws from a sampler seeded by spec.seed, realized.
std::vector<TrainingExample> sample_batch(const GenerationModel& model, const PatchSpace& space, const Dataset& dataset,
                                          const CellProbTable& probs, const PolicySpec& spec, std::size_t count);

/// Tally of a sampling run.
struct PolicyRun {
    PolicySpec spec;
    CellProbTable probs;
    std::vector<std::size_t> cell_counts;  // row-major
    std::size_t draws = 0;
    std::size_t generated = 0;
    std::size_t original = 0;
    std::size_t fallbacks = 0;

    void record(const Draw& draw);
    /// Empirical cell frequencies; empty when no draws were made.
    std::vector<double> frequencies() const;
    /// Total variation distance to the target table; empty without draws.
    std::optional<double> tv_distance() const;
    /// Share of draws on which the R_a branch chose generation. A fallback
    /// counts as the original branch it replaced. Empty without draws.
    std::optional<double> generated_fraction() const;
};

PolicyRun make_policy_run(const PolicySpec& spec, const CellProbTable& probs);

}  // namespace udgen
