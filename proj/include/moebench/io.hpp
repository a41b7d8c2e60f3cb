#pragma once

#include <string>
#include <string_view>

#include "moebench/bayes.hpp"
#include "moebench/datagen.hpp"
#include "moebench/models.hpp"
#include "moebench/moe.hpp"

// Text persistence. All numbers are written in shortest round-trip decimal
// form, so save/load cycles reproduce every double bit-exactly. Checkpoints
// are a key=value header (starting with kind=) followed by named numeric
// blocks; parse failures name the file, line, and problem.
namespace moebench {

std::string format_double(double v);
// strict: the whole token must parse
double parse_double(std::string_view s);

// CSV with header x0,x1,...,y plus a key=value sidecar carrying the full
// generator description (kind, degree, seed, coefficients, sampling
// interval, noise std, standardization stats).
void save_dataset(const Dataset& ds, const std::string& csv_path,
                  const std::string& meta_path);
Dataset load_dataset(const std::string& csv_path,
                     const std::string& meta_path);

void save_moe(const MoeModel& m, const std::string& path);
MoeModel load_moe(const std::string& path);

void save_blr(const GaussianPosterior& p, const std::string& path);
GaussianPosterior load_blr(const std::string& path);

void save_samples(const PosteriorSamples& s, const std::string& path);
PosteriorSamples load_samples(const std::string& path);

enum class CheckpointKind { Moe, BlrPosterior, PosteriorSamples };

// Reads just the kind= line so callers can dispatch the right loader.
CheckpointKind peek_checkpoint_kind(const std::string& path);

// model,degree,mse,nll,accuracy,risk,seconds,seed; disengaged metrics
// serialize as empty fields
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRecord& r);

}  // namespace moebench
