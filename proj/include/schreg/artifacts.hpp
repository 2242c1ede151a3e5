#pragma once

#include <filesystem>

#include "schreg/kernels.hpp"
#include "schreg/regulator.hpp"
#include "schreg/sim.hpp"
#include "schreg/spectral.hpp"

namespace schreg {

/// All text artifacts are deterministic: fixed column order, 17-significant-
/// digit numbers, LF line endings, no timestamps.

void write_timeseries_csv(const TimeSeries& ts, const std::filesystem::path& path);

/// Per-snapshot scalar channels: t plus one column per snapshot channel.
void write_snapshot_channels_csv(const TimeSeries& ts, const std::filesystem::path& path);

/// One profile: columns x, re, im.
void write_profile_csv(const ComplexProfile& profile, const std::filesystem::path& path);

/// Triangle dump: columns x, xi, re, im.
void write_kernel_csv(const KernelGrid& kernel, const std::filesystem::path& path);

/// Rows n, re_lambda, im_lambda, re_mu, im_mu, residual, deviation.
void write_spectrum_csv(const AsymptoticsReport& rep, const std::filesystem::path& path);

/// Rows s, magnitude, bound.
void write_properness_csv(const PropernessProbe& probe, const std::filesystem::path& path);

/// GainSet round trip through a JSON document (profiles and kernels inlined
/// as arrays of [re, im] pairs).
void save_gains_json(const GainSet& gains, const std::filesystem::path& path);
GainSet load_gains_json(const std::filesystem::path& path);

/// Single static SVG line chart of per-step channels; values are floored at
/// 1e-16 before a log plot. Unknown columns are an error; an empty column
/// list or empty series yields an empty-axes chart.
void emit_plot(const TimeSeries& ts, const std::vector<std::string>& columns,
               const std::filesystem::path& path, bool log_y = false);

}  // namespace schreg
