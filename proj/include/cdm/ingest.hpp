#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cdm/core.hpp"

namespace cdm {

/// Criteo-style CSV layout: numeric feature columns, a {0,1} treatment
/// column, a real outcome column, and at most one propensity source (a
/// column or a constant). Oracle columns (y0/y1) mark a synthetic file.
struct CsvSchema {
    std::vector<std::string> feature_columns;
    std::string treatment_column = "treatment";
    std::string outcome_column = "outcome";
    std::optional<std::string> propensity_column;
    std::optional<double> constant_propensity;
    std::optional<std::string> y0_column;  // with y1_column: load as synthetic
    std::optional<std::string> y1_column;

    void validate() const;

    /// Schema for the writer's own layout: f0..f{d-1}, treatment, outcome,
    /// then propensity / y0 / y1 picked up from the header when present.
    static CsvSchema auto_detect(const std::vector<std::string>& header);
};

struct LoadOptions {
    bool skip_bad_rows = false;  // count-and-report instead of fail-fast
};

struct LoadReport {
    std::size_t rows_loaded = 0;
    std::size_t rows_skipped = 0;
};

/// Streaming CSV reader. Fail-fast on the first bad row unless
/// options.skip_bad_rows is set. Unknown extra columns are ignored.
Dataset load_csv(const std::string& path, const CsvSchema& schema,
                 const LoadOptions& options = {}, LoadReport* report = nullptr);

/// Header order is fixed: f0,..,f{d-1},treatment,outcome[,propensity][,y0,y1,true_cate].
/// load_csv(write_csv(d)) reproduces every observable sample field exactly.
/// include_oracle requires a synthetic dataset.
void write_csv(const Dataset& dataset, const std::string& path, bool include_oracle = false);

/// Seeded shuffle-and-partition. Fractions must be positive and sum to 1;
/// parts are disjoint and exhaustive, sized by cumulative rounding. With
/// stratify_by_treatment the shuffle runs within each arm.
std::vector<Dataset> split(const Dataset& dataset, const std::vector<double>& fractions,
                           std::uint64_t seed, bool stratify_by_treatment = false);

/// k seeded folds; the first (n mod k) test folds get one extra sample.
std::vector<std::pair<Dataset, Dataset>> kfold(const Dataset& dataset, int k, std::uint64_t seed);

}  // namespace cdm
