#include "cdm/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace cdm {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
    return out;
}

double parse_double(const std::string& cell, const std::string& column, std::size_t line_no) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v))
        throw IoError("line " + std::to_string(line_no) + ": non-numeric value '" + cell +
                          "' in column '" + column + "'");
    return v;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError("schema column '" + name + "' not found in header");
    return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

void CsvSchema::validate() const {
    if (feature_columns.empty()) throw ConfigError("schema: no feature columns declared");
    std::set<std::string> seen;
    auto check = [&seen](const std::string& name) {
        if (name.empty()) throw ConfigError("schema: empty column name");
        if (!seen.insert(name).second) throw ConfigError("schema: duplicate column '" + name + "'");
    };
    for (const auto& c : feature_columns) check(c);
    check(treatment_column);
    check(outcome_column);
    if (propensity_column && constant_propensity)
        throw ConfigError("schema: declare at most one of propensity_column / constant_propensity");
    if (propensity_column) check(*propensity_column);
    if (constant_propensity && !(*constant_propensity > 0.0 && *constant_propensity < 1.0))
        throw ConfigError("schema: constant_propensity must lie in (0,1)");
    if (y0_column.has_value() != y1_column.has_value())
        throw ConfigError("schema: y0_column and y1_column must be declared together");
    if (y0_column) {
        check(*y0_column);
        check(*y1_column);
    }
}

CsvSchema CsvSchema::auto_detect(const std::vector<std::string>& header) {
    CsvSchema schema;
    for (const auto& name : header) {
        if (name.size() >= 2 && name[0] == 'f' &&
            std::all_of(name.begin() + 1, name.end(), [](char c) { return c >= '0' && c <= '9'; }))
            schema.feature_columns.push_back(name);
    }
    auto has = [&header](const char* name) {
        return std::find(header.begin(), header.end(), name) != header.end();
    };
    if (has("propensity")) schema.propensity_column = "propensity";
    if (has("y0") && has("y1")) {
        schema.y0_column = "y0";
        schema.y1_column = "y1";
    }
    schema.validate();
    return schema;
}

Dataset load_csv(const std::string& path, const CsvSchema& schema, const LoadOptions& options,
                 LoadReport* report) {
    schema.validate();
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");

    std::string line;
    if (!std::getline(in, line)) throw IoError("'" + path + "': missing header row");
    const std::vector<std::string> header = split_line(line);

    std::vector<std::size_t> feature_idx;
    feature_idx.reserve(schema.feature_columns.size());
    for (const auto& name : schema.feature_columns) feature_idx.push_back(column_index(header, name));
    const std::size_t treat_idx = column_index(header, schema.treatment_column);
    const std::size_t outcome_idx = column_index(header, schema.outcome_column);
    std::optional<std::size_t> prop_idx, y0_idx, y1_idx;
    if (schema.propensity_column) prop_idx = column_index(header, *schema.propensity_column);
    if (schema.y0_column) {
        y0_idx = column_index(header, *schema.y0_column);
        y1_idx = column_index(header, *schema.y1_column);
    }
    const bool synthetic = y0_idx.has_value();

    std::vector<Sample> samples;
    LoadReport local;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        try {
            const std::vector<std::string> cells = split_line(line);
            if (cells.size() < header.size())
                throw IoError("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " cells, got " +
                                  std::to_string(cells.size()));
            Sample s;
            s.features.reserve(feature_idx.size());
            for (std::size_t j = 0; j < feature_idx.size(); ++j)
                s.features.push_back(
                    parse_double(cells[feature_idx[j]], schema.feature_columns[j], line_no));
            const double t = parse_double(cells[treat_idx], schema.treatment_column, line_no);
            if (t != 0.0 && t != 1.0)
                throw IoError("line " + std::to_string(line_no) + ": treatment '" +
                                  cells[treat_idx] + "' outside {0,1}");
            s.treatment = static_cast<TreatmentLevel>(t);
            s.outcome = parse_double(cells[outcome_idx], schema.outcome_column, line_no);
            if (prop_idx) {
                const double e = parse_double(cells[*prop_idx], *schema.propensity_column, line_no);
                if (!(e > 0.0 && e < 1.0))
                    throw IoError("line " + std::to_string(line_no) +
                                      ": propensity outside (0,1)");
                s.propensity = e;
            } else if (schema.constant_propensity) {
                s.propensity = *schema.constant_propensity;
            }
            if (synthetic) {
                const double y0 = parse_double(cells[*y0_idx], *schema.y0_column, line_no);
                const double y1 = parse_double(cells[*y1_idx], *schema.y1_column, line_no);
                if (s.outcome != (s.treatment == 1 ? y1 : y0))
                    throw IoError("line " + std::to_string(line_no) +
                                      ": outcome does not match potential outcome");
                s.potential_outcomes = {y0, y1};
                s.true_cate = y1 - y0;
            }
            samples.push_back(std::move(s));
            ++local.rows_loaded;
        } catch (const IoError&) {
            if (!options.skip_bad_rows) throw;
            ++local.rows_skipped;
        }
    }
    if (report) *report = local;
    if (samples.empty()) throw IoError("'" + path + "': no valid data rows");
    return Dataset(std::move(samples), static_cast<int>(feature_idx.size()), path, synthetic);
}

void write_csv(const Dataset& dataset, const std::string& path, bool include_oracle) {
    if (include_oracle && !dataset.is_synthetic())
        throw PreconditionError("write_csv: include_oracle requires a synthetic dataset");
    const bool with_propensity = dataset.has_propensities();
    if (!with_propensity && dataset.samples()[0].propensity)
        throw PreconditionError("write_csv: mixed propensity availability is not writable");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");

    for (int j = 0; j < dataset.n_features(); ++j) out << 'f' << j << ',';
    out << "treatment,outcome";
    if (with_propensity) out << ",propensity";
    if (include_oracle) out << ",y0,y1,true_cate";
    out << '\n';

    for (const Sample& s : dataset.samples()) {
        for (double v : s.features) out << format_double(v) << ',';
        out << s.treatment << ',' << format_double(s.outcome);
        if (with_propensity) out << ',' << format_double(*s.propensity);
        if (include_oracle)
            out << ',' << format_double((*s.potential_outcomes)[0]) << ','
                << format_double((*s.potential_outcomes)[1]) << ',' << format_double(*s.true_cate);
        out << '\n';
    }
    if (!out) throw IoError("write failure on '" + path + "'");
}

namespace {

Dataset subset(const Dataset& parent, const std::vector<std::size_t>& idx, const std::string& name) {
    std::vector<Sample> samples;
    samples.reserve(idx.size());
    for (std::size_t i : idx) samples.push_back(parent[i]);
    return Dataset(std::move(samples), parent.n_features(), name, parent.is_synthetic());
}

/// Cumulative-rounding partition of `idx` (already shuffled) by `fractions`.
std::vector<std::vector<std::size_t>> partition(const std::vector<std::size_t>& idx,
                                                const std::vector<double>& fractions) {
    const std::size_t n = idx.size();
    std::vector<std::vector<std::size_t>> parts(fractions.size());
    double cum = 0.0;
    std::size_t start = 0;
    for (std::size_t k = 0; k < fractions.size(); ++k) {
        cum += fractions[k];
        const std::size_t end =
            k + 1 == fractions.size() ? n : static_cast<std::size_t>(std::llround(cum * n));
        parts[k].assign(idx.begin() + start, idx.begin() + end);
        start = end;
    }
    return parts;
}

}  // namespace

std::vector<Dataset> split(const Dataset& dataset, const std::vector<double>& fractions,
                           std::uint64_t seed, bool stratify_by_treatment) {
    if (fractions.empty()) throw PreconditionError("split: no fractions given");
    double sum = 0.0;
    for (double f : fractions) {
        if (!(f > 0.0)) throw PreconditionError("split: fractions must be positive");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw PreconditionError("split: fractions must sum to 1");

    Rng rng(seed);
    std::vector<std::vector<std::size_t>> parts;
    if (stratify_by_treatment) {
        std::vector<std::size_t> treated, control;
        for (std::size_t i = 0; i < dataset.size(); ++i)
            (dataset[i].treatment == 1 ? treated : control).push_back(i);
        rng.shuffle(treated);
        rng.shuffle(control);
        auto t_parts = partition(treated, fractions);
        auto c_parts = partition(control, fractions);
        parts.resize(fractions.size());
        for (std::size_t k = 0; k < fractions.size(); ++k) {
            parts[k] = std::move(t_parts[k]);
            parts[k].insert(parts[k].end(), c_parts[k].begin(), c_parts[k].end());
            std::sort(parts[k].begin(), parts[k].end());
        }
    } else {
        std::vector<std::size_t> idx(dataset.size());
        std::iota(idx.begin(), idx.end(), 0);
        rng.shuffle(idx);
        parts = partition(idx, fractions);
    }

    std::vector<Dataset> out;
    out.reserve(parts.size());
    for (std::size_t k = 0; k < parts.size(); ++k) {
        if (parts[k].empty())
            throw PreconditionError("split: part " + std::to_string(k) + " would be empty");
        out.push_back(subset(dataset, parts[k], dataset.name() + "/part" + std::to_string(k)));
    }
    return out;
}

std::vector<std::pair<Dataset, Dataset>> kfold(const Dataset& dataset, int k, std::uint64_t seed) {
    const std::size_t n = dataset.size();
    if (k < 2 || static_cast<std::size_t>(k) > n)
        throw PreconditionError("kfold: k must lie in [2, n]");

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    rng.shuffle(idx);

    std::vector<std::pair<Dataset, Dataset>> folds;
    folds.reserve(k);
    std::size_t start = 0;
    for (int fold = 0; fold < k; ++fold) {
        const std::size_t size = n / k + (static_cast<std::size_t>(fold) < n % k ? 1 : 0);
        std::vector<std::size_t> test_idx(idx.begin() + start, idx.begin() + start + size);
        std::vector<std::size_t> train_idx;
        train_idx.reserve(n - size);
        train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + start);
        train_idx.insert(train_idx.end(), idx.begin() + start + size, idx.end());
        std::sort(test_idx.begin(), test_idx.end());
        std::sort(train_idx.begin(), train_idx.end());
        const std::string tag = dataset.name() + "/fold" + std::to_string(fold);
        folds.emplace_back(subset(dataset, train_idx, tag + "/train"),
                           subset(dataset, test_idx, tag + "/test"));
        start += size;
    }
    return folds;
}

}  // namespace cdm
