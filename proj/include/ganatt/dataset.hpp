#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ganatt/common.hpp"
#include "ganatt/matrix.hpp"

namespace ganatt {

// Rows of (covariates, outcome, treatment flag). Immutable by convention
// once constructed; treatment values are always 0 or 1.
struct ObservationalDataset {
    Matrix covariates;                      // n x q
    std::vector<double> outcomes;           // n
    std::vector<int> treatment;             // n, each 0 or 1
    std::vector<std::string> column_names;  // q covariate labels

    std::size_t size() const { return outcomes.size(); }
    std::size_t dim() const { return covariates.cols(); }

    void validate() const {
        if (covariates.rows() != outcomes.size() || outcomes.size() != treatment.size())
            throw ShapeError("dataset: covariates, outcomes and treatment row counts differ");
        if (column_names.size() != covariates.cols())
            throw ShapeError("dataset: column name count does not match covariate count");
        for (int d : treatment)
            if (d != 0 && d != 1) throw DataError("dataset: treatment flag outside {0,1}");
        if (!covariates.all_finite()) throw DataError("dataset: non-finite covariate value");
        for (double y : outcomes)
            if (!std::isfinite(y)) throw DataError("dataset: non-finite outcome value");
    }

    std::size_t count_group(int group) const {
        return static_cast<std::size_t>(std::count(treatment.begin(), treatment.end(), group));
    }

    ObservationalDataset filter_group(int group) const {
        ObservationalDataset out;
        out.column_names = column_names;
        const std::size_t n = count_group(group);
        out.covariates = Matrix(n, dim());
        out.outcomes.reserve(n);
        out.treatment.reserve(n);
        std::size_t r = 0;
        for (std::size_t i = 0; i < size(); ++i) {
            if (treatment[i] != group) continue;
            for (std::size_t j = 0; j < dim(); ++j) out.covariates(r, j) = covariates(i, j);
            out.outcomes.push_back(outcomes[i]);
            out.treatment.push_back(group);
            ++r;
        }
        return out;
    }

    // Covariate rows of one group as a matrix.
    Matrix group_covariates(int group) const { return filter_group(group).covariates; }

    static ObservationalDataset concat(const ObservationalDataset& a, const ObservationalDataset& b) {
        if (a.dim() != b.dim()) throw ShapeError("concat: covariate dimensions differ");
        ObservationalDataset out;
        out.column_names = a.column_names;
        out.covariates = Matrix(a.size() + b.size(), a.dim());
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < a.dim(); ++j) out.covariates(i, j) = a.covariates(i, j);
        for (std::size_t i = 0; i < b.size(); ++i)
            for (std::size_t j = 0; j < b.dim(); ++j) out.covariates(a.size() + i, j) = b.covariates(i, j);
        out.outcomes = a.outcomes;
        out.outcomes.insert(out.outcomes.end(), b.outcomes.begin(), b.outcomes.end());
        out.treatment = a.treatment;
        out.treatment.insert(out.treatment.end(), b.treatment.begin(), b.treatment.end());
        return out;
    }
};

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) throw DataError("mean of empty vector");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double stddev_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline std::vector<double> outcomes_of_group(const ObservationalDataset& data, int group) {
    std::vector<double> out;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (data.treatment[i] == group) out.push_back(data.outcomes[i]);
    return out;
}

// ---------------------------------------------------------------------------
// CSV ingestion

struct CsvSchema {
    std::string outcome_column = "y";
    std::string treatment_column = "d";
    // Empty means: every other header column, in file order.
    std::vector<std::string> covariate_columns;
    // Per-column cap on the fraction of missing covariate cells that may be
    // mean-imputed; columns above the cap have their incomplete rows dropped.
    double max_missing_fraction = 0.04;
};

struct LoadReport {
    std::size_t rows_in_file = 0;
    std::size_t rows_loaded = 0;
    std::size_t dropped_missing_outcome = 0;
    std::size_t dropped_missing_treatment = 0;
    std::size_t dropped_missing_covariate = 0;
    std::vector<std::size_t> imputed_cells_per_column;

    std::size_t imputed_cells() const {
        std::size_t total = 0;
        for (std::size_t c : imputed_cells_per_column) total += c;
        return total;
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline bool is_missing_token(const std::string& s) {
    return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" || s == "NULL";
}

inline std::optional<double> parse_cell(const std::string& raw, std::size_t row, const std::string& col) {
    const std::string s = trim(raw);
    if (is_missing_token(s)) return std::nullopt;
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ParseError("non-numeric cell '" + s + "' at row " + std::to_string(row) +
                         ", column '" + col + "'");
    }
    if (pos != s.size())
        throw ParseError("non-numeric cell '" + s + "' at row " + std::to_string(row) +
                         ", column '" + col + "'");
    return v;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline ObservationalDataset load_csv(const std::string& path, const CsvSchema& schema,
                                     LoadReport* report_out = nullptr) {
    std::ifstream in(path);
    if (!in) throw IoError("input not found: " + path);

    std::string header_line;
    if (!std::getline(in, header_line)) throw ParseError(path + ": missing header row");
    const auto header = detail::split_csv_line(header_line);
    std::vector<std::string> names;
    names.reserve(header.size());
    for (const auto& h : header) names.push_back(detail::trim(h));

    auto find_col = [&](const std::string& want) -> std::size_t {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == want) return i;
        throw ParseError(path + ": unknown column '" + want + "'");
    };

    const std::size_t outcome_idx = find_col(schema.outcome_column);
    const std::size_t treatment_idx = find_col(schema.treatment_column);
    std::vector<std::size_t> cov_idx;
    std::vector<std::string> cov_names;
    if (schema.covariate_columns.empty()) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (i == outcome_idx || i == treatment_idx) continue;
            cov_idx.push_back(i);
            cov_names.push_back(names[i]);
        }
    } else {
        for (const auto& c : schema.covariate_columns) {
            const std::size_t i = find_col(c);
            if (i == outcome_idx || i == treatment_idx)
                throw ParseError(path + ": column '" + c + "' used in more than one role");
            cov_idx.push_back(i);
            cov_names.push_back(c);
        }
    }
    if (cov_idx.empty()) throw ParseError(path + ": no covariate columns");

    const std::size_t q = cov_idx.size();
    LoadReport report;
    report.imputed_cells_per_column.assign(q, 0);

    struct RawRow {
        std::vector<std::optional<double>> covs;
        double outcome;
        int treatment;
    };
    std::vector<RawRow> rows;
    std::string line;
    std::size_t file_row = 1;  // header was row 1
    while (std::getline(in, line)) {
        ++file_row;
        if (detail::trim(line).empty()) continue;
        report.rows_in_file += 1;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != names.size())
            throw ParseError(path + ": row " + std::to_string(file_row) + " has " +
                             std::to_string(fields.size()) + " fields, header has " +
                             std::to_string(names.size()));
        const auto outcome = detail::parse_cell(fields[outcome_idx], file_row, schema.outcome_column);
        if (!outcome) {
            report.dropped_missing_outcome += 1;
            continue;
        }
        const auto treat_raw = detail::parse_cell(fields[treatment_idx], file_row, schema.treatment_column);
        if (!treat_raw) {
            report.dropped_missing_treatment += 1;
            continue;
        }
        if (*treat_raw != 0.0 && *treat_raw != 1.0)
            throw ParseError(path + ": treatment value '" + detail::trim(fields[treatment_idx]) +
                             "' at row " + std::to_string(file_row) + " is not 0 or 1");
        RawRow r;
        r.outcome = *outcome;
        r.treatment = static_cast<int>(*treat_raw);
        r.covs.reserve(q);
        for (std::size_t j = 0; j < q; ++j)
            r.covs.push_back(detail::parse_cell(fields[cov_idx[j]], file_row, cov_names[j]));
        rows.push_back(std::move(r));
    }

    // Column means over observed cells; imputation only for columns whose
    // missing share stays under the configured threshold.
    std::vector<double> col_mean(q, 0.0);
    std::vector<std::size_t> col_missing(q, 0);
    for (std::size_t j = 0; j < q; ++j) {
        double sum = 0.0;
        std::size_t seen = 0;
        for (const auto& r : rows) {
            if (r.covs[j]) {
                sum += *r.covs[j];
                ++seen;
            } else {
                ++col_missing[j];
            }
        }
        if (seen == 0 && !rows.empty())
            throw ParseError(path + ": column '" + cov_names[j] + "' has no observed values");
        col_mean[j] = seen ? sum / static_cast<double>(seen) : 0.0;
    }
    std::vector<bool> imputable(q, false);
    for (std::size_t j = 0; j < q; ++j) {
        const double frac = rows.empty() ? 0.0
                                         : static_cast<double>(col_missing[j]) /
                                               static_cast<double>(rows.size());
        imputable[j] = frac <= schema.max_missing_fraction;
    }

    ObservationalDataset data;
    data.column_names = cov_names;
    std::vector<double> flat;
    for (const auto& r : rows) {
        bool drop = false;
        for (std::size_t j = 0; j < q; ++j) {
            if (!r.covs[j] && !imputable[j]) {
                drop = true;
                break;
            }
        }
        if (drop) {
            report.dropped_missing_covariate += 1;
            continue;
        }
        for (std::size_t j = 0; j < q; ++j) {
            if (r.covs[j]) {
                flat.push_back(*r.covs[j]);
            } else {
                flat.push_back(col_mean[j]);
                report.imputed_cells_per_column[j] += 1;
            }
        }
        data.outcomes.push_back(r.outcome);
        data.treatment.push_back(r.treatment);
    }
    data.covariates = Matrix(data.outcomes.size(), q);
    std::copy(flat.begin(), flat.end(), data.covariates.data());
    report.rows_loaded = data.size();
    data.validate();
    if (report_out) *report_out = report;
    return data;
}

inline void save_csv(const ObservationalDataset& data, const std::string& path,
                     const std::string& outcome_column = "y",
                     const std::string& treatment_column = "d") {
    data.validate();
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (std::size_t j = 0; j < data.dim(); ++j) out << data.column_names[j] << ",";
    out << outcome_column << "," << treatment_column << "\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = 0; j < data.dim(); ++j)
            out << detail::format_double(data.covariates(i, j)) << ",";
        out << detail::format_double(data.outcomes[i]) << "," << data.treatment[i] << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace ganatt
