#pragma once

#include <filesystem>
#include <string>

#include "mappfn/data/dataset.hpp"

namespace mappfn::harness {

struct IngestOptions {
  /// Treatment label of untreated cells.
  std::string control_label = "control";
};

struct IngestResult {
  data::Dataset dataset;
  int dropped_cells = 0;
};

/// Reads a cells x genes count matrix and a labels CSV with header
/// `cell_id,context,treatment`, normalizes counts, and groups cells into one
/// observational batch and one batch per treatment for every context.
///
/// The matrix is either a binary matrix file or a CSV whose optional header row
/// names the genes. Treatments naming a gene (or a gene index) are encoded as
/// one-hot knockouts of that gene; other labels get ids past the last gene and
/// an all-zero code. Contexts and treatments are numbered in order of first
/// appearance.
IngestResult ingest_and_preprocess(const std::filesystem::path& matrix_path,
                                   const std::filesystem::path& labels_path, const IngestOptions& options = {});

/// Same, on already loaded inputs. `labels` holds (context, treatment) per row.
IngestResult ingest_counts(const Matrix& counts, const std::vector<std::string>& gene_names,
                           const std::vector<std::pair<std::string, std::string>>& labels,
                           const IngestOptions& options = {});

}  // namespace mappfn::harness
