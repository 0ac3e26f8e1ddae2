#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "inspect/field.hpp"

namespace inspect {

enum class SourceKind { Idx, ImageDir };
enum class DirLayout { Flat, PerClassSubdirs };

/// Decoded dataset held in memory. Pixel values are in [0, 1].
struct DatasetHandle {
  SourceKind kind = SourceKind::Idx;
  Shape shape;
  bool has_labels = false;
  std::vector<PixelField> images;
  std::vector<int> labels;               ///< empty unless has_labels
  std::vector<std::string> class_names;  ///< name of each label value
  int padding = 0;                       ///< zero border added on each side

  [[nodiscard]] std::size_t count() const { return images.size(); }
  /// Images carrying `label`, in file order. Throws DomainError without labels.
  [[nodiscard]] std::vector<PixelField> with_label(int label) const;
  /// Distinct label values, ascending.
  [[nodiscard]] std::vector<int> distinct_labels() const;
};

/// Reads an IDX image file (magic 0x00000803) and optionally an IDX label
/// file (0x00000801). Either may be gzip-compressed. A nonzero `pad_to`
/// zero-pads each image symmetrically to pad_to x pad_to.
/// Errors: IoError (missing/unreadable), BadMagicError, TruncatedError,
/// CountMismatchError, ShapeError (padding impossible).
DatasetHandle load_idx(const std::filesystem::path& images,
                       const std::filesystem::path& labels = {}, int pad_to = 0);

/// Writes an uncompressed IDX pair; values are rounded from [0, 1] to bytes.
void write_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
               const std::vector<PixelField>& data, const std::vector<int>& label_values);

/// Decodes every .pgm (P5) / .ppm (P6) file under `dir`. Flat: one directory,
/// no labels. PerClassSubdirs: each subdirectory is a class, labelled
/// 0, 1, ... in lexicographic order of the directory names.
/// Errors: IoError, FormatError (unsupported file), ShapeError (mixed shapes).
DatasetHandle load_image_dir(const std::filesystem::path& dir, DirLayout layout);

/// Binary PGM/PPM with maxval <= 255; one channel for P5, three for P6.
PixelField read_pnm(const std::filesystem::path& path);
/// Writes P5 for one channel, P6 for three; values clamped to [0, 1] and
/// rounded to maxval 255.
void write_pnm(const std::filesystem::path& path, const PixelField& image);

/// Whole file as bytes, transparently gunzipped when it starts with 1f 8b.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace inspect
