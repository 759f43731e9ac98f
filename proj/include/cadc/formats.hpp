#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cadc/alloc.hpp"
#include "cadc/core.hpp"
#include "cadc/systolic.hpp"

namespace cadc {

// Contour file: one `id R C kind hexmask` record per line. The mask is
// window*window bits, row-major, packed MSB-first into hex digits with the
// last digit zero-padded. The window size follows from the digit count.

std::string pack_mask_hex(const Contour& c);
void write_contours(std::ostream& out, std::span<const Contour> contours);
std::vector<Contour> read_contours(std::istream& in);
void save_contours(const std::filesystem::path& path,
                   std::span<const Contour> contours);
std::vector<Contour> load_contours(const std::filesystem::path& path);

// Session file: header `width height n_frames n_c frame_rate seed`, a line of
// positions, then n_frames raw row-major frames.

struct SessionHeader {
  FrameDims dims;
  std::int64_t n_frames = 0;
  SessionMeta meta;
};

std::string format_session_header(const SessionHeader& h);

/// Writes header and positions up front, then frames one at a time.
class SessionWriter {
 public:
  SessionWriter(const std::filesystem::path& path, const SessionHeader& header,
                std::span<const int> positions);
  void write(const Frame& frame);
  /// Throws InvalidArgument if fewer frames than declared were written.
  void close();
  ~SessionWriter();

 private:
  std::ofstream out_;
  SessionHeader header_;
  std::int64_t written_ = 0;
  bool closed_ = false;
};

/// Sequential or random access to frames without loading the whole file.
/// The size is checked against the header on open.
class SessionReader {
 public:
  explicit SessionReader(const std::filesystem::path& path);

  const SessionHeader& header() const { return header_; }
  const std::vector<int>& positions() const { return positions_; }
  std::int64_t size() const { return header_.n_frames; }
  Frame read(std::int64_t index);

 private:
  std::ifstream in_;
  SessionHeader header_;
  std::vector<int> positions_;
  std::uint64_t data_offset_ = 0;
};

void save_session(const std::filesystem::path& path, const Session& session);
/// Frames and positions only; contours live in their own file.
Session load_session(const std::filesystem::path& path);

// Allocation file: `contour_id round j k` per contour, then
// `# shape J K rounds`, `# bounds round first_row last_row` and
// `# skip round from to` (half-open scan-index range) lines.

void write_allocation(std::ostream& out, const Allocation& alloc);
Allocation read_allocation(std::istream& in);
void save_allocation(const std::filesystem::path& path,
                     const Allocation& alloc);
Allocation load_allocation(const std::filesystem::path& path);

/// `frame,<ids...>` header, then one row per trace vector.
void write_trace_csv_header(std::ostream& out, std::span<const int> ids);
void write_trace_csv_row(std::ostream& out, const TraceVector& t);

/// `frame,round,load,compute,store,skipped,total_cycles,wall_us,conflicts`.
/// Per-round phase columns; the last three are frame totals.
void write_report_csv_header(std::ostream& out);
void write_report_csv_rows(std::ostream& out, std::int64_t frame,
                           const SimReport& report);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace cadc
