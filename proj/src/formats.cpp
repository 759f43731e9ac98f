#include "cadc/formats.hpp"

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <sstream>
#include <string_view>

#include "cadc/error.hpp"

namespace cadc {

namespace {

constexpr std::string_view kHexDigits = "0123456789abcdef";

// Splits on single spaces, remembering where each token starts.
struct Token {
  std::string_view text;
  std::uint64_t offset;
};

std::vector<Token> tokenize(std::string_view line, std::uint64_t base) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    out.push_back({line.substr(i, j - i), base + i});
    i = j;
  }
  return out;
}

template <typename T>
T parse_number(const Token& t, std::string_view what) {
  T value{};
  const auto* first = t.text.data();
  const auto* last = first + t.text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw CorruptFileError(t.offset, "bad " + std::string(what) + " '" +
                                         std::string(t.text) + "'");
  return value;
}

// Iterates over '\n'-terminated lines with their byte offsets.
class LineCursor {
 public:
  explicit LineCursor(std::string_view data) : data_(data) {}

  bool next(std::string_view& line, std::uint64_t& offset) {
    if (pos_ >= data_.size()) return false;
    const auto nl = data_.find('\n', pos_);
    offset = pos_;
    if (nl == std::string_view::npos) {
      line = data_.substr(pos_);
      pos_ = data_.size();
    } else {
      line = data_.substr(pos_, nl - pos_);
      pos_ = nl + 1;
    }
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return true;
  }
  std::uint64_t position() const { return pos_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

int window_for_digits(std::size_t digits) {
  for (int n = 1; n <= 255; n += 2)
    if (static_cast<std::size_t>((n * n + 3) / 4) == digits) return n;
  return -1;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io_error, "write failed for " + path.string());
}

std::string pack_mask_hex(const Contour& c) {
  const std::size_t bits = c.mask.size();
  std::string hex((bits + 3) / 4, '0');
  for (std::size_t i = 0; i < bits; ++i) {
    if (!c.mask[i]) continue;
    const std::size_t d = i / 4;
    const int value = static_cast<int>(kHexDigits.find(hex[d]));
    hex[d] = kHexDigits[value | (8 >> (i % 4))];
  }
  return hex;
}

void write_contours(std::ostream& out, std::span<const Contour> contours) {
  for (const auto& c : contours)
    out << c.id << ' ' << c.center.row << ' ' << c.center.col << ' '
        << to_string(c.kind) << ' ' << pack_mask_hex(c) << '\n';
}

std::vector<Contour> read_contours(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string data = std::move(ss).str();
  LineCursor lines(data);
  std::string_view line;
  std::uint64_t offset = 0;
  std::vector<Contour> out;
  while (lines.next(line, offset)) {
    if (line.empty() || line.front() == '#') continue;
    const auto tok = tokenize(line, offset);
    if (tok.size() != 5)
      throw CorruptFileError(offset, "contour record needs 5 fields, got " +
                                         std::to_string(tok.size()));
    const int id = parse_number<int>(tok[0], "contour id");
    const int row = parse_number<int>(tok[1], "center row");
    const int col = parse_number<int>(tok[2], "center column");
    const auto kind = parse_contour_kind(tok[3].text);
    if (!kind)
      throw CorruptFileError(tok[3].offset,
                             "unknown contour kind '" +
                                 std::string(tok[3].text) + "'");
    const auto hex = tok[4].text;
    const int n = window_for_digits(hex.size());
    if (n < 0)
      throw CorruptFileError(tok[4].offset,
                             "mask length " + std::to_string(hex.size()) +
                                 " matches no odd window size");
    Contour c(id, {row, col}, n, *kind);
    const std::size_t bits = c.mask.size();
    for (std::size_t d = 0; d < hex.size(); ++d) {
      const auto v = kHexDigits.find(hex[d]);
      if (v == std::string_view::npos)
        throw CorruptFileError(tok[4].offset + d, "bad hex digit");
      for (int b = 0; b < 4; ++b) {
        const std::size_t i = d * 4 + b;
        const bool on = (v & (8u >> b)) != 0;
        if (i < bits)
          c.mask[i] = on ? 1 : 0;
        else if (on)
          throw CorruptFileError(tok[4].offset + d, "nonzero mask padding");
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

void save_contours(const std::filesystem::path& path,
                   std::span<const Contour> contours) {
  std::ostringstream ss;
  write_contours(ss, contours);
  write_file(path, ss.str());
}

std::vector<Contour> load_contours(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return read_contours(in);
}

std::string format_session_header(const SessionHeader& h) {
  std::ostringstream ss;
  ss << h.dims.width << ' ' << h.dims.height << ' ' << h.n_frames << ' '
     << h.meta.window << ' ' << format_double(h.meta.frame_rate) << ' '
     << h.meta.seed << '\n';
  return ss.str();
}

namespace {

std::string format_positions(std::span<const int> positions) {
  std::string s;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(positions[i]);
  }
  s += '\n';
  return s;
}

// Parses header and positions from the front of a session file and returns
// the offset of the first frame byte.
std::uint64_t parse_session_prefix(std::istream& in, SessionHeader& header,
                                   std::vector<int>& positions) {
  std::string line;
  if (!std::getline(in, line) || in.eof())
    throw CorruptFileError(0, "missing session header");
  const auto tok = tokenize(line, 0);
  if (tok.size() != 6)
    throw CorruptFileError(0, "session header needs 6 fields");
  header.dims.width = parse_number<int>(tok[0], "width");
  header.dims.height = parse_number<int>(tok[1], "height");
  header.n_frames = parse_number<std::int64_t>(tok[2], "frame count");
  header.meta.window = parse_number<int>(tok[3], "window size");
  header.meta.frame_rate = parse_number<double>(tok[4], "frame rate");
  header.meta.seed = parse_number<std::uint64_t>(tok[5], "seed");
  if (header.dims.width <= 0 || header.dims.height <= 0 ||
      header.n_frames < 0 || header.dims.width > 65535 ||
      header.dims.height > 65535)
    throw CorruptFileError(0, "invalid session dimensions");

  const std::uint64_t pos_offset = line.size() + 1;
  if (!std::getline(in, line) || in.eof())
    throw CorruptFileError(pos_offset, "missing positions line");
  const auto ptok = tokenize(line, pos_offset);
  if (static_cast<std::int64_t>(ptok.size()) != header.n_frames)
    throw CorruptFileError(pos_offset,
                           "expected " + std::to_string(header.n_frames) +
                               " positions, found " +
                               std::to_string(ptok.size()));
  positions.clear();
  for (const auto& t : ptok) {
    const int p = parse_number<int>(t, "position");
    if (p < 0 || p >= kPositionBins)
      throw CorruptFileError(t.offset, "position bin out of range");
    positions.push_back(p);
  }
  return pos_offset + line.size() + 1;
}

}  // namespace

SessionWriter::SessionWriter(const std::filesystem::path& path,
                             const SessionHeader& header,
                             std::span<const int> positions)
    : out_(path, std::ios::binary), header_(header) {
  if (!out_) throw Error(Errc::io_error, "cannot write " + path.string());
  if (static_cast<std::int64_t>(positions.size()) != header.n_frames)
    throw Error(Errc::invalid_argument, "positions do not match frame count");
  const auto head = format_session_header(header) + format_positions(positions);
  out_.write(head.data(), static_cast<std::streamsize>(head.size()));
}

void SessionWriter::write(const Frame& frame) {
  if (frame.dims != header_.dims)
    throw Error(Errc::invalid_argument, "frame dims differ from session");
  if (written_ >= header_.n_frames)
    throw Error(Errc::invalid_argument, "more frames than declared");
  out_.write(reinterpret_cast<const char*>(frame.pixels.data()),
             static_cast<std::streamsize>(frame.pixels.size()));
  ++written_;
}

void SessionWriter::close() {
  if (closed_) return;
  closed_ = true;
  out_.close();
  if (written_ != header_.n_frames)
    throw Error(Errc::invalid_argument,
                "wrote " + std::to_string(written_) + " of " +
                    std::to_string(header_.n_frames) + " frames");
  if (!out_) throw Error(Errc::io_error, "session write failed");
}

SessionWriter::~SessionWriter() {
  if (!closed_) out_.close();
}

SessionReader::SessionReader(const std::filesystem::path& path)
    : in_(path, std::ios::binary) {
  if (!in_) throw Error(Errc::io_error, "cannot open " + path.string());
  data_offset_ = parse_session_prefix(in_, header_, positions_);
  const auto size = std::filesystem::file_size(path);
  const std::uint64_t expected =
      data_offset_ + static_cast<std::uint64_t>(header_.n_frames) *
                         static_cast<std::uint64_t>(header_.dims.pixels());
  if (size != expected)
    throw CorruptFileError(std::min<std::uint64_t>(size, expected),
                           "session payload is " + std::to_string(size) +
                               " bytes, header implies " +
                               std::to_string(expected));
}

Frame SessionReader::read(std::int64_t index) {
  if (index < 0 || index >= header_.n_frames)
    throw Error(Errc::invalid_argument, "frame index out of range");
  Frame f(header_.dims, index);
  const std::uint64_t at =
      data_offset_ + static_cast<std::uint64_t>(index) * f.pixels.size();
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(at));
  in_.read(reinterpret_cast<char*>(f.pixels.data()),
           static_cast<std::streamsize>(f.pixels.size()));
  if (!in_) throw CorruptFileError(at, "short frame read");
  return f;
}

void save_session(const std::filesystem::path& path, const Session& session) {
  session.check();
  SessionHeader h{session.dims, static_cast<std::int64_t>(session.frames.size()),
                  session.meta};
  SessionWriter w(path, h, session.positions);
  for (const auto& f : session.frames) w.write(f);
  w.close();
}

Session load_session(const std::filesystem::path& path) {
  SessionReader reader(path);
  Session s;
  s.dims = reader.header().dims;
  s.meta = reader.header().meta;
  s.positions = reader.positions();
  s.frames.reserve(static_cast<std::size_t>(reader.size()));
  for (std::int64_t i = 0; i < reader.size(); ++i)
    s.frames.push_back(reader.read(i));
  return s;
}

void write_allocation(std::ostream& out, const Allocation& alloc) {
  for (const auto& e : alloc.entries)
    out << e.contour_id << ' ' << e.where.round << ' ' << e.where.te << ' '
        << e.where.slot << '\n';
  out << "# shape " << alloc.shape.tes << ' ' << alloc.shape.slots << ' '
      << alloc.shape.rounds << '\n';
  for (std::size_t r = 0; r < alloc.rounds.size(); ++r)
    out << "# bounds " << r << ' ' << alloc.rounds[r].bounds.first << ' '
        << alloc.rounds[r].bounds.last << '\n';
  for (std::size_t r = 0; r < alloc.rounds.size(); ++r)
    for (const auto& s : alloc.rounds[r].skips.ranges)
      out << "# skip " << r << ' ' << s.from << ' ' << s.to << '\n';
}

Allocation read_allocation(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string data = std::move(ss).str();
  LineCursor lines(data);
  std::string_view line;
  std::uint64_t offset = 0;
  Allocation alloc;
  bool have_shape = false;
  const auto round_at = [&](const Token& t) -> RoundPlan& {
    const auto r = parse_number<int>(t, "round");
    if (r < 0 || r > 1'000'000)
      throw CorruptFileError(t.offset, "round index out of range");
    if (alloc.rounds.size() <= static_cast<std::size_t>(r))
      alloc.rounds.resize(static_cast<std::size_t>(r) + 1);
    return alloc.rounds[r];
  };
  while (lines.next(line, offset)) {
    if (line.empty()) continue;
    const auto tok = tokenize(line, offset);
    if (tok.front().text == "#") {
      if (tok.size() < 2) continue;
      const auto tag = tok[1].text;
      if (tag == "shape") {
        if (tok.size() != 5) throw CorruptFileError(offset, "bad shape line");
        alloc.shape = {parse_number<int>(tok[2], "J"),
                       parse_number<int>(tok[3], "K"),
                       parse_number<int>(tok[4], "rounds")};
        have_shape = true;
      } else if (tag == "bounds") {
        if (tok.size() != 5) throw CorruptFileError(offset, "bad bounds line");
        auto& plan = round_at(tok[2]);
        plan.bounds = {parse_number<int>(tok[3], "first row"),
                       parse_number<int>(tok[4], "last row")};
      } else if (tag == "skip") {
        if (tok.size() != 5) throw CorruptFileError(offset, "bad skip line");
        auto& plan = round_at(tok[2]);
        SkipRange s{parse_number<std::int64_t>(tok[3], "skip start"),
                    parse_number<std::int64_t>(tok[4], "skip end")};
        if (s.from >= s.to ||
            (!plan.skips.ranges.empty() && plan.skips.ranges.back().to > s.from))
          throw CorruptFileError(tok[3].offset, "skip ranges must be sorted and disjoint");
        plan.skips.ranges.push_back(s);
      }
      continue;
    }
    if (tok.size() != 4)
      throw CorruptFileError(offset, "assignment needs 4 fields");
    alloc.entries.push_back({parse_number<int>(tok[0], "contour id"),
                             {parse_number<int>(tok[1], "round"),
                              parse_number<int>(tok[2], "TE index"),
                              parse_number<int>(tok[3], "slot")}});
  }
  if (!have_shape)
    throw CorruptFileError(data.size(), "allocation file has no shape line");
  if (!alloc.rounds.empty() &&
      static_cast<int>(alloc.rounds.size()) != alloc.shape.rounds)
    throw CorruptFileError(data.size(), "scan plans do not match round count");
  return alloc;
}

void save_allocation(const std::filesystem::path& path,
                     const Allocation& alloc) {
  std::ostringstream ss;
  write_allocation(ss, alloc);
  write_file(path, ss.str());
}

Allocation load_allocation(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return read_allocation(in);
}

void write_trace_csv_header(std::ostream& out, std::span<const int> ids) {
  out << "frame";
  for (int id : ids) out << ',' << id;
  out << '\n';
}

void write_trace_csv_row(std::ostream& out, const TraceVector& t) {
  out << t.frame;
  for (auto v : t.values) out << ',' << v;
  out << '\n';
}

void write_report_csv_header(std::ostream& out) {
  out << "frame,round,load,compute,store,skipped,total_cycles,wall_us,"
         "conflicts\n";
}

void write_report_csv_rows(std::ostream& out, std::int64_t frame,
                           const SimReport& report) {
  for (std::size_t r = 0; r < report.rounds.size(); ++r) {
    const auto& rc = report.rounds[r];
    out << frame << ',' << r << ',' << rc.load << ',' << rc.compute << ','
        << rc.store << ',' << rc.skipped << ',' << report.total_cycles << ','
        << std::fixed << std::setprecision(1) << report.wall_us
        << std::defaultfloat << ',' << report.conflicts << '\n';
  }
}

}  // namespace cadc
