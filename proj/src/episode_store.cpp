#include "resilisim/episode_store.hpp"

#include "resilisim/binary_io.hpp"

namespace resilisim {

namespace {

constexpr std::uint32_t kStoreVersion = 1;

void write_record(BinaryWriter& w, const EpisodeRecord& rec) {
  w.put(rec.episode_index);
  w.put(rec.scenario_seed);
  w.put(rec.duration);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(rec.failures.size()));
  for (const auto& f : rec.failures) {
    w.put(f.edge);
    w.put(f.hour);
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(rec.repairs.size()));
  for (const auto& r : rec.repairs) {
    w.put(r.edge);
    w.put(r.hour);
  }
  for (const auto g : rec.area_gust) w.put(g);
  for (const auto r : rec.area_resilience) w.put(r);
  for (const auto p : rec.curves) w.put(p);
}

EpisodeRecord read_record(BinaryReader& r, std::uint32_t n_areas, std::uint32_t horizon) {
  EpisodeRecord rec;
  rec.horizon = horizon;
  rec.episode_index = r.get<std::uint64_t>();
  rec.scenario_seed = r.get<std::uint64_t>();
  rec.duration = r.get<std::uint32_t>();
  auto read_events = [&](std::vector<EdgeEvent>& events) {
    const auto n = r.get<std::uint32_t>();
    events.resize(n);
    for (auto& e : events) {
      e.edge = r.get<std::uint32_t>();
      e.hour = r.get<std::uint32_t>();
    }
  };
  read_events(rec.failures);
  read_events(rec.repairs);
  rec.area_gust.resize(n_areas);
  for (auto& g : rec.area_gust) g = r.get<std::uint8_t>();
  rec.area_resilience.resize(n_areas);
  for (auto& v : rec.area_resilience) v = r.get<double>();
  rec.curves.resize(static_cast<std::size_t>(n_areas) * (horizon + 1));
  for (auto& v : rec.curves) v = r.get<double>();
  return rec;
}

constexpr std::uint64_t kHeaderBytes = 4 + 3 * 4;

}  // namespace

EpisodeStoreWriter::EpisodeStoreWriter(const std::filesystem::path& path, std::uint32_t n_areas,
                                       std::uint32_t horizon)
    : path_(path), n_areas_(n_areas), horizon_(horizon) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw std::runtime_error("cannot create episode store " + path.string());
  BinaryWriter w(out_);
  w.put_magic("RSEP");
  w.put(kStoreVersion);
  w.put(n_areas_);
  w.put(horizon_);
}

EpisodeStoreWriter::~EpisodeStoreWriter() {
  try {
    close();
  } catch (...) {
  }
}

void EpisodeStoreWriter::append(const EpisodeRecord& rec) {
  if (closed_) throw std::runtime_error("episode store already closed");
  if (rec.area_count() != n_areas_ || rec.horizon != horizon_)
    throw std::runtime_error("episode record shape does not match the store");
  offsets_.push_back(static_cast<std::uint64_t>(out_.tellp()));
  BinaryWriter w(out_);
  write_record(w, rec);
  if (!out_) throw std::runtime_error("write failed: " + path_.string());
}

void EpisodeStoreWriter::close() {
  if (closed_) return;
  closed_ = true;
  BinaryWriter w(out_);
  const auto footer = static_cast<std::uint64_t>(out_.tellp());
  w.put_magic("RSIX");
  w.put<std::uint64_t>(offsets_.size());
  for (const auto o : offsets_) w.put(o);
  w.put(footer);
  w.put_magic("RSND");
  out_.close();
  if (out_.fail()) throw std::runtime_error("write failed: " + path_.string());
}

EpisodeStore EpisodeStore::open(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open episode store " + path.string());
  BinaryReader r(in);
  r.expect_magic("RSEP");
  const auto version = r.get<std::uint32_t>();
  if (version != kStoreVersion) throw FormatError("unsupported episode store version");
  EpisodeStore store;
  store.path_ = path;
  store.n_areas_ = r.get<std::uint32_t>();
  store.horizon_ = r.get<std::uint32_t>();

  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::uint64_t>(in.tellg());
  bool indexed = false;
  if (size >= kHeaderBytes + 12) {
    in.seekg(static_cast<std::streamoff>(size - 12));
    const auto footer = r.get<std::uint64_t>();
    char tail[4];
    in.read(tail, 4);
    if (in && std::string_view(tail, 4) == "RSND" && footer >= kHeaderBytes && footer < size) {
      in.seekg(static_cast<std::streamoff>(footer));
      r.expect_magic("RSIX");
      const auto count = r.get<std::uint64_t>();
      if (count > size) throw FormatError("corrupt episode index");
      store.offsets_.resize(count);
      for (auto& o : store.offsets_) o = r.get<std::uint64_t>();
      indexed = true;
    }
  }
  if (!indexed) {
    // No footer (interrupted run): rebuild the index by scanning.
    in.clear();
    in.seekg(static_cast<std::streamoff>(kHeaderBytes));
    while (true) {
      const auto at = static_cast<std::uint64_t>(in.tellg());
      if (at >= size) break;
      try {
        read_record(r, store.n_areas_, store.horizon_);
      } catch (const FormatError&) {
        break;
      }
      store.offsets_.push_back(at);
    }
  }
  return store;
}

EpisodeRecord EpisodeStore::read(std::size_t i) const {
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open episode store " + path_.string());
  in.seekg(static_cast<std::streamoff>(offsets_.at(i)));
  BinaryReader r(in);
  return read_record(r, n_areas_, horizon_);
}

std::vector<EpisodeRecord> EpisodeStore::read_all() const {
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open episode store " + path_.string());
  BinaryReader r(in);
  std::vector<EpisodeRecord> out;
  out.reserve(offsets_.size());
  for (const auto o : offsets_) {
    in.seekg(static_cast<std::streamoff>(o));
    out.push_back(read_record(r, n_areas_, horizon_));
  }
  return out;
}

}  // namespace resilisim
