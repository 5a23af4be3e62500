#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "resilisim/simulation.hpp"

namespace resilisim {

/// Append-only episode file, little-endian.
///
///   header : "RSEP" u32 version(=1) u32 n_areas u32 horizon
///   record : u64 episode_index u64 scenario_seed u32 duration
///            u32 n_failures (u32 edge, u32 hour)*
///            u32 n_repairs  (u32 edge, u32 hour)*
///            u8 gust[n_areas] f64 resilience[n_areas]
///            f64 curve[n_areas][horizon + 1]
///   footer : "RSIX" u64 count u64 offset[count] u64 footer_offset "RSND"
///
/// The footer is written on close(); a file without one is still readable
/// by a sequential scan.
class EpisodeStoreWriter {
 public:
  EpisodeStoreWriter(const std::filesystem::path& path, std::uint32_t n_areas, std::uint32_t horizon);
  ~EpisodeStoreWriter();
  EpisodeStoreWriter(const EpisodeStoreWriter&) = delete;
  EpisodeStoreWriter& operator=(const EpisodeStoreWriter&) = delete;

  void append(const EpisodeRecord& rec);
  void close();
  std::uint64_t count() const { return offsets_.size(); }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::uint32_t n_areas_;
  std::uint32_t horizon_;
  std::vector<std::uint64_t> offsets_;
  bool closed_ = false;
};

class EpisodeStore {
 public:
  static EpisodeStore open(const std::filesystem::path& path);

  std::size_t size() const { return offsets_.size(); }
  bool empty() const { return offsets_.empty(); }
  std::uint32_t area_count() const { return n_areas_; }
  std::uint32_t horizon() const { return horizon_; }

  EpisodeRecord read(std::size_t i) const;
  std::vector<EpisodeRecord> read_all() const;

 private:
  std::filesystem::path path_;
  std::uint32_t n_areas_ = 0;
  std::uint32_t horizon_ = 0;
  std::vector<std::uint64_t> offsets_;
};

}  // namespace resilisim
