#pragma once

// SDPA sparse format (.dat-s) export and import.
//
// The exported file encodes the problem so that the SDPA-side dual
//   max <F_0, Y>  s.t.  <F_k, Y> = c_k,  Y PSD
// is exactly our problem (F_0 = -C, F_k = A_k, c = b); an external SDPA
// solver's dual optimum is then the negative of our minimum. Inequality
// rows become equalities with slack entries, and each free scalar is split
// into a difference of two nonnegative variables; both kinds of auxiliary
// variable live in one trailing diagonal block. Runs of size-1 blocks are
// written as diagonal blocks, and the importer expands them back, so a
// file produced here re-exports byte-identically after import.

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "ioc/sdp.hpp"

namespace ioc::sdpa {

namespace detail {

struct FileBlock {
  int size;  // negative: diagonal block of |size|
};

// Canonical layout: user blocks with maximal runs of size-1 blocks
// coalesced into diagonal blocks, plus one trailing auxiliary diagonal
// block for slacks and free-variable splits.
struct Layout {
  std::vector<FileBlock> blocks;
  // user block -> (file block index, offset within it)
  std::vector<std::pair<int, int>> user_pos;
  // slot k -> position; slots 0..num_slacks-1 are slacks, then (s+, s-)
  // pairs for the free scalars
  std::vector<std::pair<int, int>> aux_pos;
  int num_slacks = 0;
  int num_frees = 0;
};

inline Layout make_layout(const sdp::SdpProblem& p) {
  Layout lay;
  for (const auto& row : p.rows)
    if (row.kind == sdp::RowKind::kLe) ++lay.num_slacks;
  lay.num_frees = p.num_scalars;
  const int num_aux = lay.num_slacks + 2 * lay.num_frees;

  // Single pass over user blocks followed by the size-1 auxiliaries, with
  // maximal runs of ones coalesced: the same structure an import/re-export
  // cycle produces.
  lay.user_pos.resize(p.block_sizes.size());
  lay.aux_pos.resize(num_aux);
  const int total = static_cast<int>(p.block_sizes.size()) + num_aux;
  int run = 0;
  for (int item = 0; item <= total; ++item) {
    bool is_user = item < static_cast<int>(p.block_sizes.size());
    bool is_aux = !is_user && item < total;
    int size = is_user ? p.block_sizes[item] : 1;
    if (item < total && size == 1) {
      auto pos = std::make_pair(static_cast<int>(lay.blocks.size()), run++);
      if (is_user)
        lay.user_pos[item] = pos;
      else
        lay.aux_pos[item - p.block_sizes.size()] = pos;
      continue;
    }
    if (run > 0) {
      lay.blocks.push_back({-run});
      run = 0;
    }
    if (is_user) {
      lay.user_pos[item] = {static_cast<int>(lay.blocks.size()), 0};
      lay.blocks.push_back({size});
    }
    (void)is_aux;
  }
  return lay;
}

using EntryMap = std::map<std::tuple<int, int, int>, double>;  // (blk,i,j)->v

inline void add_mat_entries(const Layout& lay,
                            const std::vector<sdp::BlockEntry>& mat,
                            EntryMap* out) {
  for (const auto& e : mat) {
    auto [fb, off] = lay.user_pos[e.block];
    (*out)[{fb, e.i + off, e.j + off}] += e.value;
  }
}

inline void add_sca_entries(const Layout& lay,
                            const std::vector<sdp::ScalarEntry>& sca,
                            EntryMap* out) {
  for (const auto& e : sca) {
    auto [pb, po] = lay.aux_pos[lay.num_slacks + 2 * e.scalar];
    auto [nb, no] = lay.aux_pos[lay.num_slacks + 2 * e.scalar + 1];
    (*out)[{pb, po, po}] += e.value;
    (*out)[{nb, no, no}] -= e.value;
  }
}

inline void write_entries(std::ostream& os, int k, const EntryMap& entries) {
  char buf[64];
  for (const auto& [key, v] : entries) {
    if (v == 0.0) continue;
    auto [blk, i, j] = key;
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << k << " " << blk + 1 << " " << i + 1 << " " << j + 1 << " " << buf
       << "\n";
  }
}

}  // namespace detail

inline void export_sdpa(const sdp::SdpProblem& p, std::ostream& os) {
  p.validate();
  detail::Layout lay = detail::make_layout(p);
  os << "* ioc SDPA sparse export\n";
  os << p.rows.size() << "\n";
  os << lay.blocks.size() << "\n";
  for (size_t b = 0; b < lay.blocks.size(); ++b)
    os << lay.blocks[b].size << (b + 1 < lay.blocks.size() ? " " : "\n");
  if (lay.blocks.empty()) os << "\n";
  char buf[64];
  for (size_t r = 0; r < p.rows.size(); ++r) {
    std::snprintf(buf, sizeof(buf), "%.17g", p.rows[r].rhs);
    os << buf << (r + 1 < p.rows.size() ? " " : "");
  }
  os << "\n";

  // F_0 = -C.
  detail::EntryMap f0;
  for (const auto& e : p.obj_mat) {
    auto [fb, off] = lay.user_pos[e.block];
    f0[{fb, e.i + off, e.j + off}] -= e.value;
  }
  for (const auto& e : p.obj_sca) {
    auto [pb, po] = lay.aux_pos[lay.num_slacks + 2 * e.scalar];
    auto [nb, no] = lay.aux_pos[lay.num_slacks + 2 * e.scalar + 1];
    f0[{pb, po, po}] -= e.value;
    f0[{nb, no, no}] += e.value;
  }
  detail::write_entries(os, 0, f0);

  int slack = 0;
  for (size_t r = 0; r < p.rows.size(); ++r) {
    detail::EntryMap fk;
    detail::add_mat_entries(lay, p.rows[r].mat, &fk);
    detail::add_sca_entries(lay, p.rows[r].sca, &fk);
    if (p.rows[r].kind == sdp::RowKind::kLe) {
      auto [sb, so] = lay.aux_pos[slack++];
      fk[{sb, so, so}] += 1.0;
    }
    detail::write_entries(os, static_cast<int>(r) + 1, fk);
  }
  if (!os) throw std::runtime_error("export_sdpa: stream write failed");
}

inline void export_sdpa_file(const sdp::SdpProblem& p,
                             const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("export_sdpa: cannot open " + path);
  export_sdpa(p, os);
}

/// Reads an SDPA sparse file back into an SdpProblem (all rows equalities,
/// no free scalars; diagonal blocks become runs of 1x1 PSD blocks).
inline sdp::SdpProblem import_sdpa(std::istream& is) {
  std::string line;
  auto next_data_line = [&]() -> std::string {
    while (std::getline(is, line)) {
      size_t k = line.find_first_not_of(" \t\r");
      if (k == std::string::npos) continue;
      if (line[k] == '*' || line[k] == '"') continue;
      return line.substr(k);
    }
    throw std::runtime_error("import_sdpa: unexpected end of file");
  };

  int m = std::stoi(next_data_line());
  int nblock = std::stoi(next_data_line());
  std::istringstream bs(next_data_line());
  sdp::SdpProblem p;
  // file block -> (first user block, signed size)
  std::vector<std::pair<int, int>> file_blocks;
  for (int b = 0; b < nblock; ++b) {
    std::string tok;
    if (!(bs >> tok))
      throw std::runtime_error("import_sdpa: missing block size");
    // Tolerate the conventional "(...)" decorations.
    std::string digits;
    for (char ch : tok)
      if (ch == '-' || std::isdigit(static_cast<unsigned char>(ch)))
        digits += ch;
    int size = std::stoi(digits);
    int first = static_cast<int>(p.block_sizes.size());
    if (size >= 0) {
      p.block_sizes.push_back(size);
    } else {
      for (int d = 0; d < -size; ++d) p.block_sizes.push_back(1);
    }
    file_blocks.emplace_back(first, size);
  }
  std::istringstream cs(next_data_line());
  p.rows.resize(m);
  for (int r = 0; r < m; ++r) {
    if (!(cs >> p.rows[r].rhs))
      throw std::runtime_error("import_sdpa: missing rhs value");
    p.rows[r].kind = sdp::RowKind::kEq;
    p.rows[r].name = "row" + std::to_string(r + 1);
  }

  int k, blk, i, j;
  double v;
  while (is >> k >> blk >> i >> j >> v) {
    if (k < 0 || k > m || blk < 1 || blk > nblock)
      throw std::runtime_error("import_sdpa: entry out of range");
    auto [first, size] = file_blocks[blk - 1];
    sdp::BlockEntry e;
    if (size < 0) {
      if (i != j)
        throw std::runtime_error("import_sdpa: off-diagonal entry in "
                                 "diagonal block");
      e = {first + (i - 1), 0, 0, v};
    } else {
      int a = std::min(i, j) - 1, b2 = std::max(i, j) - 1;
      e = {first, a, b2, v};
    }
    if (k == 0) {
      e.value = -v;  // C = -F_0
      p.obj_mat.push_back(e);
    } else {
      p.rows[k - 1].mat.push_back(e);
    }
  }
  return p;
}

inline sdp::SdpProblem import_sdpa_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("import_sdpa: cannot open " + path);
  return import_sdpa(is);
}

inline std::string export_sdpa_string(const sdp::SdpProblem& p) {
  std::ostringstream os;
  export_sdpa(p, os);
  return os.str();
}

}  // namespace ioc::sdpa
